#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fusionloc/autodiff.hpp"

namespace fusionloc {

// Single-file checkpoint container: an 8-byte magic, a length-prefixed JSON
// manifest (parameter names, shapes, blob offsets plus arbitrary metadata),
// and a payload of raw little-endian 64-bit floats. Round trips are
// bit-exact.
struct CheckpointBlob {
  std::string name;
  ad::Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  nlohmann::json meta;  // free-form: model config, epoch, optimizer scalars
  std::vector<CheckpointBlob> blobs;

  const CheckpointBlob* find(const std::string& name) const;
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

// Convenience: snapshot/restore of a parameter store under a name prefix.
void append_parameters(Checkpoint& ckpt, const ad::ParameterStore& params,
                       const std::string& prefix);
void restore_parameters(const Checkpoint& ckpt, ad::ParameterStore& params,
                        const std::string& prefix);

}  // namespace fusionloc

#include "fusionloc/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "fusionloc/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian");

namespace fusionloc {

namespace {

constexpr char kMagic[8] = {'F', 'L', 'C', 'K', 'P', 'T', '0', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& is, const std::string& path) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw IngestionError("checkpoint: truncated file " + path);
  }
  return v;
}

}  // namespace

const CheckpointBlob* Checkpoint::find(const std::string& name) const {
  for (const auto& b : blobs) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json manifest;
  manifest["meta"] = ckpt.meta;
  nlohmann::json params = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& b : ckpt.blobs) {
    params.push_back({{"name", b.name},
                      {"shape", b.shape},
                      {"offset", offset},
                      {"count", b.values.size()}});
    offset += b.values.size();
  }
  manifest["params"] = params;
  const std::string text = manifest.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("checkpoint: cannot open " + path + " for writing");
  os.write(kMagic, sizeof(kMagic));
  write_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& b : ckpt.blobs) {
    os.write(reinterpret_cast<const char*>(b.values.data()),
             static_cast<std::streamsize>(b.values.size() * sizeof(double)));
  }
  if (!os) throw IoError("checkpoint: failed writing " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot open " + path);
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, 8) != 0) {
    throw IngestionError("checkpoint: bad magic in " + path);
  }
  const std::uint64_t len = read_u64(is, path);
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len))) {
    throw IngestionError("checkpoint: truncated manifest in " + path);
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("checkpoint: bad manifest in " + path + ": " + e.what());
  }

  Checkpoint ckpt;
  ckpt.meta = manifest.value("meta", nlohmann::json::object());
  for (const auto& p : manifest.at("params")) {
    CheckpointBlob b;
    b.name = p.at("name").get<std::string>();
    b.shape = p.at("shape").get<ad::Shape>();
    const std::size_t count = p.at("count").get<std::size_t>();
    if (count != ad::shape_numel(b.shape)) {
      throw IngestionError("checkpoint: shape/count mismatch for " + b.name);
    }
    b.values.resize(count);
    if (!is.read(reinterpret_cast<char*>(b.values.data()),
                 static_cast<std::streamsize>(count * sizeof(double)))) {
      throw IngestionError("checkpoint: truncated payload in " + path);
    }
    ckpt.blobs.push_back(std::move(b));
  }
  return ckpt;
}

void append_parameters(Checkpoint& ckpt, const ad::ParameterStore& params,
                       const std::string& prefix) {
  for (const auto& p : params.all()) {
    CheckpointBlob b;
    b.name = prefix + p.name;
    b.shape = p.value.shape();
    b.values.assign(p.value.values().begin(), p.value.values().end());
    ckpt.blobs.push_back(std::move(b));
  }
}

void restore_parameters(const Checkpoint& ckpt, ad::ParameterStore& params,
                        const std::string& prefix) {
  for (const auto& p : params.all()) {
    const CheckpointBlob* b = ckpt.find(prefix + p.name);
    if (!b) {
      throw IngestionError("checkpoint: missing parameter " + prefix + p.name);
    }
    if (b->shape != p.value.shape()) {
      throw IngestionError("checkpoint: shape mismatch for " + prefix + p.name);
    }
    ad::Tensor t = p.value;
    auto dst = t.mutable_values();
    std::copy(b->values.begin(), b->values.end(), dst.begin());
  }
}

}  // namespace fusionloc

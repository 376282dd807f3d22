#pragma once

#include <stdexcept>

namespace fusionloc {

// Error taxonomy shared across the library. The CLI maps each category to a
// stable exit code and a single-line "error: <category>: ..." message.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A precondition on the arguments was violated.
struct InvalidInputError : Error {
  using Error::Error;
};

// Structurally fine input with no meaningful answer (empty cloud, constant
// depth, ...).
struct DegenerateInputError : Error {
  using Error::Error;
};

// A numeric operation produced NaN or Inf.
struct NumericError : Error {
  using Error::Error;
};

// A dataset file failed to load or parse.
struct IngestionError : Error {
  using Error::Error;
};

// Filesystem-level failure.
struct IoError : Error {
  using Error::Error;
};

}  // namespace fusionloc

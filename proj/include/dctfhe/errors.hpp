#pragma once

#include <stdexcept>
#include <string>

namespace dctfhe {

// Malformed or unsupported on-disk data (bad magic, wrong version, truncated blob).
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// A documented invariant was violated at runtime (e.g. accumulator exceeded its
// static bound). Distinct from FormatError so the CLI can map it to its own
// exit code.
struct InvariantError : std::runtime_error {
  explicit InvariantError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dctfhe

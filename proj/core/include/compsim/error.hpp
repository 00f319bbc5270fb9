#pragma once

#include <stdexcept>
#include <string>

namespace compsim {

/// Input files or records that violate a format or invariant.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a valid result
/// (rank deficiency, solver failure, empty intersections...).
class ComputeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments passed to an operation (out-of-range k, size mismatch).
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace compsim

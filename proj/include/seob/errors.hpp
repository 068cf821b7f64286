#pragma once

#include <stdexcept>
#include <string>

namespace seob {

// Bad arguments: dimension mismatches, out-of-range indices, invalid parameters.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure inside a solver (bracketing, non-unique optimum, eigensolver).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace seob

#pragma once

#include <stdexcept>
#include <string>

namespace phex {

// Bad inputs: malformed graphs, mismatched lengths, infeasible clamps.
// Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite intermediates, diverging optimization. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace phex

#pragma once

#include <stdexcept>
#include <string>

namespace sgmmq {

// Caller passed arguments that violate a documented precondition.
class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical operation left its domain of validity (non-SPD input,
// non-finite intermediate, iteration cap exceeded).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Optimizer produced or received a non-finite quantity; training cannot
// continue from this state.
class OptimizerDivergence : public NumericalError {
 public:
  explicit OptimizerDivergence(const std::string& what) : NumericalError(what) {}
};

// Filesystem or file-format failure (unreadable path, malformed JSON,
// schema mismatch).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sgmmq

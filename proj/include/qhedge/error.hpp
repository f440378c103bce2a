#pragma once

#include <stdexcept>
#include <string>

namespace qhedge {

// Malformed or inconsistent input: bad labels, dimension mismatches, parse errors.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Well-formed input that falls outside the domain of an operation
// (an infeasible witness, a failed threshold condition, a refused reduction).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Eigensolver or interior-point breakdown.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qhedge

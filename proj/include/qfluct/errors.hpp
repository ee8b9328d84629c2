#pragma once

#include <stdexcept>
#include <string>

namespace qfluct {

// Bad shapes, non-Hermitian input, invalid indices, malformed config.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A state or reference operator lacks the support an operation needs
// (zero eigenvalue under a negative power, rank-deficient N(gamma), ...).
class SupportViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Internal cross-check failed: a quantity that must be real or normalized
// is not, beyond tolerance.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qfluct

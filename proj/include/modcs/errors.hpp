#pragma once

#include <stdexcept>
#include <string>

namespace modcs {

// Invalid parameters or configuration.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the operation's domain (e.g. level index out of range).
class ArgumentError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// The constraint set {b : ||y - A b|| <= eps} is empty.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exhaustive RIC/ROC enumeration would exceed the configured subset budget.
class BudgetExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A bound constant has a non-positive denominator or its hypotheses fail.
class BoundUndefinedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Least squares requested on more columns than rows.
class RankDeficiencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace modcs

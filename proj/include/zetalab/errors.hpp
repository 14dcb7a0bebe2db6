#pragma once

#include <stdexcept>
#include <string>

namespace zetalab {

/// Input outside the mathematical domain of an operation (n = 0 for mobius,
/// composite modulus, non-positive log argument, ...).
class domain_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Malformed user-supplied data (non-monotone n-list, bad config line).
class validation_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A computation would exceed its configured work budget.
class resource_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of the caller was violated.
class contract_error : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Requested evaluation is outside the accuracy envelope of the method.
class precision_loss_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A prime table does not reach far enough for the requested sum.
class coverage_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Importance-sampling estimate with too few effective samples.
class reliability_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A constructed object failed its numerical verification.
class construction_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace zetalab

#pragma once

#include <stdexcept>
#include <string>

namespace preemptsched {

/// Lookup of an unknown host or instance id.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (bad argument, wrong instance kind).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Cluster state would become inconsistent (duplicate id, negative Full-mode free).
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An invariant that holds by construction was found broken.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed scenario or config document. `field` names the offending path.
class InputError : public std::runtime_error {
 public:
  InputError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace preemptsched

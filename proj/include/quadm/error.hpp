#pragma once

#include <stdexcept>
#include <string>

namespace quadm {

/// Input violates an operation's precondition. Maps to CLI exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A truncation or size budget was exhausted before the requested accuracy
/// was reached. `achieved()` carries the best certified bound obtained.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// The moment problem could not be solved to tolerance with the given
/// candidate set.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Something that should be impossible happened (non-finite energy, broken
/// invariant).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace quadm

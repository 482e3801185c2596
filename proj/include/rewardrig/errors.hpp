#pragma once

#include <stdexcept>
#include <string>

namespace rewardrig {

/// Alphabet, horizon, or shape mismatch between objects that must agree.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Conditioning on a history of probability zero.
class UndefinedPosterior : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An enumeration would exceed its configured cap.
class SizeError : public std::length_error {
 public:
  SizeError(const std::string& what, std::string count)
      : std::length_error(what + " (count " + count + ")"), count_(std::move(count)) {}
  const std::string& count() const { return count_; }

 private:
  std::string count_;
};

/// A construction was called on an input that does not satisfy its
/// precondition, such as a riggable process given to the uninfluenceable builder.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace rewardrig

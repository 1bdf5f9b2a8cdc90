#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace latbound {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Basis is singular or too badly conditioned to invert reliably.
class IllConditionedInput : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An enumeration or sampling budget ran out before the result was complete.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, std::uint64_t partial_count,
                 double achieved = 0.0)
      : Error(what), partial_count_(partial_count), achieved_(achieved) {}

  std::uint64_t partial_count() const noexcept { return partial_count_; }
  /// Best remainder bound (or other accuracy figure) reached before giving up.
  double achieved() const noexcept { return achieved_; }

 private:
  std::uint64_t partial_count_;
  double achieved_;
};

/// Supergaussian transform requested before a table was attached.
class MissingTable : public Error {
 public:
  using Error::Error;
};

class ToleranceUnreached : public Error {
 public:
  ToleranceUnreached(const std::string& what, double achieved_error)
      : Error(what), achieved_error_(achieved_error) {}
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

/// Malformed input document; names the offending field.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string field, int line = 0)
      : Error(what), field_(std::move(field)), line_(line) {}
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

}  // namespace latbound

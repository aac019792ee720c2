#pragma once

#include <stdexcept>
#include <string>

namespace gmusic {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments: dimension mismatch, empty inputs, violated preconditions.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// A numerical routine could not reach its tolerance within budget.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// A linear system or basis was too close to singular.
class IllConditioned : public Error {
public:
  explicit IllConditioned(const std::string &what, double sigma = 0.0)
      : Error(what), singular_value(sigma) {}
  double singular_value;
};

/// Internal invariant broken (e.g. a MUSIC value far below zero).
class InternalError : public Error {
public:
  using Error::Error;
};

inline void require(bool cond, const std::string &msg) {
  if (!cond)
    throw InvalidArgument(msg);
}

} // namespace gmusic

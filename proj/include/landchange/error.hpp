#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace landchange {

/// Failure category; the CLI maps these onto process exit codes.
enum class ErrorKind { io, validation };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

/// Index outside a grid; the message names the offending axis.
class BoundsError : public ValidationError {
public:
  explicit BoundsError(const std::string& what) : ValidationError(what) {}
};

namespace detail {

template <typename... Parts>
std::string concat(Parts&&... parts) {
  std::ostringstream os;
  (os << ... << std::forward<Parts>(parts));
  return os.str();
}

}  // namespace detail
}  // namespace landchange

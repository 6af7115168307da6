#pragma once

#include <stdexcept>
#include <string>

namespace storyline {

/// Failure category. Maps one-to-one onto CLI exit codes.
enum class ErrorKind {
  Usage = 2,      ///< bad flags or configuration
  Data = 3,       ///< malformed or invalid input data
  Invariant = 4,  ///< an internal contract was violated
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(ErrorKind::Invariant, what) {}
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace storyline

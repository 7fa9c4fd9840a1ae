#pragma once

#include <stdexcept>
#include <string>

namespace longscribe {

enum class ErrorKind {
  InvalidArgument,
  FileNotFound,
  UnsupportedEncoding,
  MalformedHeader,
  Io,
  Backend,
  Protocol,
  Config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Thrown by the pipeline driver. The message is prefixed with the stage name,
// and the original error kind is preserved.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorKind kind, const std::string& message);

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::InvalidArgument, message);
}

}  // namespace longscribe

#include "longscribe/error.hpp"

namespace longscribe {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::FileNotFound: return "file not found";
    case ErrorKind::UnsupportedEncoding: return "unsupported encoding";
    case ErrorKind::MalformedHeader: return "malformed header";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::Backend: return "backend error";
    case ErrorKind::Protocol: return "protocol error";
    case ErrorKind::Config: return "configuration error";
  }
  return "unknown error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

StageError::StageError(std::string stage, ErrorKind kind, const std::string& message)
    : Error(kind, stage + ": " + message), stage_(std::move(stage)) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace longscribe

#pragma once

#include <stdexcept>
#include <string>

namespace gicdlc {

/// Failure categories surfaced by the library. The CLI maps each to a
/// stable exit code (see tools/gicdlc.cpp).
enum class ErrorKind {
  invalid_argument,
  io,
  format,           // malformed bytes: bad magic, truncated header, bad dtype
  bad_magic,
  unsupported_version,
  hash_mismatch,    // model content hash does not match stored hash / container
  checksum,         // container CRC failure
  corrupt_stream,   // rANS payload exhausted or inconsistent
  model_mismatch,   // model metadata incompatible with request
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::io: return "i/o error";
    case ErrorKind::format: return "format error";
    case ErrorKind::bad_magic: return "bad magic";
    case ErrorKind::unsupported_version: return "unsupported version";
    case ErrorKind::hash_mismatch: return "hash mismatch";
    case ErrorKind::checksum: return "checksum failure";
    case ErrorKind::corrupt_stream: return "corrupt stream";
    case ErrorKind::model_mismatch: return "model mismatch";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace gicdlc

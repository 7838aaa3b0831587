#pragma once

#include <stdexcept>
#include <string>

namespace dn {

// Error taxonomy used across the library. The CLI maps Config to exit code 2
// and everything else to exit code 1.
enum class ErrorKind {
  Config,        // bad flags, bad config documents, invalid parameter values
  Shape,         // grid dimension mismatch
  InvalidDepth,  // non-positive/non-finite depth where a valid one is required
  Orientation,   // normal not camera-facing / parallel to the viewing ray
  Format,        // malformed file contents
  Io,            // filesystem failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace dn

#pragma once

#include <stdexcept>
#include <string>

namespace fabricbench {

// Bad input: malformed files, violated preconditions, out-of-range arguments.
// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem / OS failures. CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// A peer spoke the wire protocol incorrectly. CLI exit code 2.
class ProtocolError : public std::runtime_error {
 public:
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

// A socket closed or timed out underneath us. CLI exit code 2.
class ConnectionError : public std::runtime_error {
 public:
  explicit ConnectionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fabricbench

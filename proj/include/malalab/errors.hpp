#pragma once

#include <stdexcept>
#include <string>

namespace malalab {

// Raised when an input violates a documented precondition (bad eigenvalues,
// eta out of range, malformed chain, ...). Maps to process exit code 1 when
// it reaches the CLI as a failed run-level assertion.
class precondition_error : public std::invalid_argument {
 public:
  explicit precondition_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Raised when a computation produces or encounters a non-finite value that
// the caller did not ask to tolerate. CLI exit code 3.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised by the config layer: unknown key, missing key, type mismatch,
// unparsable file. CLI exit code 2.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

}

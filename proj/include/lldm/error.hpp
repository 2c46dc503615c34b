#pragma once

#include <stdexcept>
#include <string>

namespace lldm {

enum class ErrorKind {
  Argument,  // invalid parameter or shape mismatch
  Parse,     // malformed input text
  Io,        // file system failure
  Data,      // input data violates a contract (self-loop, single-class labels, ...)
  Numeric,   // numerical failure (non-convergence, exhausted sampler, ...)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) throw Error(kind, msg);
}

}  // namespace lldm

#pragma once

#include <stdexcept>
#include <string>

namespace pdpset {

enum class ErrorCode {
  invalid_dimension,
  invalid_node,
  generation,
  parse,
  structural,
  sync_window,
  construction,
  not_representable,
  oracle_limit,
  unsupported,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// A single broken rule, reported by the validators instead of throwing.
struct Violation {
  std::string code;
  std::string message;
};

}  // namespace pdpset

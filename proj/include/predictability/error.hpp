#pragma once

#include <stdexcept>
#include <string>

namespace predictability {

enum class ErrorKind {
  empty_input,
  domain,
  validation,
  length_mismatch,
  too_short,
  degenerate,
  config,
  io,
};

/// Every failure raised by the library carries a kind so callers (the batch
/// pipeline in particular) can classify it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace predictability

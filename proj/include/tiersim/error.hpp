#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tiersim {

enum class ErrorKind {
  InvalidArgument,
  Validation,
  Fault,
  FastTierFull,
  BudgetExhausted,
  NotFitted,
  Io,
  Parse,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library. The kind is what the CLI reports in
// its machine-readable error object.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tiersim

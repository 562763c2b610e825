#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairaes {

enum class ErrorKind {
  OutOfRange,
  Parse,
  Schema,
  Conflict,
  Stratification,
  EmptyInput,
  Shape,
  Config,
  Integrity,
  Divergence,
  DegenerateAgreement,
  UndefinedReduction,
  UndefinedCorrelation,
  Compatibility,
  Dependency,
  FrozenViolation,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fairaes

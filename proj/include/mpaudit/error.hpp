#pragma once

#include <stdexcept>
#include <string>

namespace mpaudit {

enum class ErrorKind {
  InvalidArgument,
  EmptyDataset,
  InvalidPoint,
  SingularMatrix,
  LabelMismatch,
  Pairing,
  Undersampled,
  IllConditionedPoint,
  InvalidDomain,
  Parse,
  ConfigConstraint,
  MalformedRow,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so the C boundary can map
// it to a status code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mpaudit

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cyclecast {

enum class ErrorKind {
  MissingFile,
  MalformedRow,
  GapInSeries,
  NonFiniteValue,
  HttpError,
  AuthError,
  EmptyResponse,
  MisalignedSeries,
  SeriesMissing,
  CoverageGap,
  TooShort,
  InvalidSplit,
  WindowTooLong,
  UnknownSeries,
  ShapeMismatch,
  NotScalar,
  NonFinite,
  EmptyBatch,
  DivergenceDetected,
  SingularSystem,
  LengthMismatch,
  EmptyEvaluation,
  InsufficientRuns,
  InvalidConfig,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so the CLI can emit a
/// machine-readable record and tests can assert on the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& detail);

}  // namespace cyclecast

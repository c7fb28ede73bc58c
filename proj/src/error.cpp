#include "cyclecast/error.hpp"

namespace cyclecast {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::GapInSeries: return "GapInSeries";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::HttpError: return "HttpError";
    case ErrorKind::AuthError: return "AuthError";
    case ErrorKind::EmptyResponse: return "EmptyResponse";
    case ErrorKind::MisalignedSeries: return "MisalignedSeries";
    case ErrorKind::SeriesMissing: return "SeriesMissing";
    case ErrorKind::CoverageGap: return "CoverageGap";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::InvalidSplit: return "InvalidSplit";
    case ErrorKind::WindowTooLong: return "WindowTooLong";
    case ErrorKind::UnknownSeries: return "UnknownSeries";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NotScalar: return "NotScalar";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::DivergenceDetected: return "DivergenceDetected";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyEvaluation: return "EmptyEvaluation";
    case ErrorKind::InsufficientRuns: return "InsufficientRuns";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind), detail_(detail) {}

void fail(ErrorKind kind, const std::string& detail) { throw Error(kind, detail); }

}  // namespace cyclecast

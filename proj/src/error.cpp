#include "vinecls/error.hpp"

namespace vinecls {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::OrdinalOutOfRange: return "OrdinalOutOfRange";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::LabelsAbsent: return "LabelsAbsent";
    case ErrorCode::DegenerateMargin: return "DegenerateMargin";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::TauUnattainable: return "TauUnattainable";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::NearSingular: return "NearSingular";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::EdgeAbsent: return "EdgeAbsent";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

}  // namespace vinecls

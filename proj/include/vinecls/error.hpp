#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vinecls {

enum class ErrorCode {
  MissingColumn,
  NonNumericCell,
  OrdinalOutOfRange,
  MissingValue,
  EmptyDataset,
  InvalidSchema,
  LabelsAbsent,
  DegenerateMargin,
  InvalidArgument,
  ParameterOutOfRange,
  TauUnattainable,
  NonConvergence,
  TooFewObservations,
  NearSingular,
  DegenerateLabels,
  ClassTooSmall,
  EdgeAbsent,
  SchemaMismatch,
  Io,
};

std::string_view error_code_name(ErrorCode code);

/// Library-wide exception. `what()` is "<CodeName>: <message>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vinecls

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mflqg {

enum class ErrorKind {
  InvalidArgument,
  NonFinite,
  NotSymmetric,
  InvalidN,
  TooLarge,
  ParseError,
  SchemaError,
  RegularityLost,
  BlowUp,
  GridMismatch,
  StationarityFailed,
  NearSingular,
  NotReducedCase,
  CouplingPresent,
  MissingTrajectories,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Every numerical failure carries the pipeline stage that raised it so the
// CLI can report "stage: message" and pick the exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

  // Same error re-tagged with an outer stage, e.g. "solve_cc/solve_K".
  Error with_stage(const std::string& outer) const;

 private:
  ErrorKind kind_;
  std::string stage_;
  std::string detail_;
};

}  // namespace mflqg

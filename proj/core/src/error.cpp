#include "mflqg/error.hpp"

namespace mflqg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::InvalidN: return "InvalidN";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::RegularityLost: return "RegularityLost";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::StationarityFailed: return "StationarityFailed";
    case ErrorKind::NearSingular: return "NearSingular";
    case ErrorKind::NotReducedCase: return "NotReducedCase";
    case ErrorKind::CouplingPresent: return "CouplingPresent";
    case ErrorKind::MissingTrajectories: return "MissingTrajectories";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {
std::string compose(ErrorKind kind, const std::string& stage, const std::string& message) {
  std::string out(to_string(kind));
  if (!stage.empty()) out += " at " + stage;
  out += ": " + message;
  return out;
}
}  // namespace

Error::Error(ErrorKind kind, std::string stage, const std::string& message)
    : std::runtime_error(compose(kind, stage, message)),
      kind_(kind),
      stage_(std::move(stage)),
      detail_(message) {}

Error Error::with_stage(const std::string& outer) const {
  return Error(kind_, stage_.empty() ? outer : outer + "/" + stage_, detail_);
}

}  // namespace mflqg

#include "nlseg/errors.hpp"

namespace nlseg {

const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateNorm: return "DegenerateNorm";
    case ErrorCode::FocalSingularity: return "FocalSingularity";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::GeometryTooThin: return "GeometryTooThin";
    case ErrorCode::SeparationViolation: return "SeparationViolation";
    case ErrorCode::NegativeData: return "NegativeData";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::NegativeCoefficient: return "NegativeCoefficient";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::DegenerateContour: return "DegenerateContour";
    case ErrorCode::ZeroAngle: return "ZeroAngle";
    case ErrorCode::CurvatureNearFocal: return "CurvatureNearFocal";
    case ErrorCode::PatchTooSmall: return "PatchTooSmall";
    case ErrorCode::ProbeOutsideDecayRegion: return "ProbeOutsideDecayRegion";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace nlseg

#pragma once

#include <stdexcept>
#include <string>

namespace nlseg {

enum class ErrorCode {
  Ok = 0,
  InvalidArgument,
  DegenerateNorm,
  FocalSingularity,
  EmptySet,
  ResolutionTooCoarse,
  GeometryTooThin,
  SeparationViolation,
  NegativeData,
  EmptySupport,
  SolverDiverged,
  NegativeCoefficient,
  NotConverged,
  DegenerateContour,
  ZeroAngle,
  CurvatureNearFocal,
  PatchTooSmall,
  ProbeOutsideDecayRegion,
  NoRoot,
  ConfigError,
  IoError,
};

const char* error_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_name(code)) + ": " + msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode c, const std::string& msg) { throw Error(c, msg); }

}  // namespace nlseg

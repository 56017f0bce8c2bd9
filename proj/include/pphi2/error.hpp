#pragma once

#include <stdexcept>
#include <string>

namespace pphi2 {

enum class ErrorCode {
  NonPositiveParameter,
  OddLatticeSize,
  LatticeTooLargeForDenseOracle,
  NegativeOrder,
  NegativeCovariance,
  DegreeTooLarge,
  BoundedBelowViolation,
  LatticeMismatch,
  DegenerateWeights,
  AcceptanceOutOfRange,
  ArgumentOutsidePeriod,
  PointOutsideAnalyticityDomain,
  QuadratureTailTooLarge,
  TubeViolation,
  TailTooLarge,
  LambdaMismatch,
  StencilOutsideDomain,
  SupportViolation,
  AsymmetricLatticeForExactVariant,
  GapTooSmall,
  ExponentInfeasible,
  DimensionTooLarge,
  NoConstantsFound,
  DegenerateGround,
  TruncationTooSevere,
  ParseError,
  ValidationError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

}  // namespace pphi2

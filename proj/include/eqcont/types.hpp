#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace eqc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class ErrorKind {
  Sizing,
  DimensionMismatch,
  AmbiguousKernel,
  DegenerateOrbit,
  IllPosedComplement,
  NoConvergence,
  SingularBorderedMatrix,
  StepUnderflow,
  InitialPointNotCritical,
  OutOfActionDomain,
  UnsupportedDimension,
  ResidualVanishesOnContour,
  ChartExit,
  UnknownFamily,
  SelfIntersection,
  NoPrimitive,
  RegraphFailure,
  ConfigInvalid,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace eqc

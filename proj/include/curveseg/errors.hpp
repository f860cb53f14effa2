#pragma once

#include <stdexcept>
#include <string>

namespace curveseg {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define CURVESEG_DEFINE_ERROR(NAME)                           \
  struct NAME : Error {                                       \
    explicit NAME(const std::string& msg) : Error(msg) {}     \
  }

// Geometry / mesh
CURVESEG_DEFINE_ERROR(ZeroLengthEdge);
CURVESEG_DEFINE_ERROR(TooFewNodes);
CURVESEG_DEFINE_ERROR(InvariantViolation);

// Linear solves
CURVESEG_DEFINE_ERROR(SolveFailure);
CURVESEG_DEFINE_ERROR(SingularSystem);

// Image / color models
CURVESEG_DEFINE_ERROR(MissingRegion);
CURVESEG_DEFINE_ERROR(DegenerateMean);

// Region bookkeeping
CURVESEG_DEFINE_ERROR(InconsistentOrientation);

// Topology surgery
CURVESEG_DEFINE_ERROR(DegenerateSplit);
CURVESEG_DEFINE_ERROR(OrientationMismatch);
CURVESEG_DEFINE_ERROR(AmbiguousRegions);
CURVESEG_DEFINE_ERROR(AmbiguousContinuation);

// Driver / configuration
CURVESEG_DEFINE_ERROR(ZeroLength);
CURVESEG_DEFINE_ERROR(ConfigError);
CURVESEG_DEFINE_ERROR(IoError);

#undef CURVESEG_DEFINE_ERROR

}  // namespace curveseg

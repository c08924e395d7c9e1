#pragma once

namespace torsionflow {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes of `run`: 0 Converged, 2 MaxSteps, 3 ConvexityLoss or
/// PositivityLoss, 4 SolverFailure; 1 for configuration and usage errors.
int dispatch(int argc, char** argv);

}  // namespace torsionflow

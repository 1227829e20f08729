#pragma once

#include "actpgo/graph.hpp"
#include "actpgo/solvers.hpp"

#include <string>
#include <vector>

namespace actpgo::detail {

struct LmRun {
  Values values;
  std::vector<double> trace;  // loss at the start, then after every accepted step
  int iterations = 0;
  Termination termination = Termination::Converged;
  std::string message;
};

/// Requires graph.prior() to be set.
LmRun runLevenbergMarquardt(const PoseGraph& graph, const LmConfig& config);

/// Copy of the graph with the gauge prior added if missing.
PoseGraph gaugeFixed(const PoseGraph& graph);

/// Chi-square inlier flags of every landmark factor at `values`, tested
/// against the covariances stored in `graph`.
std::vector<bool> chi2Flags(const PoseGraph& graph, const Values& values, double confidence);

}  // namespace actpgo::detail

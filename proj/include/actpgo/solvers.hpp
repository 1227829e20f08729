#pragma once

#include "actpgo/graph.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace actpgo {

enum class Termination { Converged, MaxIters, Failed };

std::string_view toString(Termination t);

/// Outcome of any solver in this library.
///
/// For the alternating solvers (ACT, cDCE) and IRLS, `loss_trace` holds one
/// entry per outer iteration and `iterates` the estimate after each of them;
/// `initial_loss` is the loss before the first iteration. For plain LM the
/// trace holds the loss after every accepted step.
struct SolveReport {
  std::string method;
  Values estimates;
  double initial_loss = 0.0;
  std::vector<double> loss_trace;
  std::vector<Values> iterates;
  std::vector<bool> inlier_flags;                // indexed by landmark factor id
  std::vector<DiagonalNoise> final_covariances;  // indexed by landmark factor id
  Termination termination = Termination::Converged;
  int iterations = 0;
  std::string message;
};

struct LmConfig {
  double initial_damping = 1e-4;
  double damping_up = 10.0;
  double damping_down = 10.0;
  double max_damping = 1e10;
  int max_iterations = 100;
  double relative_tolerance = 1e-10;
  double step_tolerance = 1e-12;

  /// Throws std::invalid_argument if a field is out of range.
  void validate() const;
};

/// Gaussian pose graph optimization by Levenberg-Marquardt. The graph's
/// values are the initial estimate; a gauge prior on x_0 is added when the
/// graph has none. Inlier flags are filled post hoc with the chi-square test
/// against the graph's covariances.
SolveReport solveLm(const PoseGraph& graph, const LmConfig& config = {});

enum class KernelKind { None, Huber, Cauchy, GemanMcClure, L1 };

std::string_view toString(KernelKind k);

/// Robust kernel on the whitened residual norm r = ||e||_Sigma.
struct RobustKernel {
  KernelKind kind = KernelKind::None;
  double parameter = 0.0;

  /// Standard widths: Huber 1.345, Cauchy 2.3849, Geman-McClure 1.0; for L1
  /// the parameter is the residual floor 1e-6.
  static RobustKernel Default(KernelKind kind);
};

/// IRLS weight w(r) = rho'(r) / r. Normalized to w(0) = 1 for every kernel
/// except L1, whose weight is 1 / max(r, floor).
double kernelWeight(const RobustKernel& kernel, double r);
/// Robust cost rho(r), scaled so that rho(r) ~ r^2 / 2 near zero for the
/// redescending kernels and rho(r) = r for L1.
double kernelRho(const RobustKernel& kernel, double r);

struct IrlsConfig {
  int max_outer_iterations = 30;
  double relative_tolerance = 1e-6;
};

/// Iteratively re-weighted least squares over the landmark factors: each
/// outer iteration runs LM with every landmark covariance scaled uniformly by
/// 1 / w(||e_k||_Sigma_k), weights starting at one.
SolveReport solveIrls(const PoseGraph& graph, const RobustKernel& kernel,
                      const LmConfig& lm_config = {}, const IrlsConfig& irls_config = {});

struct ActConfig;

/// Componentwise covariance re-weighting with sigma^2_kj = max(sigma^2_0,kj, e_kj^2),
/// run inside the same alternating loop (and chi-square gate) as ACT.
SolveReport solveCdce(const PoseGraph& graph, const ActConfig& config, const LmConfig& lm_config = {});

}  // namespace actpgo

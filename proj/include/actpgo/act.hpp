#pragma once

#include "actpgo/graph.hpp"
#include "actpgo/solvers.hpp"

namespace actpgo {

enum class CovarianceRule {
  Diagonal,   // sigma^2_j = lambda' |e_j|
  Isotropic,  // sigma^2 = lambda' ||e||_2 / sqrt(6) on every component
  Cdce,       // sigma^2_j = max(sigma^2_0,j, e_j^2)
};

struct ActConfig {
  double lambda_prime = 10.0;
  int max_outer_iterations = 10;
  /// Stop once |L_prev - L| <= tol * L_prev. Zero runs all iterations.
  double relative_tolerance = 1e-4;
  double chi2_confidence = 0.95;
  double outlier_variance = 1e10;
  bool chi2_gating = true;
  CovarianceRule rule = CovarianceRule::Diagonal;

  void validate() const;
};

/// Inverse CDF of the chi-square distribution with `dof` degrees of freedom.
double chi2Critical(int dof, double confidence);

/// True iff ||e||^2 under the factor's initial covariance is below `critical`.
bool chi2Test(const Tangent& e, const DiagonalNoise& initial_noise, double critical);

/// Closed-form minimizer of sum_j e_j^2 / s_j + lambda sum_j s_j, floored.
DiagonalNoise covarianceUpdate(const Tangent& e, double lambda_prime);

/// Isotropic variant: every component gets lambda' ||e||_2 / sqrt(6).
DiagonalNoise isotropicCovarianceUpdate(const Tangent& e, double lambda_prime);

/// cDCE rule: sigma^2_j = max(sigma^2_0,j, e_j^2).
DiagonalNoise cdceCovarianceUpdate(const Tangent& e, const DiagonalNoise& initial);

/// Automatic covariance tuning by alternating minimization.
///
/// Each outer iteration runs LM with the current landmark covariances (the
/// odometry covariances never change), then re-tests every landmark factor
/// against its initial covariance. Passing factors get the closed-form
/// update; failing ones get `outlier_variance` and their joint-loss term is
/// frozen at its value just before the blow-up. A factor that passes again
/// later is unfrozen. `loss_trace` is the joint loss after each iteration.
SolveReport solveAct(const PoseGraph& graph, const ActConfig& config = {},
                     const LmConfig& lm_config = {});

}  // namespace actpgo

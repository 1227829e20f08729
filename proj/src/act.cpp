#include "actpgo/act.hpp"

#include "lm.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <map>
#include <stdexcept>

namespace actpgo {

void ActConfig::validate() const {
  if (!(lambda_prime > 0.0)) throw std::invalid_argument("ActConfig: lambda_prime must be > 0");
  if (max_outer_iterations < 1) throw std::invalid_argument("ActConfig: max_outer_iterations must be >= 1");
  if (!(chi2_confidence > 0.0 && chi2_confidence < 1.0)) {
    throw std::invalid_argument("ActConfig: chi2_confidence must be in (0, 1)");
  }
  if (!(relative_tolerance >= 0.0)) throw std::invalid_argument("ActConfig: relative_tolerance must be >= 0");
  if (!(outlier_variance > 0.0)) throw std::invalid_argument("ActConfig: outlier_variance must be > 0");
}

double chi2Critical(int dof, double confidence) {
  if (dof < 1) throw std::invalid_argument("chi2Critical: dof must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("chi2Critical: confidence must be in (0, 1)");
  }
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), confidence);
}

bool chi2Test(const Tangent& e, const DiagonalNoise& initial_noise, double critical) {
  return mahalanobisSq(e, initial_noise) < critical;
}

DiagonalNoise covarianceUpdate(const Tangent& e, double lambda_prime) {
  return DiagonalNoise::Floored(lambda_prime * e.cwiseAbs());
}

DiagonalNoise isotropicCovarianceUpdate(const Tangent& e, double lambda_prime) {
  return DiagonalNoise::Floored(Vector6::Constant(lambda_prime * e.norm() / std::sqrt(6.0)));
}

DiagonalNoise cdceCovarianceUpdate(const Tangent& e, const DiagonalNoise& initial) {
  return DiagonalNoise(initial.variances().cwiseMax(e.cwiseAbs2()));
}

namespace {

DiagonalNoise applyRule(const ActConfig& config, const Tangent& e, const DiagonalNoise& initial) {
  switch (config.rule) {
    case CovarianceRule::Diagonal: return covarianceUpdate(e, config.lambda_prime);
    case CovarianceRule::Isotropic: return isotropicCovarianceUpdate(e, config.lambda_prime);
    case CovarianceRule::Cdce: return cdceCovarianceUpdate(e, initial);
  }
  return initial;
}

std::string methodName(const ActConfig& config) {
  switch (config.rule) {
    case CovarianceRule::Diagonal: return "act";
    case CovarianceRule::Isotropic: return "act_isotropic";
    case CovarianceRule::Cdce: return "cdce";
  }
  return "act";
}

SolveReport alternate(const PoseGraph& graph, const ActConfig& config, const LmConfig& lm_config) {
  config.validate();
  lm_config.validate();
  PoseGraph g = detail::gaugeFixed(graph);
  const RegularizationWeight weight(config.lambda_prime);
  const double lambda = weight.lambda();
  const double critical = chi2Critical(6, config.chi2_confidence);

  std::vector<DiagonalNoise> initial;
  for (const auto& f : g.landmarkFactors()) initial.push_back(f.noise);
  std::map<FactorId, double> frozen;

  SolveReport report;
  report.method = methodName(config);
  report.initial_loss = jointLoss(g, weight);
  report.inlier_flags.assign(initial.size(), true);
  report.termination = Termination::MaxIters;
  double previous = report.initial_loss;

  for (int i = 1; i <= config.max_outer_iterations; ++i) {
    detail::LmRun run = detail::runLevenbergMarquardt(g, lm_config);
    report.iterations = i;
    if (run.termination == Termination::Failed) {
      report.termination = Termination::Failed;
      report.message = "inner LM failed at outer iteration " + std::to_string(i) + ": " + run.message;
      break;
    }
    g.setValues(run.values);

    for (auto& f : g.mutableLandmarkFactors()) {
      const Tangent e = residualLandmark(f, run.values);
      const bool inlier = !config.chi2_gating || chi2Test(e, initial[f.id], critical);
      report.inlier_flags[f.id] = inlier;
      if (inlier) {
        frozen.erase(f.id);
        f.noise = applyRule(config, e, initial[f.id]);
      } else {
        if (!frozen.contains(f.id)) frozen[f.id] = landmarkJointContribution(e, f.noise, lambda);
        f.noise = DiagonalNoise::Isotropic(config.outlier_variance);
      }
    }

    const double loss = jointLoss(g, weight, frozen);
    report.loss_trace.push_back(loss);
    report.iterates.push_back(run.values);
    if (std::abs(previous - loss) <= config.relative_tolerance * previous) {
      report.termination = Termination::Converged;
      break;
    }
    previous = loss;
  }

  report.estimates = g.values();
  for (const auto& f : g.landmarkFactors()) report.final_covariances.push_back(f.noise);
  return report;
}

}  // namespace

SolveReport solveAct(const PoseGraph& graph, const ActConfig& config, const LmConfig& lm_config) {
  return alternate(graph, config, lm_config);
}

SolveReport solveCdce(const PoseGraph& graph, const ActConfig& config, const LmConfig& lm_config) {
  ActConfig cdce = config;
  cdce.rule = CovarianceRule::Cdce;
  return alternate(graph, cdce, lm_config);
}

}  // namespace actpgo

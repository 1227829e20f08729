#include "actpgo/solvers.hpp"

#include "actpgo/act.hpp"
#include "lm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace actpgo {

std::string_view toString(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIters: return "max_iters";
    case Termination::Failed: return "failed";
  }
  return "unknown";
}

std::string_view toString(KernelKind k) {
  switch (k) {
    case KernelKind::None: return "none";
    case KernelKind::Huber: return "huber";
    case KernelKind::Cauchy: return "cauchy";
    case KernelKind::GemanMcClure: return "gm";
    case KernelKind::L1: return "l1";
  }
  return "unknown";
}

void LmConfig::validate() const {
  if (!(initial_damping > 0.0) || !(damping_up > 1.0) || !(damping_down > 1.0) ||
      !(max_damping > initial_damping)) {
    throw std::invalid_argument("LmConfig: damping parameters must be positive (factors > 1)");
  }
  if (max_iterations < 1) throw std::invalid_argument("LmConfig: max_iterations must be >= 1");
  if (!(relative_tolerance >= 0.0 && relative_tolerance < 1.0)) {
    throw std::invalid_argument("LmConfig: relative_tolerance must be in [0, 1)");
  }
}

namespace detail {
namespace {

constexpr double kMinDamping = 1e-15;
// Systems up to this many scalar unknowns are factorized densely.
constexpr int kDenseLimit = 600;

bool solveDamped(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& g, double mu,
                 Eigen::VectorXd& delta) {
  const int n = static_cast<int>(g.size());
  if (n <= kDenseLimit) {
    Eigen::MatrixXd A = Eigen::MatrixXd(H);
    A.diagonal().array() += mu;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    delta = ldlt.solve(-g);
  } else {
    Eigen::SparseMatrix<double> A = H;
    for (int i = 0; i < n; ++i) A.coeffRef(i, i) += mu;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success) return false;
    delta = ldlt.solve(-g);
  }
  return delta.allFinite();
}

}  // namespace

PoseGraph gaugeFixed(const PoseGraph& graph) {
  PoseGraph g = graph;
  if (!g.prior()) g.anchorFirstCamera();
  return g;
}

LmRun runLevenbergMarquardt(const PoseGraph& graph, const LmConfig& config) {
  LmRun run;
  run.values = graph.values();
  LinearSystem sys = linearize(graph, run.values);
  double loss = sys.squaredNorm();
  run.trace.push_back(loss);
  if (!std::isfinite(loss)) {
    run.termination = Termination::Failed;
    run.message = "non-finite initial loss";
    return run;
  }
  double mu = config.initial_damping;
  Eigen::SparseMatrix<double> H;
  Eigen::VectorXd g;
  Eigen::VectorXd delta;
  for (run.iterations = 1; run.iterations <= config.max_iterations; ++run.iterations) {
    if (loss == 0.0) return run;
    sys.normalEquations(H, g);
    while (true) {
      if (!solveDamped(H, g, mu, delta)) {
        mu *= config.damping_up;
        if (mu > config.max_damping) {
          run.termination = Termination::Failed;
          run.message = "normal equations singular at damping " + std::to_string(mu);
          return run;
        }
        continue;
      }
      if (delta.norm() < config.step_tolerance) return run;
      Values candidate = retract(run.values, sys.ordering, delta);
      const double candidate_loss = graphLoss(graph, candidate);
      if (std::isfinite(candidate_loss) && candidate_loss < loss) {
        const double decrease = (loss - candidate_loss) / loss;
        run.values = std::move(candidate);
        loss = candidate_loss;
        run.trace.push_back(loss);
        mu = std::max(mu / config.damping_down, kMinDamping);
        if (decrease < config.relative_tolerance) return run;
        break;
      }
      mu *= config.damping_up;
      // No descent left at any damping: the current point is a local minimum
      // to working precision.
      if (mu > config.max_damping) return run;
    }
    sys = linearize(graph, run.values);
  }
  run.iterations = config.max_iterations;
  run.termination = Termination::MaxIters;
  return run;
}

std::vector<bool> chi2Flags(const PoseGraph& graph, const Values& values, double confidence) {
  const double critical = chi2Critical(6, confidence);
  std::vector<bool> flags;
  flags.reserve(graph.landmarkFactors().size());
  for (const auto& f : graph.landmarkFactors()) {
    flags.push_back(chi2Test(residualLandmark(f, values), f.noise, critical));
  }
  return flags;
}

}  // namespace detail

SolveReport solveLm(const PoseGraph& graph, const LmConfig& config) {
  config.validate();
  const PoseGraph g = detail::gaugeFixed(graph);
  detail::LmRun run = detail::runLevenbergMarquardt(g, config);
  SolveReport report;
  report.method = "lm";
  report.initial_loss = run.trace.front();
  report.loss_trace = std::move(run.trace);
  report.estimates = std::move(run.values);
  report.iterates = {report.estimates};
  report.iterations = run.iterations;
  report.termination = run.termination;
  report.message = std::move(run.message);
  report.inlier_flags = detail::chi2Flags(g, report.estimates, 0.95);
  for (const auto& f : g.landmarkFactors()) report.final_covariances.push_back(f.noise);
  return report;
}

RobustKernel RobustKernel::Default(KernelKind kind) {
  switch (kind) {
    case KernelKind::None: return {kind, 0.0};
    case KernelKind::Huber: return {kind, 1.345};
    case KernelKind::Cauchy: return {kind, 2.3849};
    case KernelKind::GemanMcClure: return {kind, 1.0};
    case KernelKind::L1: return {kind, 1e-6};
  }
  return {};
}

double kernelWeight(const RobustKernel& kernel, double r) {
  const double c = kernel.parameter;
  switch (kernel.kind) {
    case KernelKind::None: return 1.0;
    case KernelKind::Huber: return r <= c ? 1.0 : c / r;
    case KernelKind::Cauchy: return 1.0 / (1.0 + (r * r) / (c * c));
    case KernelKind::GemanMcClure: {
      const double d = c * c + r * r;
      return (c * c * c * c) / (d * d);
    }
    case KernelKind::L1: return 1.0 / std::max(r, c);
  }
  return 1.0;
}

double kernelRho(const RobustKernel& kernel, double r) {
  const double c = kernel.parameter;
  switch (kernel.kind) {
    case KernelKind::None: return 0.5 * r * r;
    case KernelKind::Huber: return r <= c ? 0.5 * r * r : c * (r - 0.5 * c);
    case KernelKind::Cauchy: return 0.5 * c * c * std::log1p((r * r) / (c * c));
    case KernelKind::GemanMcClure: return 0.5 * c * c * (r * r) / (c * c + r * r);
    case KernelKind::L1: return r;
  }
  return 0.0;
}

namespace {

double robustLoss(const PoseGraph& graph, const RobustKernel& kernel, const Values& values) {
  double loss = 0.0;
  for (const auto& f : graph.odometry()) loss += mahalanobisSq(residualOdometry(f, values), f.noise);
  if (graph.prior()) loss += mahalanobisSq(residualPrior(*graph.prior(), values), graph.prior()->noise);
  for (const auto& f : graph.landmarkFactors()) {
    const double r = std::sqrt(mahalanobisSq(residualLandmark(f, values), f.noise));
    loss += 2.0 * kernelRho(kernel, r);
  }
  return loss;
}

}  // namespace

SolveReport solveIrls(const PoseGraph& graph, const RobustKernel& kernel, const LmConfig& lm_config,
                      const IrlsConfig& irls_config) {
  lm_config.validate();
  if (irls_config.max_outer_iterations < 1) {
    throw std::invalid_argument("IrlsConfig: max_outer_iterations must be >= 1");
  }
  if (kernel.kind != KernelKind::None && !(kernel.parameter > 0.0)) {
    throw std::invalid_argument("solveIrls: kernel parameter must be positive");
  }
  const PoseGraph base = detail::gaugeFixed(graph);
  PoseGraph weighted = base;
  std::vector<double> weights(base.landmarkFactors().size(), 1.0);

  SolveReport report;
  report.method = std::string(toString(kernel.kind));
  report.initial_loss = robustLoss(base, kernel, base.values());
  report.termination = Termination::MaxIters;
  double previous = report.initial_loss;
  for (int i = 1; i <= irls_config.max_outer_iterations; ++i) {
    auto& factors = weighted.mutableLandmarkFactors();
    for (std::size_t k = 0; k < factors.size(); ++k) {
      factors[k].noise = base.landmarkFactors()[k].noise.scaled(1.0 / weights[k]);
    }
    detail::LmRun run = detail::runLevenbergMarquardt(weighted, lm_config);
    report.iterations = i;
    if (run.termination == Termination::Failed) {
      report.termination = Termination::Failed;
      report.message = "inner LM failed at outer iteration " + std::to_string(i) + ": " + run.message;
      break;
    }
    weighted.setValues(run.values);
    const double loss = robustLoss(base, kernel, run.values);
    report.loss_trace.push_back(loss);
    report.iterates.push_back(run.values);
    for (const auto& f : base.landmarkFactors()) {
      const double r = std::sqrt(mahalanobisSq(residualLandmark(f, run.values), f.noise));
      weights[f.id] = kernelWeight(kernel, r);
    }
    if (i > 1 && std::abs(previous - loss) <= irls_config.relative_tolerance * previous) {
      report.termination = Termination::Converged;
      break;
    }
    previous = loss;
  }
  report.estimates = weighted.values();
  report.inlier_flags = detail::chi2Flags(base, report.estimates, 0.95);
  for (const auto& f : weighted.landmarkFactors()) report.final_covariances.push_back(f.noise);
  return report;
}

}  // namespace actpgo

#include "actpgo/graph.hpp"

#include <cmath>
#include <set>

namespace actpgo {

std::string toString(const VariableKey& key) {
  return (key.kind == VariableKind::Camera ? "x" : "l") + std::to_string(key.index);
}

void PoseGraph::addCamera(std::uint32_t t, const Pose& initial) {
  if (t != num_cameras_) {
    throw GraphError("addCamera: expected camera index " + std::to_string(num_cameras_) +
                     ", got " + std::to_string(t));
  }
  values_[VariableKey::Camera(t)] = initial;
  ++num_cameras_;
}

void PoseGraph::addLandmark(std::uint32_t j, const Pose& initial) {
  const auto key = VariableKey::Landmark(j);
  if (values_.contains(key)) throw GraphError("addLandmark: duplicate " + toString(key));
  values_[key] = initial;
}

void PoseGraph::addOdometry(std::uint32_t from_t, const Pose& measurement,
                            const DiagonalNoise& noise) {
  const auto from = VariableKey::Camera(from_t);
  const auto to = VariableKey::Camera(from_t + 1);
  if (!values_.contains(from) || !values_.contains(to)) {
    throw GraphError("addOdometry: unknown camera " + toString(from) + " or " + toString(to));
  }
  odometry_.push_back({from, to, measurement, noise});
}

FactorId PoseGraph::addLandmarkFactor(std::uint32_t t, std::uint32_t j, const Pose& measurement,
                                      const DiagonalNoise& noise) {
  const auto cam = VariableKey::Camera(t);
  const auto lm = VariableKey::Landmark(j);
  if (!values_.contains(cam) || !values_.contains(lm)) {
    throw GraphError("addLandmarkFactor: unknown " + toString(cam) + " or " + toString(lm));
  }
  const FactorId id = landmark_factors_.size();
  landmark_factors_.push_back({cam, lm, measurement, noise, id});
  return id;
}

void PoseGraph::setPrior(const PriorFactor& prior) {
  if (!values_.contains(prior.key)) throw GraphError("setPrior: unknown " + toString(prior.key));
  prior_ = prior;
}

void PoseGraph::anchorFirstCamera(double variance) {
  const auto key = VariableKey::Camera(0);
  if (!values_.contains(key)) throw GraphError("anchorFirstCamera: graph has no cameras");
  prior_ = PriorFactor{key, values_.at(key), DiagonalNoise::Isotropic(variance)};
}

void PoseGraph::setValues(const Values& values) {
  for (const auto& [key, pose] : values) {
    auto it = values_.find(key);
    if (it == values_.end()) throw GraphError("setValues: unknown " + toString(key));
    it->second = pose;
  }
}

const Pose& PoseGraph::value(const VariableKey& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw GraphError("missing variable " + toString(key));
  return it->second;
}

void PoseGraph::validate() const {
  std::set<VariableKey> observed;
  for (const auto& f : odometry_) {
    if (f.from.index + 1 != f.to.index) throw GraphError("odometry must link consecutive cameras");
  }
  for (const auto& f : landmark_factors_) {
    if (!values_.contains(f.camera) || !values_.contains(f.landmark)) {
      throw GraphError("landmark factor " + std::to_string(f.id) + " references a missing variable");
    }
    observed.insert(f.landmark);
  }
  for (const auto& [key, pose] : values_) {
    if (key.kind == VariableKind::Landmark && !observed.contains(key)) {
      throw GraphError("landmark " + toString(key) + " has no measurements");
    }
  }
}

PoseGraph PoseGraph::withoutLandmarkFactors(const std::vector<bool>& drop) const {
  PoseGraph out;
  out.values_ = values_;
  out.num_cameras_ = num_cameras_;
  out.odometry_ = odometry_;
  out.prior_ = prior_;
  for (const auto& f : landmark_factors_) {
    if (f.id < drop.size() && drop[f.id]) continue;
    LandmarkFactor copy = f;
    copy.id = out.landmark_factors_.size();
    out.landmark_factors_.push_back(copy);
  }
  return out;
}

Tangent residualOdometry(const OdometryFactor& f, const Values& values) {
  const Pose& a = values.at(f.from);
  const Pose& b = values.at(f.to);
  return logPrincipal(f.measurement.inverse() * between(a, b));
}

Tangent residualLandmark(const LandmarkFactor& f, const Values& values) {
  const Pose& x = values.at(f.camera);
  const Pose& l = values.at(f.landmark);
  return logPrincipal(f.measurement.inverse() * between(x, l));
}

Tangent residualPrior(const PriorFactor& f, const Values& values) {
  return logPrincipal(between(f.measurement, values.at(f.key)));
}

double graphLoss(const PoseGraph& graph) { return graphLoss(graph, graph.values()); }

double graphLoss(const PoseGraph& graph, const Values& values) {
  double loss = 0.0;
  for (const auto& f : graph.odometry()) loss += mahalanobisSq(residualOdometry(f, values), f.noise);
  for (const auto& f : graph.landmarkFactors()) {
    loss += mahalanobisSq(residualLandmark(f, values), f.noise);
  }
  if (graph.prior()) loss += mahalanobisSq(residualPrior(*graph.prior(), values), graph.prior()->noise);
  return loss;
}

double landmarkJointContribution(const Tangent& e, const DiagonalNoise& noise, double lambda) {
  return mahalanobisSq(e, noise) + lambda * noise.variances().sum();
}

RegularizationWeight::RegularizationWeight(double lambda_prime) : lambda_prime_(lambda_prime) {
  if (!(lambda_prime > 0.0) || !std::isfinite(lambda_prime)) {
    throw std::invalid_argument("RegularizationWeight: lambda' must be positive");
  }
}

double jointLoss(const PoseGraph& graph, const RegularizationWeight& weight,
                 const std::map<FactorId, double>& frozen) {
  const Values& values = graph.values();
  const double lambda = weight.lambda();
  double loss = 0.0;
  for (const auto& f : graph.odometry()) loss += mahalanobisSq(residualOdometry(f, values), f.noise);
  if (graph.prior()) loss += mahalanobisSq(residualPrior(*graph.prior(), values), graph.prior()->noise);
  for (const auto& f : graph.landmarkFactors()) {
    if (auto it = frozen.find(f.id); it != frozen.end()) {
      loss += it->second;
    } else {
      loss += landmarkJointContribution(residualLandmark(f, values), f.noise, lambda);
    }
  }
  return loss;
}

namespace {

// e = log(m^-1 a^-1 b): de/d(delta_b) = Jr^-1(e), de/d(delta_a) = -Jr^-1(e) Ad(b^-1 a).
LinearizedFactor linearizeBetween(const VariableKey& ka, const VariableKey& kb, const Pose& m,
                                  const DiagonalNoise& noise, const Values& values) {
  const Pose& a = values.at(ka);
  const Pose& b = values.at(kb);
  const Pose ab = between(a, b);
  const Tangent e = logPrincipal(m.inverse() * ab);
  const Matrix6 jr_inv = rightJacobianInverse(e);
  const Vector6 w = noise.sqrtInformation();
  LinearizedFactor out;
  out.keys = {ka, kb};
  out.jacobians = {w.asDiagonal() * (-jr_inv * ab.inverse().adjoint()), w.asDiagonal() * jr_inv};
  out.residual = w.cwiseProduct(e);
  return out;
}

}  // namespace

LinearizedFactor linearizeOdometry(const OdometryFactor& f, const Values& values) {
  return linearizeBetween(f.from, f.to, f.measurement, f.noise, values);
}

LinearizedFactor linearizeLandmark(const LandmarkFactor& f, const Values& values) {
  return linearizeBetween(f.camera, f.landmark, f.measurement, f.noise, values);
}

LinearizedFactor linearizePrior(const PriorFactor& f, const Values& values) {
  const Tangent e = residualPrior(f, values);
  const Vector6 w = f.noise.sqrtInformation();
  LinearizedFactor out;
  out.keys = {f.key};
  out.jacobians = {w.asDiagonal() * rightJacobianInverse(e)};
  out.residual = w.cwiseProduct(e);
  return out;
}

LinearSystem linearize(const PoseGraph& graph) { return linearize(graph, graph.values()); }

LinearSystem linearize(const PoseGraph& graph, const Values& values) {
  LinearSystem sys;
  int block = 0;
  for (const auto& [key, pose] : values) sys.ordering[key] = block++;
  sys.factors.reserve(graph.odometry().size() + graph.landmarkFactors().size() + 1);
  for (const auto& f : graph.odometry()) sys.factors.push_back(linearizeOdometry(f, values));
  for (const auto& f : graph.landmarkFactors()) sys.factors.push_back(linearizeLandmark(f, values));
  if (graph.prior()) sys.factors.push_back(linearizePrior(*graph.prior(), values));
  return sys;
}

void LinearSystem::normalEquations(Eigen::SparseMatrix<double>& hessian,
                                   Eigen::VectorXd& gradient) const {
  const int n = dimension();
  std::vector<Eigen::Triplet<double>> triplets;
  gradient = Eigen::VectorXd::Zero(n);
  for (const auto& f : factors) {
    for (std::size_t a = 0; a < f.keys.size(); ++a) {
      const int ra = 6 * ordering.at(f.keys[a]);
      gradient.segment<6>(ra) += f.jacobians[a].transpose() * f.residual;
      for (std::size_t b = 0; b < f.keys.size(); ++b) {
        const int rb = 6 * ordering.at(f.keys[b]);
        const Matrix6 block = f.jacobians[a].transpose() * f.jacobians[b];
        for (int i = 0; i < 6; ++i) {
          for (int j = 0; j < 6; ++j) triplets.emplace_back(ra + i, rb + j, block(i, j));
        }
      }
    }
  }
  hessian.resize(n, n);
  hessian.setFromTriplets(triplets.begin(), triplets.end());
}

double LinearSystem::squaredNorm() const {
  double s = 0.0;
  for (const auto& f : factors) s += f.residual.squaredNorm();
  return s;
}

Values retract(const Values& values, const std::map<VariableKey, int>& ordering,
               const Eigen::VectorXd& delta) {
  Values out = values;
  for (auto& [key, pose] : out) {
    auto it = ordering.find(key);
    if (it == ordering.end()) continue;
    pose = pose * exp(delta.segment<6>(6 * it->second));
  }
  return out;
}

}  // namespace actpgo

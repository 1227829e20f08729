#pragma once

#include "actpgo/liegroup.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace actpgo {

enum class VariableKind : std::uint8_t { Camera = 0, Landmark = 1 };

struct VariableKey {
  VariableKind kind = VariableKind::Camera;
  std::uint32_t index = 0;

  static VariableKey Camera(std::uint32_t t) { return {VariableKind::Camera, t}; }
  static VariableKey Landmark(std::uint32_t j) { return {VariableKind::Landmark, j}; }

  auto operator<=>(const VariableKey&) const = default;
};

std::string toString(const VariableKey& key);

using Values = std::map<VariableKey, Pose>;
using FactorId = std::size_t;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OdometryFactor {
  VariableKey from;
  VariableKey to;
  Pose measurement;
  DiagonalNoise noise;
};

struct LandmarkFactor {
  VariableKey camera;
  VariableKey landmark;
  Pose measurement;  // object pose expressed in the camera frame
  DiagonalNoise noise;
  FactorId id = 0;
};

struct PriorFactor {
  VariableKey key;
  Pose measurement;
  DiagonalNoise noise;
};

/// Tight prior used to fix the gauge at x_0.
inline constexpr double kGaugePriorVariance = 1e-6;

/// Camera poses x_t, object landmark poses l_j, odometry factors between
/// consecutive cameras and object pose measurements from cameras to landmarks.
class PoseGraph {
 public:
  /// Cameras must be added in index order 0, 1, 2, ...
  void addCamera(std::uint32_t t, const Pose& initial);
  void addLandmark(std::uint32_t j, const Pose& initial);
  void addOdometry(std::uint32_t from_t, const Pose& measurement, const DiagonalNoise& noise);
  /// Returns the factor id, equal to the insertion index.
  FactorId addLandmarkFactor(std::uint32_t t, std::uint32_t j, const Pose& measurement,
                             const DiagonalNoise& noise);
  void setPrior(const PriorFactor& prior);
  /// Puts the gauge prior on x_0 at its current value.
  void anchorFirstCamera(double variance = kGaugePriorVariance);
  void clearPrior() { prior_.reset(); }

  const Values& values() const { return values_; }
  Values& mutableValues() { return values_; }
  void setValues(const Values& values);
  const Pose& value(const VariableKey& key) const;

  const std::vector<OdometryFactor>& odometry() const { return odometry_; }
  const std::vector<LandmarkFactor>& landmarkFactors() const { return landmark_factors_; }
  std::vector<LandmarkFactor>& mutableLandmarkFactors() { return landmark_factors_; }
  const std::optional<PriorFactor>& prior() const { return prior_; }

  std::size_t numCameras() const { return num_cameras_; }
  std::size_t numLandmarks() const { return values_.size() - num_cameras_; }

  /// Checks that referenced variables exist, odometry links consecutive
  /// cameras and every landmark is observed. Throws GraphError.
  void validate() const;

  /// Same graph with the given landmark factors removed (ids are renumbered).
  PoseGraph withoutLandmarkFactors(const std::vector<bool>& drop) const;

 private:
  Values values_;
  std::size_t num_cameras_ = 0;
  std::vector<OdometryFactor> odometry_;
  std::vector<LandmarkFactor> landmark_factors_;
  std::optional<PriorFactor> prior_;
};

/// log(u_t^-1 x_{t-1}^-1 x_t)
Tangent residualOdometry(const OdometryFactor& f, const Values& values);
/// log(z_k^-1 x_t^-1 l_j)
Tangent residualLandmark(const LandmarkFactor& f, const Values& values);
/// log(m^-1 x)
Tangent residualPrior(const PriorFactor& f, const Values& values);

/// Sum of squared Mahalanobis norms of all factors at the graph's values.
double graphLoss(const PoseGraph& graph);
double graphLoss(const PoseGraph& graph, const Values& values);

/// Data term plus lambda * sum of variances for a single landmark factor.
double landmarkJointContribution(const Tangent& e, const DiagonalNoise& noise, double lambda);

/// Regularization weight lambda' = 1 / sqrt(lambda).
class RegularizationWeight {
 public:
  explicit RegularizationWeight(double lambda_prime);
  double lambdaPrime() const { return lambda_prime_; }
  double lambda() const { return 1.0 / (lambda_prime_ * lambda_prime_); }

 private:
  double lambda_prime_;
};

/// Joint loss with L1-regularized landmark covariances. Factors listed in
/// `frozen` contribute their recorded value instead of the live one.
double jointLoss(const PoseGraph& graph, const RegularizationWeight& weight,
                 const std::map<FactorId, double>& frozen = {});

/// Whitened residual and Jacobians of one factor. Jacobians are taken with
/// respect to right perturbations x <- x * exp(delta).
struct LinearizedFactor {
  std::vector<VariableKey> keys;
  std::vector<Matrix6> jacobians;  // whitened, one per key
  Vector6 residual;                // whitened
};

struct LinearSystem {
  std::vector<LinearizedFactor> factors;
  std::map<VariableKey, int> ordering;  // variable -> block column
  int dimension() const { return static_cast<int>(ordering.size()) * 6; }

  /// Assembles J^T J (upper and lower) and J^T r.
  void normalEquations(Eigen::SparseMatrix<double>& hessian, Eigen::VectorXd& gradient) const;
  double squaredNorm() const;
};

LinearizedFactor linearizeOdometry(const OdometryFactor& f, const Values& values);
LinearizedFactor linearizeLandmark(const LandmarkFactor& f, const Values& values);
LinearizedFactor linearizePrior(const PriorFactor& f, const Values& values);

LinearSystem linearize(const PoseGraph& graph);
LinearSystem linearize(const PoseGraph& graph, const Values& values);

/// Applies x <- x * exp(delta_block) to every variable in the ordering.
Values retract(const Values& values, const std::map<VariableKey, int>& ordering,
               const Eigen::VectorXd& delta);

}  // namespace actpgo

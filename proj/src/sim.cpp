#include "actpgo/sim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace actpgo {
namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double gaussian() { return normal_(rng_); }

  Eigen::Vector3d unitVector() {
    Eigen::Vector3d v;
    do {
      v = Eigen::Vector3d(gaussian(), gaussian(), gaussian());
    } while (v.norm() < 1e-9);
    return v.normalized();
  }

  Eigen::Quaterniond rotation() {
    Eigen::Vector4d q;
    do {
      q = Eigen::Vector4d(gaussian(), gaussian(), gaussian(), gaussian());
    } while (q.norm() < 1e-9);
    q.normalize();
    return Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
  }

  Tangent noise(const Vector6& sigma) {
    Tangent n;
    for (int i = 0; i < 6; ++i) n[i] = sigma[i] * gaussian();
    return n;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Optical axis (z) towards `target`, image y pointing down (world -z).
Pose lookAt(const Eigen::Vector3d& position, const Eigen::Vector3d& target) {
  const Eigen::Vector3d z = (target - position).normalized();
  Eigen::Vector3d y = Eigen::Vector3d(0.0, 0.0, -1.0);
  y = (y - y.dot(z) * z).normalized();
  const Eigen::Vector3d x = y.cross(z);
  Eigen::Matrix3d R;
  R.col(0) = x;
  R.col(1) = y;
  R.col(2) = z;
  return Pose(Eigen::Quaterniond(R), position);
}

}  // namespace

void ScenarioConfig::validate() const {
  if (num_cameras < 2) throw std::invalid_argument("scenario: num_cameras must be >= 2");
  if (num_landmarks < 1) throw std::invalid_argument("scenario: num_landmarks must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("scenario: radius must be > 0");
  if (!(landmark_spread >= 0.0 && landmark_spread < radius)) {
    throw std::invalid_argument("scenario: landmark_spread must be in [0, radius)");
  }
  if ((odometry_sigma.array() < 0.0).any() || (measurement_sigma.array() < 0.0).any()) {
    throw std::invalid_argument("scenario: noise sigmas must be >= 0");
  }
  if (!(outlier_rate >= 0.0 && outlier_rate <= 1.0)) {
    throw std::invalid_argument("scenario: outlier_rate must be in [0, 1]");
  }
  if (!(detection_rate > 0.0 && detection_rate <= 1.0)) {
    throw std::invalid_argument("scenario: detection_rate must be in (0, 1]");
  }
  if (!(outlier_rotation_min >= 0.0 && outlier_rotation_min <= outlier_rotation_max &&
        outlier_rotation_max <= std::numbers::pi)) {
    throw std::invalid_argument("scenario: outlier rotation range must lie in [0, pi]");
  }
  if (!(outlier_translation_min >= 0.0 && outlier_translation_min <= outlier_translation_max)) {
    throw std::invalid_argument("scenario: outlier translation range is invalid");
  }
  if (!(initial_measurement_variance > 0.0 && initial_odometry_variance > 0.0)) {
    throw std::invalid_argument("scenario: initial variances must be > 0");
  }
  intrinsics.validate();
}

ScenarioConfig ScenarioConfig::ObjectSlam(double outlier_rate, std::uint64_t seed) {
  ScenarioConfig c;
  c.odometry_sigma = Vector6::Constant(0.005);
  c.measurement_sigma << 0.04, 0.04, 0.04, 0.02, 0.02, 0.02;
  c.outlier_rate = outlier_rate;
  c.outlier_rotation_min = std::numbers::pi / 6.0;
  c.outlier_translation_min = 0.5;
  c.seed = seed;
  return c;
}

Scenario generate(const ScenarioConfig& config) {
  config.validate();
  Sampler sampler(config.seed);
  const auto T = static_cast<std::uint32_t>(config.num_cameras);
  const auto N = static_cast<std::uint32_t>(config.num_landmarks);

  std::vector<Pose> cameras;
  cameras.reserve(T);
  for (std::uint32_t t = 0; t < T; ++t) {
    const double angle = config.arc * static_cast<double>(t) / static_cast<double>(T);
    const Eigen::Vector3d position(config.radius * std::cos(angle), config.radius * std::sin(angle), 0.0);
    cameras.push_back(lookAt(position, Eigen::Vector3d::Zero()));
  }
  std::vector<Pose> landmarks;
  for (std::uint32_t j = 0; j < N; ++j) {
    const double r = config.landmark_spread * std::sqrt(sampler.uniform(0.0, 1.0));
    const double phi = sampler.uniform(0.0, 2.0 * std::numbers::pi);
    const double z = sampler.uniform(-0.5, 0.5) * config.landmark_spread;
    landmarks.push_back(Pose(sampler.rotation(), Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z)));
  }

  std::vector<Pose> odometry;
  for (std::uint32_t t = 1; t < T; ++t) {
    odometry.push_back(between(cameras[t - 1], cameras[t]) * exp(sampler.noise(config.odometry_sigma)));
  }

  struct Measurement {
    std::uint32_t t;
    std::uint32_t j;
    Pose z;
    bool outlier;
  };
  std::vector<Measurement> measurements;
  std::vector<int> per_landmark(N, 0);
  auto measure = [&](std::uint32_t t, std::uint32_t j) {
    const Pose truth = between(cameras[t], landmarks[j]);
    const bool outlier = sampler.uniform(0.0, 1.0) < config.outlier_rate;
    Tangent delta;
    if (outlier) {
      delta.head<3>() = sampler.unitVector() *
                        sampler.uniform(config.outlier_rotation_min, config.outlier_rotation_max);
      delta.tail<3>() = sampler.unitVector() *
                        sampler.uniform(config.outlier_translation_min, config.outlier_translation_max);
    } else {
      delta = sampler.noise(config.measurement_sigma);
    }
    measurements.push_back({t, j, truth * exp(delta), outlier});
    ++per_landmark[j];
  };
  for (std::uint32_t t = 0; t < T; ++t) {
    for (std::uint32_t j = 0; j < N; ++j) {
      if (sampler.uniform(0.0, 1.0) < config.detection_rate) measure(t, j);
    }
  }
  // Every landmark needs at least one measurement to stay connected.
  for (std::uint32_t j = 0; j < N; ++j) {
    if (per_landmark[j] == 0) {
      const auto t = static_cast<std::uint32_t>(sampler.uniform(0.0, static_cast<double>(T))) % T;
      measure(t, j);
    }
  }

  Scenario out;
  std::vector<Pose> initial_cameras{cameras[0]};
  for (std::uint32_t t = 1; t < T; ++t) initial_cameras.push_back(initial_cameras.back() * odometry[t - 1]);
  for (std::uint32_t t = 0; t < T; ++t) out.graph.addCamera(t, initial_cameras[t]);

  std::vector<std::vector<Pose>> predictions(N);
  for (const auto& m : measurements) predictions[m.j].push_back(initial_cameras[m.t] * m.z);
  for (std::uint32_t j = 0; j < N; ++j) out.graph.addLandmark(j, meanPose(predictions[j]));

  const auto odo_noise = DiagonalNoise::Isotropic(config.initial_odometry_variance);
  for (std::uint32_t t = 1; t < T; ++t) out.graph.addOdometry(t - 1, odometry[t - 1], odo_noise);
  const auto meas_noise = DiagonalNoise::Isotropic(config.initial_measurement_variance);
  for (const auto& m : measurements) {
    out.graph.addLandmarkFactor(m.t, m.j, m.z, meas_noise);
    out.truth.outlier_flags.push_back(m.outlier);
  }
  out.graph.anchorFirstCamera();

  for (std::uint32_t t = 0; t < T; ++t) out.truth.poses[VariableKey::Camera(t)] = cameras[t];
  for (std::uint32_t j = 0; j < N; ++j) out.truth.poses[VariableKey::Landmark(j)] = landmarks[j];
  return out;
}

std::map<std::uint32_t, CuboidModel> scenarioModels(const ScenarioConfig& config) {
  std::map<std::uint32_t, CuboidModel> models;
  for (int j = 0; j < config.num_landmarks; ++j) {
    const auto id = static_cast<std::uint32_t>(j);
    models[id] = CuboidModel::FromDimensions(id, config.object_dimensions);
  }
  return models;
}

std::map<std::pair<std::uint32_t, std::uint32_t>, Pose> trueRelativePoses(const GroundTruth& truth) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, Pose> out;
  for (const auto& [ck, cam] : truth.poses) {
    if (ck.kind != VariableKind::Camera) continue;
    for (const auto& [lk, lm] : truth.poses) {
      if (lk.kind != VariableKind::Landmark) continue;
      out[{ck.index, lk.index}] = between(cam, lm);
    }
  }
  return out;
}

}  // namespace actpgo

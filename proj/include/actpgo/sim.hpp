#pragma once

#include "actpgo/graph.hpp"
#include "actpgo/labeling.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <numbers>
#include <vector>

namespace actpgo {

/// Camera circling a few static objects. Noise sigmas are per tangent
/// component, rotation first.
struct ScenarioConfig {
  int num_cameras = 20;
  int num_landmarks = 3;
  double radius = 2.0;             // m
  double arc = 2.0 * std::numbers::pi;  // angle swept by the trajectory, rad
  double landmark_spread = 0.3;    // objects lie within this distance of the centre, m
  Vector6 odometry_sigma = Vector6::Constant(0.1);
  Vector6 measurement_sigma = (Vector6() << 0.02, 0.02, 0.02, 0.01, 0.01, 0.01).finished();
  double outlier_rate = 0.0;
  double outlier_rotation_min = 0.0;  // rad
  double outlier_rotation_max = std::numbers::pi;
  double outlier_translation_min = 0.0;  // m
  double outlier_translation_max = 1.0;
  double detection_rate = 1.0;
  std::uint64_t seed = 0;

  /// Covariances the generated graph starts from.
  double initial_measurement_variance = 0.1;
  double initial_odometry_variance = 0.01;

  CameraIntrinsics intrinsics;
  Eigen::Vector3d object_dimensions = Eigen::Vector3d(0.16, 0.21, 0.07);

  /// Throws std::invalid_argument on degenerate or out-of-range settings.
  void validate() const;

  /// Accurate visual odometry (sigma 0.005) and object pose predictions with
  /// a few cm / degrees of noise; outliers of at least 30 deg and 0.5 m.
  static ScenarioConfig ObjectSlam(double outlier_rate, std::uint64_t seed);
};

struct GroundTruth {
  Values poses;                     // true camera and landmark poses
  std::vector<bool> outlier_flags;  // indexed by landmark factor id
};

struct Scenario {
  PoseGraph graph;
  GroundTruth truth;
};

/// Deterministic for a given config (including its seed). Cameras start from
/// the odometry chain anchored at the true x_0; landmarks start from the mean
/// of their measurements composed with the initial camera poses.
Scenario generate(const ScenarioConfig& config);

/// One cuboid model per landmark, all with the configured dimensions.
std::map<std::uint32_t, CuboidModel> scenarioModels(const ScenarioConfig& config);

/// True object-in-camera pose for every (frame, landmark) pair.
std::map<std::pair<std::uint32_t, std::uint32_t>, Pose> trueRelativePoses(const GroundTruth& truth);

}  // namespace actpgo

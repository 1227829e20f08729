#pragma once

#include "actpgo/labeling.hpp"
#include "actpgo/liegroup.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace actpgo {

struct TrajectoryPoint {
  double stamp = 0.0;
  Pose pose;
};

/// Poses with strictly increasing stamps.
class Trajectory {
 public:
  Trajectory() = default;
  /// Throws std::invalid_argument if stamps are not strictly increasing.
  explicit Trajectory(std::vector<TrajectoryPoint> points);

  void push_back(const TrajectoryPoint& p);
  const std::vector<TrajectoryPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

 private:
  std::vector<TrajectoryPoint> points_;
};

/// Translation RMSE. With `align`, the best rigid transform (no scale) from
/// the estimated positions onto the ground truth is applied first.
double ateRmse(const Trajectory& estimate, const Trajectory& truth, bool align = false);

struct PoseError {
  double translation = 0.0;  // m
  double rotation = 0.0;     // rad, geodesic
};

PoseError objectPoseError(const Pose& estimate, const Pose& truth);

/// Mean distance between model points under the two poses.
double addError(std::span<const Eigen::Vector3d> model_points, const Pose& estimate, const Pose& truth);

struct LabelErrors {
  std::vector<double> per_label;  // mean keypoint distance, px, in label order
  double median = 0.0;
};

/// Per label: mean over the 9 keypoints of the distance between the label's
/// projection and the projection of the true pose. Labels whose truth is not
/// provided are skipped.
LabelErrors labelPixelError(
    std::span<const PseudoLabel> labels,
    const std::function<std::optional<Pose>(std::uint32_t frame, std::uint32_t object)>& truth,
    const CameraIntrinsics& intrinsics, const std::map<std::uint32_t, CuboidModel>& models);

double median(std::vector<double> values);

struct CurvePoint {
  double threshold = 0.0;
  double accuracy = 0.0;  // fraction of errors <= threshold
};

/// Accuracy at `samples` evenly spaced thresholds in [0, max_threshold].
std::vector<CurvePoint> accuracyCurve(std::span<const double> errors, double max_threshold,
                                      int samples = 201);

/// Trapezoidal area under the curve, normalized by max_threshold, in percent.
double auc(std::span<const CurvePoint> curve, double max_threshold);

}  // namespace actpgo

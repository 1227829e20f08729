#include "actpgo/eval.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

namespace actpgo {

Trajectory::Trajectory(std::vector<TrajectoryPoint> points) {
  points_.reserve(points.size());
  for (const auto& p : points) push_back(p);
}

void Trajectory::push_back(const TrajectoryPoint& p) {
  if (!points_.empty() && !(p.stamp > points_.back().stamp)) {
    throw std::invalid_argument("trajectory stamps must be strictly increasing");
  }
  points_.push_back(p);
}

double ateRmse(const Trajectory& estimate, const Trajectory& truth, bool align) {
  if (estimate.size() != truth.size()) throw std::invalid_argument("ateRmse: trajectory lengths differ");
  const auto n = static_cast<Eigen::Index>(estimate.size());
  if (n == 0) return 0.0;
  Eigen::Matrix3Xd est(3, n), gt(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    est.col(i) = estimate.points()[i].pose.translation();
    gt.col(i) = truth.points()[i].pose.translation();
  }
  if (align) {
    const Eigen::Matrix4d T = Eigen::umeyama(est, gt, false);
    est = (T.topLeftCorner<3, 3>() * est).colwise() + T.topRightCorner<3, 1>();
  }
  return std::sqrt((est - gt).colwise().squaredNorm().mean());
}

PoseError objectPoseError(const Pose& estimate, const Pose& truth) {
  const Eigen::Quaterniond dq = estimate.rotation().conjugate() * truth.rotation();
  return {(estimate.translation() - truth.translation()).norm(),
          2.0 * std::atan2(dq.vec().norm(), std::abs(dq.w()))};
}

double addError(std::span<const Eigen::Vector3d> model_points, const Pose& estimate, const Pose& truth) {
  if (model_points.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : model_points) sum += (estimate * p - truth * p).norm();
  return sum / static_cast<double>(model_points.size());
}

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

LabelErrors labelPixelError(
    std::span<const PseudoLabel> labels,
    const std::function<std::optional<Pose>(std::uint32_t, std::uint32_t)>& truth,
    const CameraIntrinsics& intrinsics, const std::map<std::uint32_t, CuboidModel>& models) {
  LabelErrors out;
  for (const auto& label : labels) {
    const auto gt = truth(label.frame, label.object);
    const auto model = models.find(label.object);
    if (!gt || model == models.end()) continue;
    const Keypoints2d a = projectCuboid(label.pose, intrinsics, model->second);
    const Keypoints2d b = projectCuboid(*gt, intrinsics, model->second);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]).norm();
    out.per_label.push_back(sum / static_cast<double>(a.size()));
  }
  out.median = median(out.per_label);
  return out;
}

std::vector<CurvePoint> accuracyCurve(std::span<const double> errors, double max_threshold, int samples) {
  if (samples < 2 || !(max_threshold > 0.0)) {
    throw std::invalid_argument("accuracyCurve: need >= 2 samples and a positive max threshold");
  }
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double th = max_threshold * static_cast<double>(i) / static_cast<double>(samples - 1);
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), th) - sorted.begin();
    const double acc = sorted.empty() ? 0.0 : static_cast<double>(below) / static_cast<double>(sorted.size());
    curve.push_back({th, acc});
  }
  return curve;
}

double auc(std::span<const CurvePoint> curve, double max_threshold) {
  if (!(max_threshold > 0.0)) throw std::invalid_argument("auc: max threshold must be > 0");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double a = std::min(curve[i - 1].threshold, max_threshold);
    const double b = std::min(curve[i].threshold, max_threshold);
    area += 0.5 * (curve[i - 1].accuracy + curve[i].accuracy) * (b - a);
  }
  return 100.0 * area / max_threshold;
}

}  // namespace actpgo

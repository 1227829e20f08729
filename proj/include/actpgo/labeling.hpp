#pragma once

#include "actpgo/graph.hpp"
#include "actpgo/liegroup.hpp"
#include "actpgo/solvers.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace actpgo {

struct CameraIntrinsics {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;

  void validate() const;
};

/// Axis-aligned box in the object frame: 8 corners followed by the centroid.
struct CuboidModel {
  std::uint32_t object_id = 0;
  Eigen::Vector3d dimensions = Eigen::Vector3d::Constant(0.1);
  std::array<Eigen::Vector3d, 9> keypoints{};

  static CuboidModel FromDimensions(std::uint32_t object_id, const Eigen::Vector3d& dimensions);
};

using Keypoints2d = std::array<Eigen::Vector2d, 9>;

class BehindCameraError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Pinhole projection of the model keypoints placed at `object_in_camera`.
/// Throws BehindCameraError if any keypoint has non-positive depth.
Keypoints2d projectCuboid(const Pose& object_in_camera, const CameraIntrinsics& intrinsics,
                          const CuboidModel& model);

enum class LabelSource { Inlier, PgoEasy, PgoHard };

std::string_view toString(LabelSource s);
LabelSource labelSourceFromString(std::string_view s);

struct PseudoLabel {
  std::uint32_t frame = 0;
  std::uint32_t object = 0;
  Pose pose;  // object in camera frame
  Keypoints2d keypoints{};
  LabelSource source = LabelSource::Inlier;
  double score = 0.0;
};

/// Visual-consistency score in [0, 1] for an object pose hypothesis in a frame.
using Scorer = std::function<double(std::uint32_t frame, std::uint32_t object, const Pose& pose)>;

struct HybridThresholds {
  double s_pgo = 0.9;
  double s_in = 0.3;
  /// Emit the lower scorer when the higher one misses its own threshold.
  bool fallback = false;

  void validate() const;
};

struct Selection {
  Pose pose;
  LabelSource source = LabelSource::Inlier;
  double score = 0.0;
};

/// Picks between the inlier prediction (if any) and the PGO pose:
///   PGO pose    if score(pgo) > score(inlier) and score(pgo) > s_pgo
///   inlier pose if score(inlier) > score(pgo) and score(inlier) > s_in
/// A missing inlier scores -infinity.
std::optional<Selection> hybridSelect(std::uint32_t frame, std::uint32_t object,
                                      const std::optional<Pose>& inlier_pose, const Pose& pgo_pose,
                                      const Scorer& scorer, const HybridThresholds& thresholds);

/// Landmark factor ids passing the chi-square test at the report's estimates,
/// evaluated with the graph's (initial) covariances.
std::vector<FactorId> extractInliers(const SolveReport& report, const PoseGraph& graph,
                                     double confidence = 0.95);

/// x_t^-1 l_j at the report's estimates.
Pose optimizedObjectPose(const SolveReport& report, std::uint32_t t, std::uint32_t j);

/// exp(-mean keypoint distance to the reference projection / scale_px).
class GeometricScorer {
 public:
  GeometricScorer(std::map<std::pair<std::uint32_t, std::uint32_t>, Pose> reference,
                  CameraIntrinsics intrinsics, std::map<std::uint32_t, CuboidModel> models,
                  double scale_px = 20.0);

  double operator()(std::uint32_t frame, std::uint32_t object, const Pose& pose) const;

 private:
  std::map<std::pair<std::uint32_t, std::uint32_t>, Pose> reference_;
  CameraIntrinsics intrinsics_;
  std::map<std::uint32_t, CuboidModel> models_;
  double scale_px_;
};

struct LabelOptions {
  HybridThresholds thresholds;
  double chi2_confidence = 0.95;
  /// Skip the whole sequence when the flagged outlier rate exceeds this.
  std::optional<double> max_outlier_rate;
};

struct LabelBatch {
  std::vector<PseudoLabel> labels;
  double outlier_rate = 0.0;
  bool excluded = false;
};

/// Runs hybrid selection for every (frame, landmark) pair of the graph.
/// Landmark j uses models.at(j).
LabelBatch generateLabels(const PoseGraph& graph, const SolveReport& report,
                          const CameraIntrinsics& intrinsics,
                          const std::map<std::uint32_t, CuboidModel>& models, const Scorer& scorer,
                          const LabelOptions& options = {});

}  // namespace actpgo

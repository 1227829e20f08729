#include "actpgo/labeling.hpp"

#include "actpgo/act.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace actpgo {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("intrinsics: focal lengths must be > 0");
  if (width <= 0 || height <= 0) throw std::invalid_argument("intrinsics: image size must be > 0");
  if (cx < 0.0 || cx > width || cy < 0.0 || cy > height) {
    throw std::invalid_argument("intrinsics: principal point outside the image");
  }
}

CuboidModel CuboidModel::FromDimensions(std::uint32_t object_id, const Eigen::Vector3d& dimensions) {
  if ((dimensions.array() <= 0.0).any()) throw std::invalid_argument("cuboid dimensions must be > 0");
  CuboidModel m;
  m.object_id = object_id;
  m.dimensions = dimensions;
  const Eigen::Vector3d h = 0.5 * dimensions;
  int i = 0;
  for (int sx : {1, -1}) {
    for (int sy : {1, -1}) {
      for (int sz : {1, -1}) m.keypoints[i++] = Eigen::Vector3d(sx * h.x(), sy * h.y(), sz * h.z());
    }
  }
  m.keypoints[8] = Eigen::Vector3d::Zero();
  return m;
}

Keypoints2d projectCuboid(const Pose& object_in_camera, const CameraIntrinsics& intrinsics,
                          const CuboidModel& model) {
  Keypoints2d out;
  for (std::size_t i = 0; i < model.keypoints.size(); ++i) {
    const Eigen::Vector3d p = object_in_camera * model.keypoints[i];
    if (!(p.z() > 0.0)) throw BehindCameraError("keypoint " + std::to_string(i) + " is behind the camera");
    out[i] = Eigen::Vector2d(intrinsics.fx * p.x() / p.z() + intrinsics.cx,
                             intrinsics.fy * p.y() / p.z() + intrinsics.cy);
  }
  return out;
}

std::string_view toString(LabelSource s) {
  switch (s) {
    case LabelSource::Inlier: return "inlier";
    case LabelSource::PgoEasy: return "pgo-easy";
    case LabelSource::PgoHard: return "pgo-hard";
  }
  return "unknown";
}

LabelSource labelSourceFromString(std::string_view s) {
  if (s == "inlier") return LabelSource::Inlier;
  if (s == "pgo-easy") return LabelSource::PgoEasy;
  if (s == "pgo-hard") return LabelSource::PgoHard;
  throw std::invalid_argument("unknown label source '" + std::string(s) + "'");
}

void HybridThresholds::validate() const {
  if (!(s_pgo > s_in)) throw std::invalid_argument("hybrid thresholds require s_pgo > s_in");
}

std::optional<Selection> hybridSelect(std::uint32_t frame, std::uint32_t object,
                                      const std::optional<Pose>& inlier_pose, const Pose& pgo_pose,
                                      const Scorer& scorer, const HybridThresholds& thresholds) {
  const double pgo_score = scorer(frame, object, pgo_pose);
  const double inlier_score = inlier_pose ? scorer(frame, object, *inlier_pose)
                                          : -std::numeric_limits<double>::infinity();
  const LabelSource pgo_source = inlier_pose ? LabelSource::PgoEasy : LabelSource::PgoHard;

  const bool pgo_ok = pgo_score > thresholds.s_pgo;
  const bool inlier_ok = inlier_score > thresholds.s_in;
  if (pgo_score > inlier_score) {
    if (pgo_ok) return Selection{pgo_pose, pgo_source, pgo_score};
    if (thresholds.fallback && inlier_ok) return Selection{*inlier_pose, LabelSource::Inlier, inlier_score};
  } else if (inlier_score > pgo_score) {
    if (inlier_ok) return Selection{*inlier_pose, LabelSource::Inlier, inlier_score};
    if (thresholds.fallback && pgo_ok) return Selection{pgo_pose, pgo_source, pgo_score};
  }
  return std::nullopt;
}

std::vector<FactorId> extractInliers(const SolveReport& report, const PoseGraph& graph,
                                     double confidence) {
  const double critical = chi2Critical(6, confidence);
  std::vector<FactorId> ids;
  for (const auto& f : graph.landmarkFactors()) {
    if (chi2Test(residualLandmark(f, report.estimates), f.noise, critical)) ids.push_back(f.id);
  }
  return ids;
}

Pose optimizedObjectPose(const SolveReport& report, std::uint32_t t, std::uint32_t j) {
  const auto cam = report.estimates.find(VariableKey::Camera(t));
  const auto lm = report.estimates.find(VariableKey::Landmark(j));
  if (cam == report.estimates.end() || lm == report.estimates.end()) {
    throw GraphError("optimizedObjectPose: missing estimate for x" + std::to_string(t) + " or l" +
                     std::to_string(j));
  }
  return between(cam->second, lm->second);
}

GeometricScorer::GeometricScorer(std::map<std::pair<std::uint32_t, std::uint32_t>, Pose> reference,
                                 CameraIntrinsics intrinsics,
                                 std::map<std::uint32_t, CuboidModel> models, double scale_px)
    : reference_(std::move(reference)),
      intrinsics_(intrinsics),
      models_(std::move(models)),
      scale_px_(scale_px) {
  if (!(scale_px_ > 0.0)) throw std::invalid_argument("GeometricScorer: scale must be > 0");
}

double GeometricScorer::operator()(std::uint32_t frame, std::uint32_t object, const Pose& pose) const {
  const auto ref = reference_.find({frame, object});
  const auto model = models_.find(object);
  if (ref == reference_.end() || model == models_.end()) return 0.0;
  try {
    const Keypoints2d a = projectCuboid(pose, intrinsics_, model->second);
    const Keypoints2d b = projectCuboid(ref->second, intrinsics_, model->second);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]).norm();
    return std::exp(-(sum / static_cast<double>(a.size())) / scale_px_);
  } catch (const BehindCameraError&) {
    return 0.0;
  }
}

LabelBatch generateLabels(const PoseGraph& graph, const SolveReport& report,
                          const CameraIntrinsics& intrinsics,
                          const std::map<std::uint32_t, CuboidModel>& models, const Scorer& scorer,
                          const LabelOptions& options) {
  options.thresholds.validate();
  LabelBatch batch;

  std::vector<bool> is_inlier(graph.landmarkFactors().size(), false);
  for (FactorId id : extractInliers(report, graph, options.chi2_confidence)) is_inlier[id] = true;
  if (!is_inlier.empty()) {
    std::size_t outliers = 0;
    for (bool b : is_inlier) outliers += b ? 0 : 1;
    batch.outlier_rate = static_cast<double>(outliers) / static_cast<double>(is_inlier.size());
  }
  if (options.max_outlier_rate && batch.outlier_rate > *options.max_outlier_rate) {
    batch.excluded = true;
    return batch;
  }

  // Inlier predictions per (frame, object); several per pair keep the best score.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<Pose>> inliers;
  for (const auto& f : graph.landmarkFactors()) {
    if (is_inlier[f.id]) inliers[{f.camera.index, f.landmark.index}].push_back(f.measurement);
  }

  for (const auto& [key, pose] : report.estimates) {
    if (key.kind != VariableKind::Camera) continue;
    const std::uint32_t t = key.index;
    for (const auto& [lkey, lpose] : report.estimates) {
      if (lkey.kind != VariableKind::Landmark) continue;
      const std::uint32_t j = lkey.index;
      const auto model = models.find(j);
      if (model == models.end()) {
        throw std::invalid_argument("no cuboid model for object " + std::to_string(j));
      }
      std::optional<Pose> inlier_pose;
      if (auto it = inliers.find({t, j}); it != inliers.end()) {
        double best = -std::numeric_limits<double>::infinity();
        for (const Pose& p : it->second) {
          const double s = scorer(t, j, p);
          if (s > best) {
            best = s;
            inlier_pose = p;
          }
        }
      }
      const Pose pgo_pose = between(pose, lpose);
      const auto selection = hybridSelect(t, j, inlier_pose, pgo_pose, scorer, options.thresholds);
      if (!selection) continue;
      try {
        PseudoLabel label;
        label.frame = t;
        label.object = j;
        label.pose = selection->pose;
        label.keypoints = projectCuboid(selection->pose, intrinsics, model->second);
        label.source = selection->source;
        label.score = selection->score;
        batch.labels.push_back(label);
      } catch (const BehindCameraError&) {
        // label rejected
      }
    }
  }
  return batch;
}

}  // namespace actpgo

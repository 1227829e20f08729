#pragma once

#include "actpgo/eval.hpp"
#include "actpgo/graph.hpp"
#include "actpgo/labeling.hpp"
#include "actpgo/sim.hpp"
#include "actpgo/solvers.hpp"

#include <json.hpp>

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace actpgo::io {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// %.12g
std::string formatNumber(double v);

/// g2o-style text graph:
///   VERTEX_SE3:QUAT id x y z qx qy qz qw      camera
///   VERTEX_OBJ:QUAT id x y z qx qy qz qw      object landmark
///   EDGE_SE3:QUAT a b x y z qx qy qz qw i11 i12 .. i66
/// The 21 information entries are the upper triangle of a diagonal matrix in
/// [rotation; translation] order. Camera-to-camera edges are odometry between
/// consecutive cameras, camera-to-landmark edges are object measurements.
/// Cameras map to indices by ascending id, likewise landmarks. The returned
/// graph is anchored at x_0.
PoseGraph parseGraph(std::string_view text);
/// Cameras get ids 0..T-1 and landmarks T..T+N-1.
std::string writeGraph(const PoseGraph& graph);

/// `timestamp tx ty tz qx qy qz qw` lines; '#' starts a comment.
Trajectory parseTrajectory(std::string_view text);
std::string writeTrajectory(const Trajectory& trajectory);
/// Camera poses of `values` with the camera index as timestamp.
Trajectory cameraTrajectory(const Values& values);

std::string readFile(const std::string& path);
void writeFile(const std::string& path, std::string_view contents);

nlohmann::json poseToJson(const Pose& p);
Pose poseFromJson(const nlohmann::json& j);

nlohmann::json reportToJson(const SolveReport& report, const PoseGraph& graph);
SolveReport reportFromJson(const nlohmann::json& j);

nlohmann::json scenarioToJson(const ScenarioConfig& config);
/// Missing keys keep their defaults; 6-vectors accept a scalar.
ScenarioConfig scenarioFromJson(const nlohmann::json& j);

nlohmann::json intrinsicsToJson(const CameraIntrinsics& k);
CameraIntrinsics intrinsicsFromJson(const nlohmann::json& j);

/// {"<object id>": {"dimensions": [dx, dy, dz]}, ...}
nlohmann::json modelsToJson(const std::map<std::uint32_t, CuboidModel>& models);
std::map<std::uint32_t, CuboidModel> modelsFromJson(const nlohmann::json& j);

/// Ground-truth sidecar: true poses, outlier flags and factor association.
nlohmann::json groundTruthToJson(const GroundTruth& truth, const PoseGraph& graph);
GroundTruth groundTruthFromJson(const nlohmann::json& j);

nlohmann::json labelToJson(const PseudoLabel& label);
PseudoLabel labelFromJson(const nlohmann::json& j);
std::string writeLabels(const std::vector<PseudoLabel>& labels);
std::vector<PseudoLabel> parseLabels(std::string_view text);

}  // namespace actpgo::io

#include "actpgo/io.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace actpgo::io {
namespace {

using nlohmann::json;

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parseDouble(const std::string& tok, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE) {
    throw ParseError(line, "not a number: '" + tok + "'");
  }
  return v;
}

long long parseInt(const std::string& tok, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE) {
    throw ParseError(line, "not an integer: '" + tok + "'");
  }
  return v;
}

// x y z qx qy qz qw starting at tokens[first].
Pose parsePose(const std::vector<std::string>& tokens, std::size_t first, std::size_t line) {
  double v[7];
  for (int i = 0; i < 7; ++i) v[i] = parseDouble(tokens[first + static_cast<std::size_t>(i)], line);
  const Eigen::Quaterniond q(v[6], v[3], v[4], v[5]);
  if (!(q.norm() > 1e-12)) throw ParseError(line, "zero quaternion");
  return Pose(q, Eigen::Vector3d(v[0], v[1], v[2]));
}

using QuatText = std::array<std::string, 4>;  // x y z w

QuatText formatQuat(const Eigen::Vector4d& c) {
  return {formatNumber(c[0]), formatNumber(c[1]), formatNumber(c[2]), formatNumber(c[3])};
}

Eigen::Vector4d readQuat(const QuatText& text) {
  Eigen::Vector4d c;
  for (int i = 0; i < 4; ++i) c[i] = std::strtod(text[static_cast<std::size_t>(i)].c_str(), nullptr);
  return c;
}

Eigen::Vector4d reparsed(const QuatText& text) {
  const Eigen::Vector4d c = readQuat(text);
  return Pose(Eigen::Quaterniond(c[3], c[0], c[1], c[2]), Eigen::Vector3d::Zero()).rotation().coeffs();
}

// Printed quaternions are renormalized when read back, which can move the
// last printed digit. Pick digits that survive a parse/write cycle.
QuatText stableQuat(const Eigen::Quaterniond& q) {
  Eigen::Vector4d c = q.coeffs();
  for (int it = 0; it < 3; ++it) {
    const QuatText text = formatQuat(c);
    const Eigen::Vector4d back = reparsed(text);
    if (formatQuat(back) == text) return text;
    c = back;
  }
  const QuatText base = formatQuat(c);
  const Eigen::Vector4d digits = readQuat(base);
  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(digits[a]) > std::abs(digits[b]); });
  auto ulp = [](double v) { return v == 0.0 ? 1e-12 : std::pow(10.0, std::floor(std::log10(std::abs(v))) - 11.0); };
  for (int radius = 1; radius <= 4; ++radius) {
    for (int da = -radius; da <= radius; ++da) {
      for (int db = -radius; db <= radius; ++db) {
        if (std::max(std::abs(da), std::abs(db)) != radius) continue;
        Eigen::Vector4d cand = digits;
        cand[order[0]] += da * ulp(digits[order[0]]);
        cand[order[1]] += db * ulp(digits[order[1]]);
        const QuatText text = formatQuat(cand);
        if (formatQuat(reparsed(text)) == text) return text;
      }
    }
  }
  return base;
}

void appendPose(std::string& out, const Pose& p) {
  const auto& t = p.translation();
  for (double v : {t.x(), t.y(), t.z()}) {
    out += ' ';
    out += formatNumber(v);
  }
  for (const auto& v : stableQuat(p.rotation())) {
    out += ' ';
    out += v;
  }
}

bool skippable(std::string_view line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string_view::npos || line[pos] == '#';
}

std::vector<std::string_view> splitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

}  // namespace

std::string formatNumber(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

PoseGraph parseGraph(std::string_view text) {
  struct Vertex {
    long long id;
    bool landmark;
    Pose pose;
    std::size_t line;
  };
  struct Edge {
    long long a, b;
    Pose measurement;
    DiagonalNoise noise;
    std::size_t line;
  };
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;

  const auto lines = splitLines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line = n + 1;
    if (skippable(lines[n])) continue;
    const auto tok = tokenize(lines[n]);
    const std::string& tag = tok[0];
    if (tag == "VERTEX_SE3:QUAT" || tag == "VERTEX_OBJ:QUAT") {
      if (tok.size() != 9) throw ParseError(line, tag + " expects 8 fields");
      vertices.push_back({parseInt(tok[1], line), tag == "VERTEX_OBJ:QUAT", parsePose(tok, 2, line), line});
    } else if (tag == "EDGE_SE3:QUAT") {
      if (tok.size() != 31) throw ParseError(line, "EDGE_SE3:QUAT expects 30 fields");
      Vector6 variances;
      std::size_t idx = 10;
      for (int r = 0; r < 6; ++r) {
        for (int c = r; c < 6; ++c, ++idx) {
          const double v = parseDouble(tok[idx], line);
          if (r == c) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ParseError(line, "information diagonal must be positive");
            variances[r] = 1.0 / v;
          } else if (v != 0.0) {
            throw ParseError(line, "non-diagonal information is not supported");
          }
        }
      }
      edges.push_back({parseInt(tok[1], line), parseInt(tok[2], line), parsePose(tok, 3, line),
                       DiagonalNoise(variances), line});
    } else {
      throw ParseError(line, "unknown record type '" + tag + "'");
    }
  }

  std::map<long long, VariableKey> keys;
  std::vector<const Vertex*> cams, lms;
  for (const auto& v : vertices) {
    if (keys.contains(v.id)) throw ParseError(v.line, "duplicate vertex id " + std::to_string(v.id));
    keys[v.id] = {};
    (v.landmark ? lms : cams).push_back(&v);
  }
  auto by_id = [](const Vertex* a, const Vertex* b) { return a->id < b->id; };
  std::sort(cams.begin(), cams.end(), by_id);
  std::sort(lms.begin(), lms.end(), by_id);

  PoseGraph graph;
  for (std::size_t t = 0; t < cams.size(); ++t) {
    keys[cams[t]->id] = VariableKey::Camera(static_cast<std::uint32_t>(t));
    graph.addCamera(static_cast<std::uint32_t>(t), cams[t]->pose);
  }
  for (std::size_t j = 0; j < lms.size(); ++j) {
    keys[lms[j]->id] = VariableKey::Landmark(static_cast<std::uint32_t>(j));
    graph.addLandmark(static_cast<std::uint32_t>(j), lms[j]->pose);
  }
  for (const auto& e : edges) {
    const auto a = keys.find(e.a);
    const auto b = keys.find(e.b);
    if (a == keys.end() || b == keys.end()) throw ParseError(e.line, "edge references an undeclared vertex");
    const VariableKey ka = a->second;
    const VariableKey kb = b->second;
    if (ka.kind == VariableKind::Camera && kb.kind == VariableKind::Camera) {
      if (ka.index + 1 != kb.index) throw ParseError(e.line, "odometry must link consecutive cameras");
      graph.addOdometry(ka.index, e.measurement, e.noise);
    } else if (ka.kind == VariableKind::Camera && kb.kind == VariableKind::Landmark) {
      graph.addLandmarkFactor(ka.index, kb.index, e.measurement, e.noise);
    } else {
      throw ParseError(e.line, "edges must go camera->camera or camera->landmark");
    }
  }
  if (graph.numCameras() > 0) {
    try {
      graph.validate();
    } catch (const GraphError& err) {
      throw ParseError(0, err.what());
    }
    graph.anchorFirstCamera();
  }
  return graph;
}

std::string writeGraph(const PoseGraph& graph) {
  std::string out;
  const auto T = static_cast<long long>(graph.numCameras());
  auto file_id = [T](const VariableKey& k) {
    return k.kind == VariableKind::Camera ? static_cast<long long>(k.index) : T + k.index;
  };
  for (const auto& [key, pose] : graph.values()) {
    out += key.kind == VariableKind::Camera ? "VERTEX_SE3:QUAT " : "VERTEX_OBJ:QUAT ";
    out += std::to_string(file_id(key));
    appendPose(out, pose);
    out += '\n';
  }
  auto edge = [&](const VariableKey& a, const VariableKey& b, const Pose& m, const DiagonalNoise& noise) {
    out += "EDGE_SE3:QUAT " + std::to_string(file_id(a)) + ' ' + std::to_string(file_id(b));
    appendPose(out, m);
    for (int r = 0; r < 6; ++r) {
      for (int c = r; c < 6; ++c) {
        out += ' ';
        out += r == c ? formatNumber(1.0 / noise.variance(r)) : "0";
      }
    }
    out += '\n';
  };
  for (const auto& f : graph.odometry()) edge(f.from, f.to, f.measurement, f.noise);
  for (const auto& f : graph.landmarkFactors()) edge(f.camera, f.landmark, f.measurement, f.noise);
  return out;
}

Trajectory parseTrajectory(std::string_view text) {
  Trajectory traj;
  const auto lines = splitLines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (skippable(lines[n])) continue;
    const auto tok = tokenize(lines[n]);
    if (tok.size() != 8) throw ParseError(n + 1, "trajectory lines need 8 fields");
    const double stamp = parseDouble(tok[0], n + 1);
    try {
      traj.push_back({stamp, parsePose(tok, 1, n + 1)});
    } catch (const std::invalid_argument& e) {
      throw ParseError(n + 1, e.what());
    }
  }
  return traj;
}

std::string writeTrajectory(const Trajectory& trajectory) {
  std::string out;
  for (const auto& p : trajectory.points()) {
    out += formatNumber(p.stamp);
    appendPose(out, p.pose);
    out += '\n';
  }
  return out;
}

Trajectory cameraTrajectory(const Values& values) {
  Trajectory traj;
  for (const auto& [key, pose] : values) {
    if (key.kind == VariableKind::Camera) traj.push_back({static_cast<double>(key.index), pose});
  }
  return traj;
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

json poseToJson(const Pose& p) {
  const auto& q = p.rotation();
  const auto& t = p.translation();
  return json{{"quat", {q.w(), q.x(), q.y(), q.z()}}, {"trans", {t.x(), t.y(), t.z()}}};
}

Pose poseFromJson(const json& j) {
  const auto& q = j.at("quat");
  const auto& t = j.at("trans");
  if (q.size() != 4 || t.size() != 3) throw std::invalid_argument("pose needs quat[4] and trans[3]");
  return Pose(Eigen::Quaterniond(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>()),
              Eigen::Vector3d(t[0].get<double>(), t[1].get<double>(), t[2].get<double>()));
}

namespace {

json vec6ToJson(const Vector6& v) { return json(std::vector<double>(v.data(), v.data() + 6)); }

Vector6 vec6FromJson(const json& j) {
  if (j.is_number()) return Vector6::Constant(j.get<double>());
  if (!j.is_array() || j.size() != 6) throw std::invalid_argument("expected a number or an array of 6");
  Vector6 v;
  for (int i = 0; i < 6; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

Termination terminationFromString(const std::string& s) {
  if (s == "converged") return Termination::Converged;
  if (s == "max_iters") return Termination::MaxIters;
  if (s == "failed") return Termination::Failed;
  throw std::invalid_argument("unknown termination '" + s + "'");
}

}  // namespace

json reportToJson(const SolveReport& report, const PoseGraph& graph) {
  json cams = json::array();
  json lms = json::array();
  for (const auto& [key, pose] : report.estimates) {
    json entry{{"index", key.index}, {"pose", poseToJson(pose)}};
    (key.kind == VariableKind::Camera ? cams : lms).push_back(entry);
  }
  json factors = json::array();
  for (const auto& f : graph.landmarkFactors()) {
    json entry{{"id", f.id}, {"camera", f.camera.index}, {"landmark", f.landmark.index}};
    if (f.id < report.inlier_flags.size()) entry["inlier"] = static_cast<bool>(report.inlier_flags[f.id]);
    if (f.id < report.final_covariances.size()) {
      entry["covariance"] = vec6ToJson(report.final_covariances[f.id].variances());
    }
    factors.push_back(entry);
  }
  return json{{"method", report.method},
              {"termination", std::string(toString(report.termination))},
              {"iterations", report.iterations},
              {"message", report.message},
              {"initial_loss", report.initial_loss},
              {"loss_trace", report.loss_trace},
              {"cameras", cams},
              {"landmarks", lms},
              {"factors", factors}};
}

SolveReport reportFromJson(const json& j) {
  SolveReport r;
  r.method = j.value("method", "");
  r.termination = terminationFromString(j.value("termination", "converged"));
  r.iterations = j.value("iterations", 0);
  r.message = j.value("message", "");
  r.initial_loss = j.value("initial_loss", 0.0);
  r.loss_trace = j.value("loss_trace", std::vector<double>{});
  for (const auto& c : j.at("cameras")) {
    r.estimates[VariableKey::Camera(c.at("index").get<std::uint32_t>())] = poseFromJson(c.at("pose"));
  }
  for (const auto& l : j.at("landmarks")) {
    r.estimates[VariableKey::Landmark(l.at("index").get<std::uint32_t>())] = poseFromJson(l.at("pose"));
  }
  const auto& factors = j.at("factors");
  r.inlier_flags.assign(factors.size(), true);
  for (const auto& f : factors) {
    const auto id = f.at("id").get<std::size_t>();
    if (id >= factors.size()) throw std::invalid_argument("report factor id out of range");
    r.inlier_flags[id] = f.value("inlier", true);
    if (f.contains("covariance")) {
      if (r.final_covariances.size() < factors.size()) r.final_covariances.resize(factors.size());
      r.final_covariances[id] = DiagonalNoise(vec6FromJson(f.at("covariance")));
    }
  }
  return r;
}

json intrinsicsToJson(const CameraIntrinsics& k) {
  return json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

CameraIntrinsics intrinsicsFromJson(const json& j) {
  CameraIntrinsics k;
  k.fx = j.value("fx", k.fx);
  k.fy = j.value("fy", k.fy);
  k.cx = j.value("cx", k.cx);
  k.cy = j.value("cy", k.cy);
  k.width = j.value("width", k.width);
  k.height = j.value("height", k.height);
  k.validate();
  return k;
}

json scenarioToJson(const ScenarioConfig& c) {
  return json{{"num_cameras", c.num_cameras},
              {"num_landmarks", c.num_landmarks},
              {"radius", c.radius},
              {"arc", c.arc},
              {"landmark_spread", c.landmark_spread},
              {"odometry_sigma", vec6ToJson(c.odometry_sigma)},
              {"measurement_sigma", vec6ToJson(c.measurement_sigma)},
              {"outlier_rate", c.outlier_rate},
              {"outlier_rotation_min", c.outlier_rotation_min},
              {"outlier_rotation_max", c.outlier_rotation_max},
              {"outlier_translation_min", c.outlier_translation_min},
              {"outlier_translation_max", c.outlier_translation_max},
              {"detection_rate", c.detection_rate},
              {"seed", c.seed},
              {"initial_measurement_variance", c.initial_measurement_variance},
              {"initial_odometry_variance", c.initial_odometry_variance},
              {"intrinsics", intrinsicsToJson(c.intrinsics)},
              {"object_dimensions", {c.object_dimensions.x(), c.object_dimensions.y(), c.object_dimensions.z()}}};
}

ScenarioConfig scenarioFromJson(const json& j) {
  static const char* known[] = {"num_cameras", "num_landmarks", "radius", "arc", "landmark_spread",
                                "odometry_sigma", "measurement_sigma", "outlier_rate",
                                "outlier_rotation_min", "outlier_rotation_max",
                                "outlier_translation_min", "outlier_translation_max", "detection_rate",
                                "seed", "initial_measurement_variance", "initial_odometry_variance",
                                "intrinsics", "object_dimensions", "name"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw std::invalid_argument("unknown scenario key '" + key + "'");
    }
  }
  ScenarioConfig c;
  c.num_cameras = j.value("num_cameras", c.num_cameras);
  c.num_landmarks = j.value("num_landmarks", c.num_landmarks);
  c.radius = j.value("radius", c.radius);
  c.arc = j.value("arc", c.arc);
  c.landmark_spread = j.value("landmark_spread", c.landmark_spread);
  if (j.contains("odometry_sigma")) c.odometry_sigma = vec6FromJson(j.at("odometry_sigma"));
  if (j.contains("measurement_sigma")) c.measurement_sigma = vec6FromJson(j.at("measurement_sigma"));
  c.outlier_rate = j.value("outlier_rate", c.outlier_rate);
  c.outlier_rotation_min = j.value("outlier_rotation_min", c.outlier_rotation_min);
  c.outlier_rotation_max = j.value("outlier_rotation_max", c.outlier_rotation_max);
  c.outlier_translation_min = j.value("outlier_translation_min", c.outlier_translation_min);
  c.outlier_translation_max = j.value("outlier_translation_max", c.outlier_translation_max);
  c.detection_rate = j.value("detection_rate", c.detection_rate);
  c.seed = j.value("seed", c.seed);
  c.initial_measurement_variance = j.value("initial_measurement_variance", c.initial_measurement_variance);
  c.initial_odometry_variance = j.value("initial_odometry_variance", c.initial_odometry_variance);
  if (j.contains("intrinsics")) c.intrinsics = intrinsicsFromJson(j.at("intrinsics"));
  if (j.contains("object_dimensions")) {
    const auto d = j.at("object_dimensions").get<std::vector<double>>();
    if (d.size() != 3) throw std::invalid_argument("object_dimensions needs 3 entries");
    c.object_dimensions = Eigen::Vector3d(d[0], d[1], d[2]);
  }
  c.validate();
  return c;
}

json modelsToJson(const std::map<std::uint32_t, CuboidModel>& models) {
  json out = json::object();
  for (const auto& [id, m] : models) {
    out[std::to_string(id)] = json{{"dimensions", {m.dimensions.x(), m.dimensions.y(), m.dimensions.z()}}};
  }
  return out;
}

std::map<std::uint32_t, CuboidModel> modelsFromJson(const json& j) {
  std::map<std::uint32_t, CuboidModel> models;
  for (const auto& [key, value] : j.items()) {
    std::size_t used = 0;
    const unsigned long id = std::stoul(key, &used);
    if (used != key.size()) throw std::invalid_argument("model key '" + key + "' is not an object id");
    const auto d = value.at("dimensions").get<std::vector<double>>();
    if (d.size() != 3) throw std::invalid_argument("model dimensions need 3 entries");
    models[static_cast<std::uint32_t>(id)] =
        CuboidModel::FromDimensions(static_cast<std::uint32_t>(id), Eigen::Vector3d(d[0], d[1], d[2]));
  }
  return models;
}

json groundTruthToJson(const GroundTruth& truth, const PoseGraph& graph) {
  json cams = json::array();
  json lms = json::array();
  for (const auto& [key, pose] : truth.poses) {
    json entry{{"index", key.index}, {"pose", poseToJson(pose)}};
    (key.kind == VariableKind::Camera ? cams : lms).push_back(entry);
  }
  json meas = json::array();
  for (const auto& f : graph.landmarkFactors()) {
    meas.push_back(json{{"id", f.id},
                        {"frame", f.camera.index},
                        {"landmark", f.landmark.index},
                        {"outlier", f.id < truth.outlier_flags.size() && truth.outlier_flags[f.id]}});
  }
  return json{{"cameras", cams}, {"landmarks", lms}, {"measurements", meas}};
}

GroundTruth groundTruthFromJson(const json& j) {
  GroundTruth truth;
  for (const auto& c : j.at("cameras")) {
    truth.poses[VariableKey::Camera(c.at("index").get<std::uint32_t>())] = poseFromJson(c.at("pose"));
  }
  for (const auto& l : j.at("landmarks")) {
    truth.poses[VariableKey::Landmark(l.at("index").get<std::uint32_t>())] = poseFromJson(l.at("pose"));
  }
  const auto& meas = j.at("measurements");
  truth.outlier_flags.assign(meas.size(), false);
  for (const auto& m : meas) {
    const auto id = m.at("id").get<std::size_t>();
    if (id >= meas.size()) throw std::invalid_argument("sidecar measurement id out of range");
    truth.outlier_flags[id] = m.at("outlier").get<bool>();
  }
  return truth;
}

json labelToJson(const PseudoLabel& label) {
  json kps = json::array();
  for (const auto& k : label.keypoints) kps.push_back({k.x(), k.y()});
  return json{{"frame", label.frame},
              {"object", label.object},
              {"pose", poseToJson(label.pose)},
              {"keypoints", kps},
              {"source", std::string(toString(label.source))},
              {"score", label.score}};
}

PseudoLabel labelFromJson(const json& j) {
  PseudoLabel label;
  label.frame = j.at("frame").get<std::uint32_t>();
  label.object = j.at("object").get<std::uint32_t>();
  label.pose = poseFromJson(j.at("pose"));
  const auto& kps = j.at("keypoints");
  if (kps.size() != 9) throw std::invalid_argument("label needs 9 keypoints");
  for (std::size_t i = 0; i < 9; ++i) {
    label.keypoints[i] = Eigen::Vector2d(kps[i].at(0).get<double>(), kps[i].at(1).get<double>());
  }
  label.source = labelSourceFromString(j.at("source").get<std::string>());
  label.score = j.at("score").get<double>();
  return label;
}

std::string writeLabels(const std::vector<PseudoLabel>& labels) {
  std::string out;
  for (const auto& l : labels) {
    out += labelToJson(l).dump();
    out += '\n';
  }
  return out;
}

std::vector<PseudoLabel> parseLabels(std::string_view text) {
  std::vector<PseudoLabel> labels;
  const auto lines = splitLines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (skippable(lines[n])) continue;
    try {
      labels.push_back(labelFromJson(json::parse(lines[n])));
    } catch (const std::exception& e) {
      throw ParseError(n + 1, e.what());
    }
  }
  return labels;
}

}  // namespace actpgo::io

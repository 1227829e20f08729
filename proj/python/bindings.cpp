#include "actpgo/act.hpp"
#include "actpgo/io.hpp"
#include "actpgo/pipeline.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace actpgo;

namespace {

nlohmann::json toJson(const py::handle& obj) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::object fromJson(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

ScenarioConfig configFrom(const py::object& config) {
  return config.is_none() ? ScenarioConfig{} : io::scenarioFromJson(toJson(config));
}

std::vector<Eigen::Matrix4d> poses(const Values& values, VariableKind kind) {
  std::vector<Eigen::Matrix4d> out;
  for (const auto& [k, p] : values) {
    if (k.kind == kind) out.push_back(p.matrix());
  }
  return out;
}

Trajectory trajectory(const std::vector<Eigen::Matrix4d>& poses) {
  Trajectory t;
  for (std::size_t i = 0; i < poses.size(); ++i) t.push_back({static_cast<double>(i), Pose::FromMatrix(poses[i])});
  return t;
}

struct PyScenario {
  ScenarioConfig config;
  Scenario scenario;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pose-graph optimization with automatic covariance tuning";

  py::register_exception<io::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<GraphError>(m, "GraphError", PyExc_ValueError);

  m.def("exp", [](const Vector6& xi) { return exp(xi).matrix(); }, py::arg("xi"),
        "4x4 pose of a twist [omega; rho]");
  m.def("log", [](const Eigen::Matrix4d& T) { return Vector6(logPrincipal(Pose::FromMatrix(T))); }, py::arg("T"));
  m.def("chi2_critical", &chi2Critical, py::arg("dof"), py::arg("confidence"));
  m.def("covariance_update", [](const Vector6& e, double lp) { return Vector6(covarianceUpdate(e, lp).variances()); },
        py::arg("residual"), py::arg("lambda_prime") = 10.0);
  m.def("method_names", &methodNames);

  py::class_<PoseGraph>(m, "Graph")
      .def_static("from_g2o", [](const std::string& text) { return io::parseGraph(text); }, py::arg("text"))
      .def("to_g2o", [](const PoseGraph& g) { return io::writeGraph(g); })
      .def_property_readonly("num_cameras", &PoseGraph::numCameras)
      .def_property_readonly("num_landmarks", &PoseGraph::numLandmarks)
      .def_property_readonly("num_measurements", [](const PoseGraph& g) { return g.landmarkFactors().size(); })
      .def("loss", [](const PoseGraph& g) { return graphLoss(g); })
      .def("camera_poses", [](const PoseGraph& g) { return poses(g.values(), VariableKind::Camera); })
      .def("landmark_poses", [](const PoseGraph& g) { return poses(g.values(), VariableKind::Landmark); });

  py::class_<PyScenario>(m, "Scenario")
      .def_property_readonly("graph", [](const PyScenario& s) { return s.scenario.graph; })
      .def_property_readonly("outlier_flags", [](const PyScenario& s) { return s.scenario.truth.outlier_flags; })
      .def_property_readonly("config", [](const PyScenario& s) { return fromJson(io::scenarioToJson(s.config)); })
      .def("true_camera_poses", [](const PyScenario& s) { return poses(s.scenario.truth.poses, VariableKind::Camera); })
      .def("true_landmark_poses",
           [](const PyScenario& s) { return poses(s.scenario.truth.poses, VariableKind::Landmark); });

  m.def(
      "object_slam_config",
      [](double outlier_rate, std::uint64_t seed) {
        return fromJson(io::scenarioToJson(ScenarioConfig::ObjectSlam(outlier_rate, seed)));
      },
      py::arg("outlier_rate") = 0.0, py::arg("seed") = 0,
      "Scenario settings with accurate odometry and gross outliers, as a dict");
  m.def(
      "generate",
      [](const py::object& config) {
        PyScenario s{configFrom(config), {}};
        s.scenario = generate(s.config);
        return s;
      },
      py::arg("config") = py::none(), "Simulate a scenario; `config` is a dict of scenario settings");

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("method", &SolveReport::method)
      .def_readonly("initial_loss", &SolveReport::initial_loss)
      .def_readonly("loss_trace", &SolveReport::loss_trace)
      .def_readonly("inlier_flags", &SolveReport::inlier_flags)
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("message", &SolveReport::message)
      .def_property_readonly("termination", [](const SolveReport& r) { return std::string(toString(r.termination)); })
      .def("camera_poses", [](const SolveReport& r) { return poses(r.estimates, VariableKind::Camera); })
      .def("landmark_poses", [](const SolveReport& r) { return poses(r.estimates, VariableKind::Landmark); })
      .def("final_variances", [](const SolveReport& r) {
        std::vector<Vector6> out;
        for (const auto& n : r.final_covariances) out.push_back(n.variances());
        return out;
      });

  m.def(
      "solve",
      [](const PoseGraph& graph, const std::string& method, double lambda_prime, double chi2_confidence,
         int max_outer_iterations, std::optional<double> kernel_parameter) {
        MethodOptions o;
        o.act.lambda_prime = lambda_prime;
        o.act.chi2_confidence = chi2_confidence;
        o.act.max_outer_iterations = max_outer_iterations;
        o.kernel_parameter = kernel_parameter;
        py::gil_scoped_release release;
        return runMethod(method, graph, o);
      },
      py::arg("graph"), py::arg("method") = "act", py::arg("lambda_prime") = 10.0, py::arg("chi2_confidence") = 0.95,
      py::arg("max_outer_iterations") = 10, py::arg("kernel_parameter") = py::none());

  m.def(
      "ate",
      [](const std::vector<Eigen::Matrix4d>& estimate, const std::vector<Eigen::Matrix4d>& truth, bool align) {
        return ateRmse(trajectory(estimate), trajectory(truth), align);
      },
      py::arg("estimate"), py::arg("truth"), py::arg("align") = false);

  m.def(
      "evaluate",
      [](const PyScenario& s, const SolveReport& r) {
        const SeedMetrics m = evaluateScenario(s.scenario, s.config, r);
        py::dict d;
        d["ate"] = m.ate;
        d["obj_translation"] = m.obj_translation;
        d["obj_orientation"] = m.obj_orientation;
        d["add"] = m.add;
        d["label_px"] = m.label_px;
        d["true_inliers"] = m.true_inliers;
        d["flagged_inliers"] = m.flagged_inliers;
        d["correct_inliers"] = m.correct_inliers;
        return d;
      },
      py::arg("scenario"), py::arg("report"), "Trajectory, object, inlier and pseudo-label metrics");

  m.def(
      "bench_csv",
      [](const std::map<std::string, py::object>& scenarios, std::vector<std::string> methods, int seeds, int jobs) {
        std::vector<NamedScenario> named;
        for (const auto& [name, config] : scenarios) named.push_back({name, configFrom(config)});
        if (methods.empty()) methods = methodNames();
        BenchOptions o;
        o.seeds = seeds;
        o.jobs = jobs;
        py::gil_scoped_release release;
        return benchCsv(bench(named, methods, o));
      },
      py::arg("scenarios"), py::arg("methods") = std::vector<std::string>{}, py::arg("seeds") = 10,
      py::arg("jobs") = 1);
}

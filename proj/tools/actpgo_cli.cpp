#include "actpgo/io.hpp"
#include "actpgo/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace actpgo;

namespace {

json readJson(const std::string& path) {
  try {
    return json::parse(io::readFile(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void writeJson(const std::string& path, const json& j) { io::writeFile(path, j.dump(2) + "\n"); }

std::vector<std::string> splitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct SimulateArgs {
  std::string config, out, gt, sidecar, models_out, intrinsics_out;
  std::optional<std::uint64_t> seed;
};

void simulate(const SimulateArgs& a) {
  ScenarioConfig config = a.config.empty() ? ScenarioConfig{} : io::scenarioFromJson(readJson(a.config));
  if (a.seed) config.seed = *a.seed;
  const Scenario s = generate(config);
  io::writeFile(a.out, io::writeGraph(s.graph));
  if (!a.gt.empty()) {
    io::writeFile(a.gt, io::writeTrajectory(io::cameraTrajectory(s.truth.poses)));
    writeJson(a.sidecar.empty() ? a.gt + ".json" : a.sidecar, io::groundTruthToJson(s.truth, s.graph));
  }
  if (!a.models_out.empty()) writeJson(a.models_out, io::modelsToJson(scenarioModels(config)));
  if (!a.intrinsics_out.empty()) writeJson(a.intrinsics_out, io::intrinsicsToJson(config.intrinsics));
}

struct OptimizeArgs {
  std::string graph, method = "act", out, report;
  std::optional<double> lambda_prime, chi2_conf, kernel_param, tol;
  std::optional<int> max_outer, max_iters;
};

void optimize(const OptimizeArgs& a) {
  const PoseGraph graph = io::parseGraph(io::readFile(a.graph));
  MethodOptions options;
  if (a.lambda_prime) options.act.lambda_prime = *a.lambda_prime;
  if (a.chi2_conf) options.act.chi2_confidence = *a.chi2_conf;
  if (a.max_outer) {
    options.act.max_outer_iterations = *a.max_outer;
    options.irls.max_outer_iterations = *a.max_outer;
  }
  if (a.tol) {
    options.act.relative_tolerance = *a.tol;
    options.irls.relative_tolerance = *a.tol;
  }
  if (a.max_iters) options.lm.max_iterations = *a.max_iters;
  options.kernel_parameter = a.kernel_param;
  const SolveReport report = runMethod(a.method, graph, options);
  if (report.termination == Termination::Failed) throw std::runtime_error("solver failed: " + report.message);
  if (!a.out.empty()) io::writeFile(a.out, io::writeTrajectory(io::cameraTrajectory(report.estimates)));
  if (!a.report.empty()) writeJson(a.report, io::reportToJson(report, graph));
}

struct LabelArgs {
  std::string graph, report, models, intrinsics, reference, out;
  double s_pgo = 0.9, s_in = 0.3, chi2_conf = 0.95;
  bool fallback = false;
  std::optional<double> max_outlier_rate;
};

void label(const LabelArgs& a) {
  const PoseGraph graph = io::parseGraph(io::readFile(a.graph));
  const SolveReport report = io::reportFromJson(readJson(a.report));
  const auto models = io::modelsFromJson(readJson(a.models));
  const CameraIntrinsics intrinsics = io::intrinsicsFromJson(readJson(a.intrinsics));
  const GroundTruth truth = io::groundTruthFromJson(readJson(a.reference));
  const GeometricScorer scorer(trueRelativePoses(truth), intrinsics, models);
  LabelOptions options;
  options.thresholds = {a.s_pgo, a.s_in, a.fallback};
  options.chi2_confidence = a.chi2_conf;
  options.max_outlier_rate = a.max_outlier_rate;
  const LabelBatch batch = generateLabels(graph, report, intrinsics, models, scorer, options);
  io::writeFile(a.out, io::writeLabels(batch.labels));
  if (batch.excluded) {
    std::cerr << json{{"warning", "sequence excluded"}, {"outlier_rate", batch.outlier_rate}}.dump() << "\n";
  }
}

struct EvaluateArgs {
  std::string est, gt, labels, reference, models, intrinsics, report, out, method_name = "estimate";
  bool align = false;
};

void evaluate(const EvaluateArgs& a) {
  EvaluateRow row;
  row.method = a.method_name;
  row.ate = ateRmse(io::parseTrajectory(io::readFile(a.est)), io::parseTrajectory(io::readFile(a.gt)), a.align);
  row.obj_trans = row.obj_ori = row.median_label_px = row.auc = std::nan("");

  std::optional<GroundTruth> truth;
  if (!a.reference.empty()) truth = io::groundTruthFromJson(readJson(a.reference));
  std::map<std::uint32_t, CuboidModel> models;
  if (!a.models.empty()) models = io::modelsFromJson(readJson(a.models));

  if (!a.report.empty()) {
    if (!truth) throw std::invalid_argument("--report needs --reference");
    const SolveReport report = io::reportFromJson(readJson(a.report));
    std::vector<double> trans, ori, add;
    for (const auto& [key, pose] : truth->poses) {
      if (key.kind != VariableKind::Landmark) continue;
      const auto it = report.estimates.find(key);
      if (it == report.estimates.end()) continue;
      const PoseError err = objectPoseError(it->second, pose);
      trans.push_back(err.translation);
      ori.push_back(err.rotation);
      if (auto m = models.find(key.index); m != models.end()) add.push_back(addError(m->second.keypoints, it->second, pose));
    }
    row.obj_trans = median(trans);
    row.obj_ori = median(ori);
    if (!add.empty()) row.auc = auc(accuracyCurve(add, kAddAucMax), kAddAucMax);
  }

  if (!a.labels.empty()) {
    if (!truth || models.empty() || a.intrinsics.empty()) {
      throw std::invalid_argument("--labels needs --reference, --models and --intrinsics");
    }
    const auto labels = io::parseLabels(io::readFile(a.labels));
    const auto reference = trueRelativePoses(*truth);
    const auto lookup = [&](std::uint32_t t, std::uint32_t j) -> std::optional<Pose> {
      const auto it = reference.find({t, j});
      if (it == reference.end()) return std::nullopt;
      return it->second;
    };
    row.median_label_px =
        labelPixelError(labels, lookup, io::intrinsicsFromJson(readJson(a.intrinsics)), models).median;
  }

  const std::string csv = evaluateCsv({row});
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    io::writeFile(a.out, csv);
  }
}

struct BenchArgs {
  std::string scenarios, methods = "all", out;
  int seeds = 50, jobs = 1;
  std::uint64_t base_seed = 0;
};

void runBench(const BenchArgs& a) {
  std::vector<NamedScenario> scenarios;
  if (!fs::is_directory(a.scenarios)) throw std::invalid_argument("'" + a.scenarios + "' is not a directory");
  for (const auto& entry : fs::directory_iterator(a.scenarios)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      const json j = readJson(entry.path().string());
      scenarios.push_back({j.value("name", entry.path().stem().string()), io::scenarioFromJson(j)});
    }
  }
  if (scenarios.empty()) throw std::invalid_argument("no scenario .json files in '" + a.scenarios + "'");
  const std::vector<std::string> methods = a.methods == "all" ? methodNames() : splitList(a.methods);
  BenchOptions options;
  options.seeds = a.seeds;
  options.jobs = a.jobs;
  options.base_seed = a.base_seed;
  const std::string csv = benchCsv(bench(scenarios, methods, options));
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    io::writeFile(a.out, csv);
  }
}

int fail(const std::string& type, const std::string& message, int code) {
  std::cerr << json{{"error", message}, {"type", type}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object-level pose graph optimization with automatic covariance tuning"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic scenario");
  simulate_cmd->add_option("--config", sim.config, "Scenario JSON")->check(CLI::ExistingFile);
  simulate_cmd->add_option("--seed", sim.seed, "Overrides the config seed");
  simulate_cmd->add_option("--out", sim.out, "Graph output")->required();
  simulate_cmd->add_option("--gt", sim.gt, "Ground-truth camera trajectory");
  simulate_cmd->add_option("--sidecar", sim.sidecar, "Ground-truth JSON (default: <gt>.json)");
  simulate_cmd->add_option("--models-out", sim.models_out, "Object models JSON");
  simulate_cmd->add_option("--intrinsics-out", sim.intrinsics_out, "Camera intrinsics JSON");

  OptimizeArgs opt;
  auto* optimize_cmd = app.add_subcommand("optimize", "Optimize a pose graph");
  optimize_cmd->add_option("--graph", opt.graph)->required()->check(CLI::ExistingFile);
  optimize_cmd->add_option("--method", opt.method)
      ->check(CLI::IsMember(methodNames()))
      ->capture_default_str();
  optimize_cmd->add_option("--lambda-prime", opt.lambda_prime);
  optimize_cmd->add_option("--chi2-conf", opt.chi2_conf);
  optimize_cmd->add_option("--max-outer", opt.max_outer);
  optimize_cmd->add_option("--kernel-param", opt.kernel_param);
  optimize_cmd->add_option("--max-iters", opt.max_iters, "Inner LM iterations");
  optimize_cmd->add_option("--tol", opt.tol, "Outer relative tolerance");
  optimize_cmd->add_option("--out", opt.out, "Estimated camera trajectory");
  optimize_cmd->add_option("--report", opt.report, "Report JSON");

  LabelArgs lab;
  auto* label_cmd = app.add_subcommand("label", "Generate pseudo-labels");
  label_cmd->add_option("--graph", lab.graph)->required()->check(CLI::ExistingFile);
  label_cmd->add_option("--report", lab.report)->required()->check(CLI::ExistingFile);
  label_cmd->add_option("--models", lab.models)->required()->check(CLI::ExistingFile);
  label_cmd->add_option("--intrinsics", lab.intrinsics)->required()->check(CLI::ExistingFile);
  label_cmd->add_option("--reference", lab.reference, "Ground-truth JSON for the geometric scorer")
      ->required()
      ->check(CLI::ExistingFile);
  label_cmd->add_option("--out", lab.out)->required();
  label_cmd->add_option("--s-pgo", lab.s_pgo)->capture_default_str();
  label_cmd->add_option("--s-in", lab.s_in)->capture_default_str();
  label_cmd->add_option("--chi2-conf", lab.chi2_conf)->capture_default_str();
  label_cmd->add_flag("--fallback", lab.fallback, "Emit the lower-scoring pose when the higher one misses");
  label_cmd->add_option("--max-outlier-rate", lab.max_outlier_rate);

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compute metrics");
  evaluate_cmd->add_option("--est", ev.est)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--gt", ev.gt)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_flag("--align", ev.align, "Rigidly align before ATE");
  evaluate_cmd->add_option("--labels", ev.labels)->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--reference", ev.reference, "Ground-truth JSON")->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--models", ev.models)->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--intrinsics", ev.intrinsics)->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--report", ev.report)->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--method-name", ev.method_name)->capture_default_str();
  evaluate_cmd->add_option("--out", ev.out, "CSV output (default stdout)");

  BenchArgs be;
  auto* bench_cmd = app.add_subcommand("bench", "Compare methods over seeded scenarios");
  bench_cmd->add_option("--scenarios", be.scenarios, "Directory of scenario JSON files")->required();
  bench_cmd->add_option("--methods", be.methods, "Comma-separated list or 'all'")->capture_default_str();
  bench_cmd->add_option("--seeds", be.seeds)->capture_default_str();
  bench_cmd->add_option("--base-seed", be.base_seed)->capture_default_str();
  bench_cmd->add_option("--jobs", be.jobs)->capture_default_str();
  bench_cmd->add_option("--out", be.out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*simulate_cmd) simulate(sim);
    if (*optimize_cmd) optimize(opt);
    if (*label_cmd) label(lab);
    if (*evaluate_cmd) evaluate(ev);
    if (*bench_cmd) runBench(be);
  } catch (const io::ParseError& e) {
    std::cerr << json{{"error", e.what()}, {"type", "parse"}, {"line", e.line()}}.dump() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    return fail("invalid_argument", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
  return 0;
}

#include "actpgo/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace actpgo {

const std::vector<std::string>& methodNames() {
  static const std::vector<std::string> names{"lm", "huber", "cauchy", "gm", "l1", "cdce", "act"};
  return names;
}

SolveReport runMethod(const std::string& method, const PoseGraph& graph, const MethodOptions& options) {
  auto irls = [&](KernelKind kind) {
    RobustKernel kernel = RobustKernel::Default(kind);
    if (options.kernel_parameter) kernel.parameter = *options.kernel_parameter;
    return solveIrls(graph, kernel, options.lm, options.irls);
  };
  SolveReport report;
  if (method == "lm") {
    report = solveLm(graph, options.lm);
  } else if (method == "huber") {
    report = irls(KernelKind::Huber);
  } else if (method == "cauchy") {
    report = irls(KernelKind::Cauchy);
  } else if (method == "gm") {
    report = irls(KernelKind::GemanMcClure);
  } else if (method == "l1") {
    report = irls(KernelKind::L1);
  } else if (method == "cdce") {
    report = solveCdce(graph, options.act, options.lm);
  } else if (method == "act") {
    report = solveAct(graph, options.act, options.lm);
  } else {
    throw std::invalid_argument("unknown method '" + method + "'");
  }
  report.method = method;
  return report;
}

SeedMetrics evaluateScenario(const Scenario& scenario, const ScenarioConfig& config, const SolveReport& report,
                             const LabelOptions& label_options) {
  SeedMetrics m;
  Trajectory est, gt;
  for (const auto& [key, pose] : scenario.truth.poses) {
    if (key.kind != VariableKind::Camera) continue;
    est.push_back({static_cast<double>(key.index), report.estimates.at(key)});
    gt.push_back({static_cast<double>(key.index), pose});
  }
  m.ate = ateRmse(est, gt, false);

  const auto models = scenarioModels(config);
  for (const auto& [key, pose] : scenario.truth.poses) {
    if (key.kind != VariableKind::Landmark) continue;
    const Pose& lm = report.estimates.at(key);
    const PoseError err = objectPoseError(lm, pose);
    m.obj_translation.push_back(err.translation);
    m.obj_orientation.push_back(err.rotation);
    m.add.push_back(addError(models.at(key.index).keypoints, lm, pose));
  }

  const auto reference = trueRelativePoses(scenario.truth);
  const GeometricScorer scorer(reference, config.intrinsics, models);
  const LabelBatch batch = generateLabels(scenario.graph, report, config.intrinsics, models, scorer, label_options);
  const auto truth = [&](std::uint32_t t, std::uint32_t j) -> std::optional<Pose> {
    const auto it = reference.find({t, j});
    if (it == reference.end()) return std::nullopt;
    return it->second;
  };
  m.label_px = labelPixelError(batch.labels, truth, config.intrinsics, models).per_label;

  const auto& outliers = scenario.truth.outlier_flags;
  for (std::size_t k = 0; k < outliers.size(); ++k) {
    const bool actual = !outliers[k];
    const bool flagged = k < report.inlier_flags.size() && report.inlier_flags[k];
    m.true_inliers += actual ? 1 : 0;
    m.flagged_inliers += flagged ? 1 : 0;
    m.correct_inliers += (actual && flagged) ? 1 : 0;
  }
  return m;
}

BenchRow aggregate(const std::string& scenario, const std::string& method, const std::vector<SeedMetrics>& seeds) {
  BenchRow row;
  row.scenario = scenario;
  row.method = method;
  row.seeds = static_cast<int>(seeds.size());
  std::vector<double> ate, trans, ori, add, px;
  std::size_t true_in = 0, flagged = 0, correct = 0;
  for (const auto& s : seeds) {
    ate.push_back(s.ate);
    trans.insert(trans.end(), s.obj_translation.begin(), s.obj_translation.end());
    ori.insert(ori.end(), s.obj_orientation.begin(), s.obj_orientation.end());
    add.insert(add.end(), s.add.begin(), s.add.end());
    px.insert(px.end(), s.label_px.begin(), s.label_px.end());
    true_in += s.true_inliers;
    flagged += s.flagged_inliers;
    correct += s.correct_inliers;
  }
  row.ate_median = median(ate);
  row.ate_mean = ate.empty() ? std::nan("") : std::accumulate(ate.begin(), ate.end(), 0.0) / static_cast<double>(ate.size());
  row.obj_trans_median = median(trans);
  row.obj_ori_median = median(ori);
  row.median_label_px = median(px);
  row.auc = auc(accuracyCurve(add, kAddAucMax), kAddAucMax);
  row.inlier_precision = flagged ? static_cast<double>(correct) / static_cast<double>(flagged) : std::nan("");
  row.inlier_recall = true_in ? static_cast<double>(correct) / static_cast<double>(true_in) : std::nan("");
  return row;
}

std::vector<std::vector<std::vector<SeedMetrics>>> benchSeeds(const std::vector<NamedScenario>& scenarios,
                                                              const std::vector<std::string>& methods,
                                                              const BenchOptions& options) {
  if (options.seeds < 1) throw std::invalid_argument("bench: seeds must be >= 1");
  if (options.jobs < 1) throw std::invalid_argument("bench: jobs must be >= 1");
  for (const auto& m : methods) {
    if (std::find(methodNames().begin(), methodNames().end(), m) == methodNames().end()) {
      throw std::invalid_argument("unknown method '" + m + "'");
    }
  }
  const std::size_t S = scenarios.size();
  const std::size_t M = methods.size();
  const auto K = static_cast<std::size_t>(options.seeds);
  std::vector<std::vector<std::vector<SeedMetrics>>> out(
      S, std::vector<std::vector<SeedMetrics>>(M, std::vector<SeedMetrics>(K)));

  // One task per (scenario, seed); every task writes only its own slots.
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t task = next++; task < S * K; task = next++) {
      const std::size_t s = task / K;
      const std::size_t k = task % K;
      try {
        ScenarioConfig config = scenarios[s].config;
        config.seed = options.base_seed + k;
        const Scenario scenario = generate(config);
        for (std::size_t m = 0; m < M; ++m) {
          const SolveReport report = runMethod(methods[m], scenario.graph, options.method);
          out[s][m][k] = evaluateScenario(scenario, config, report, options.labels);
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(options.jobs), S * K);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<BenchRow> bench(const std::vector<NamedScenario>& scenarios, const std::vector<std::string>& methods,
                            const BenchOptions& options) {
  std::vector<std::size_t> order(scenarios.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scenarios[a].name < scenarios[b].name; });
  std::vector<NamedScenario> sorted;
  for (auto i : order) sorted.push_back(scenarios[i]);

  const auto seeds = benchSeeds(sorted, methods, options);
  std::vector<BenchRow> rows;
  for (std::size_t s = 0; s < sorted.size(); ++s) {
    for (std::size_t m = 0; m < methods.size(); ++m) rows.push_back(aggregate(sorted[s].name, methods[m], seeds[s][m]));
  }
  return rows;
}

std::string fixed(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

namespace {
constexpr const char* kLabelPxNote = "# label_px: mean keypoint distance per label, median over labels\n";
}

std::string benchCsv(const std::vector<BenchRow>& rows) {
  std::string out = kLabelPxNote;
  out += "scenario,method,seeds,ate_median,ate_mean,obj_trans_median,obj_ori_median,median_label_px,auc,"
         "inlier_precision,inlier_recall\n";
  for (const auto& r : rows) {
    out += r.scenario + ',' + r.method + ',' + std::to_string(r.seeds);
    for (double v : {r.ate_median, r.ate_mean, r.obj_trans_median, r.obj_ori_median, r.median_label_px, r.auc,
                     r.inlier_precision, r.inlier_recall}) {
      out += ',' + fixed(v);
    }
    out += '\n';
  }
  return out;
}

std::string evaluateCsv(const std::vector<EvaluateRow>& rows) {
  std::string out = kLabelPxNote;
  out += "method,ate,obj_trans,obj_ori,median_label_px,auc\n";
  for (const auto& r : rows) {
    out += r.method;
    for (double v : {r.ate, r.obj_trans, r.obj_ori, r.median_label_px, r.auc}) out += ',' + fixed(v);
    out += '\n';
  }
  return out;
}

}  // namespace actpgo

#pragma once

#include "actpgo/act.hpp"
#include "actpgo/eval.hpp"
#include "actpgo/labeling.hpp"
#include "actpgo/sim.hpp"
#include "actpgo/solvers.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace actpgo {

struct MethodOptions {
  LmConfig lm;
  ActConfig act;
  IrlsConfig irls;
  std::optional<double> kernel_parameter;  // overrides the kernel's default width
};

/// lm, huber, cauchy, gm, l1, cdce, act
const std::vector<std::string>& methodNames();

/// Throws std::invalid_argument on an unknown method.
SolveReport runMethod(const std::string& method, const PoseGraph& graph, const MethodOptions& options = {});

/// Threshold of the ADD accuracy curve, m.
inline constexpr double kAddAucMax = 0.1;

struct SeedMetrics {
  double ate = 0.0;
  std::vector<double> obj_translation;  // per landmark, m
  std::vector<double> obj_orientation;  // per landmark, rad
  std::vector<double> add;              // per landmark, m
  std::vector<double> label_px;         // per emitted label
  // inlier class counts against the simulator's outlier flags
  std::size_t true_inliers = 0;
  std::size_t flagged_inliers = 0;
  std::size_t correct_inliers = 0;
};

/// Metrics of one solve on a simulated scenario. Labels are generated with
/// the geometric scorer referenced to ground truth.
SeedMetrics evaluateScenario(const Scenario& scenario, const ScenarioConfig& config,
                             const SolveReport& report, const LabelOptions& label_options = {});

struct NamedScenario {
  std::string name;
  ScenarioConfig config;
};

struct BenchRow {
  std::string scenario;
  std::string method;
  int seeds = 0;
  double ate_median = 0.0;
  double ate_mean = 0.0;
  double obj_trans_median = 0.0;
  double obj_ori_median = 0.0;
  double median_label_px = 0.0;
  double auc = 0.0;
  double inlier_precision = 0.0;
  double inlier_recall = 0.0;
};

struct BenchOptions {
  int seeds = 50;
  std::uint64_t base_seed = 0;
  int jobs = 1;
  MethodOptions method;
  LabelOptions labels;
};

/// Seed i of every scenario uses config.seed = base_seed + i. Rows come back
/// sorted by (scenario, method order); the result does not depend on `jobs`.
std::vector<BenchRow> bench(const std::vector<NamedScenario>& scenarios, const std::vector<std::string>& methods,
                            const BenchOptions& options);

/// Seed-level metrics of `bench`, indexed [scenario][method][seed].
std::vector<std::vector<std::vector<SeedMetrics>>> benchSeeds(const std::vector<NamedScenario>& scenarios,
                                                              const std::vector<std::string>& methods,
                                                              const BenchOptions& options);

BenchRow aggregate(const std::string& scenario, const std::string& method,
                   const std::vector<SeedMetrics>& seeds);

/// Fixed-precision CSV with a leading comment line.
std::string benchCsv(const std::vector<BenchRow>& rows);

struct EvaluateRow {
  std::string method;
  double ate = 0.0;
  double obj_trans = 0.0;
  double obj_ori = 0.0;
  double median_label_px = 0.0;
  double auc = 0.0;
};

std::string evaluateCsv(const std::vector<EvaluateRow>& rows);

/// %.6f, or "nan".
std::string fixed(double v);

}  // namespace actpgo

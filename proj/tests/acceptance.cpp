// One line per acceptance criterion; exits non-zero if any fails.
#include "actpgo/act.hpp"
#include "actpgo/io.hpp"
#include "actpgo/pipeline.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace actpgo;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << what << std::endl;
  if (!pass) ++failures;
}

void info(const std::string& what) { std::cout << "       info: " << what << std::endl; }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double ate(const SolveReport& r, const Scenario& s) {
  return ateRmse(io::cameraTrajectory(r.estimates), io::cameraTrajectory(s.truth.poses));
}

double medianOf(std::vector<double> v) { return median(std::move(v)); }

void monotoneLoss() {
  const auto start = std::chrono::steady_clock::now();
  int runs = 0, violations = 0;
  double worst = 0.0;
  const double rates[] = {0.0, 0.1, 0.3};
  for (int i = 0; i < 100; ++i) {
    ScenarioConfig c;
    c.outlier_rate = rates[i % 3];
    c.seed = static_cast<std::uint64_t>(i);
    const SolveReport r = solveAct(generate(c).graph);
    double prev = r.initial_loss;
    for (double l : r.loss_trace) {
      const double rise = (l - prev) / std::max(std::abs(prev), 1e-300);
      worst = std::max(worst, rise);
      violations += rise > 1e-9;
      prev = l;
    }
    ++runs;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(1, violations == 0 && seconds < 60.0,
         "joint loss non-increasing on " + std::to_string(runs) + " ACT runs (T=20, N=3, 0/10/30% outliers): " +
             std::to_string(violations) + " violations, worst relative rise " + fmt("%.2e", worst) + ", " +
             fmt("%.1f s", seconds));
}

void closedFormOptimality() {
  oracle::Rng rng(2024);
  double worst = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const double lambda_prime = rng.uniform(0.5, 30.0);
    const double lambda = 1.0 / (lambda_prime * lambda_prime);
    Tangent e;
    for (int k = 0; k < 6; ++k) e[k] = rng.normal() * std::pow(10.0, rng.uniform(-3.0, 0.5));
    const DiagonalNoise s = covarianceUpdate(e, lambda_prime);
    for (int k = 0; k < 6; ++k) {
      auto contribution = [&](double x) { return e[k] * e[k] / x + lambda * x; };
      const double hi = 10.0 * std::abs(e[k]) * lambda_prime + 1.0;
      const double sg = oracle::goldenSection(contribution, 1e-12, hi);
      worst = std::max(worst, contribution(s.variance(k)) - contribution(sg));
    }
  }
  report(2, worst < 1e-8,
         "closed-form covariance update vs golden-section oracle on 1000 residuals: worst excess " +
             fmt("%.2e", worst));
}

void l1Equivalence() {
  double worst = 0.0;
  bool lengths = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ScenarioConfig c;
    c.outlier_rate = 0.1;
    c.seed = seed;
    ActConfig a;
    a.rule = CovarianceRule::Isotropic;
    a.chi2_gating = false;
    a.relative_tolerance = 0.0;
    a.max_outer_iterations = 8;
    PoseGraph g = generate(c).graph;
    for (auto& f : g.mutableLandmarkFactors()) f.noise = DiagonalNoise::Isotropic(a.lambda_prime * a.lambda_prime / 6.0);
    IrlsConfig ic;
    ic.max_outer_iterations = a.max_outer_iterations;
    ic.relative_tolerance = 0.0;
    const SolveReport act = solveAct(g, a);
    const SolveReport l1 = solveIrls(g, RobustKernel::Default(KernelKind::L1), {}, ic);
    if (act.iterates.size() != l1.iterates.size() || act.iterates.empty()) {
      lengths = false;
      continue;
    }
    for (std::size_t i = 0; i < act.iterates.size(); ++i) {
      for (const auto& [k, p] : act.iterates[i]) {
        worst = std::max(worst, logPrincipal(between(p, l1.iterates[i].at(k))).norm());
      }
    }
  }
  report(3, lengths && worst < 1e-6,
         "isotropic ACT vs L1-IRLS on 20 graphs, every outer iterate: worst tangent gap " + fmt("%.2e", worst));
}

void gateQuality() {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Scenario s = generate(ScenarioConfig::ObjectSlam(0.3, seed));
    const SolveReport r = solveAct(s.graph);
    for (std::size_t k = 0; k < r.inlier_flags.size(); ++k) {
      const bool truth_inlier = !s.truth.outlier_flags[k];
      if (r.inlier_flags[k]) {
        (truth_inlier ? tp : fp)++;
      } else {
        (truth_inlier ? fn : tn)++;
      }
    }
  }
  const double precision = double(tp) / double(tp + fp), recall = double(tp) / double(tp + fn);
  report(4, precision >= 0.9 && recall >= 0.9,
         "chi-square gate on 50 graphs with 30% gross outliers: inlier precision " + fmt("%.3f", precision) +
             ", recall " + fmt("%.3f", recall));
  info("outlier class precision " + fmt("%.3f", double(tn) / double(tn + fn)) + ", recall " +
       fmt("%.3f", double(tn) / double(tn + fp)));
}

struct Comparison {
  std::vector<double> act, lm;
  int act_better = 0;
  int within_10pct = 0;
};

Comparison compare(double rate, bool preset) {
  Comparison c;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ScenarioConfig config = ScenarioConfig::ObjectSlam(rate, seed);
    if (!preset) {
      config = ScenarioConfig{};
      config.outlier_rate = rate;
      config.seed = seed;
    }
    const Scenario s = generate(config);
    const double a = ate(solveAct(s.graph), s), l = ate(solveLm(s.graph), s);
    c.act.push_back(a);
    c.lm.push_back(l);
    c.act_better += a < l;
    c.within_10pct += a <= 1.1 * l;
  }
  return c;
}

void robustness() {
  const Comparison c = compare(0.3, true);
  const double ma = medianOf(c.act), ml = medianOf(c.lm);
  report(5, c.act_better >= 45 && ma < 0.5 * ml,
         "30% outliers, 50 seeds: ACT ATE < LM ATE on " + std::to_string(c.act_better) + "/50, median ACT " +
             fmt("%.4f", ma) + " m vs LM " + fmt("%.4f", ml) + " m");
  const Comparison d = compare(0.3, false);
  info("default simulator noise (odometry sigma 0.1): ACT better on " + std::to_string(d.act_better) +
       "/50, median ACT " + fmt("%.4f", medianOf(d.act)) + " m vs LM " + fmt("%.4f", medianOf(d.lm)) + " m");
}

void nonDegradation() {
  const Comparison c = compare(0.0, true);
  const double ma = medianOf(c.act), ml = medianOf(c.lm);
  report(6, ma <= 1.1 * ml,
         "clean graphs, 50 seeds: median ACT ATE " + fmt("%.4f", ma) + " m <= 1.1 x median LM " + fmt("%.4f", ml) +
             " m");
  info("per seed, ACT <= 1.1 x LM on " + std::to_string(c.within_10pct) + "/50");
  const Comparison d = compare(0.0, false);
  info("default simulator noise: median ACT " + fmt("%.4f", medianOf(d.act)) + " m vs LM " +
       fmt("%.4f", medianOf(d.lm)) + " m, per seed within 1.1x on " + std::to_string(d.within_10pct) + "/50");
}

void numericalKernels() {
  oracle::Rng rng(7);
  double roundtrip = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Pose p = rng.pose(3.1);
    roundtrip = std::max(roundtrip, (oracle::toMatrix(exp(log(p))) - oracle::toMatrix(p)).norm());
  }

  const double h = 1e-6;
  double jac = 0.0;
  for (int i = 0; i < 500; ++i) {
    const Pose a = rng.pose(), b = rng.pose();
    const Pose m = between(a, b) * rng.pose(1.5, 1.0);
    oracle::Vec6 v;
    for (int k = 0; k < 6; ++k) v[k] = rng.uniform(0.01, 2.0);
    const DiagonalNoise noise(v);
    const bool odometry = i % 2 == 0;
    const VariableKey kb = odometry ? VariableKey::Camera(1) : VariableKey::Landmark(0);
    const Values values{{VariableKey::Camera(0), a}, {kb, b}};
    const LinearizedFactor lf =
        odometry ? linearizeOdometry(OdometryFactor{VariableKey::Camera(0), kb, m, noise}, values)
                 : linearizeLandmark(LandmarkFactor{VariableKey::Camera(0), kb, m, noise, 0}, values);
    const oracle::Mat4 A = oracle::toMatrix(a), B = oracle::toMatrix(b), M = oracle::toMatrix(m);
    for (std::size_t slot = 0; slot < 2; ++slot) {
      Matrix6 fd;
      for (int k = 0; k < 6; ++k) {
        oracle::Vec6 d = oracle::Vec6::Zero();
        d[k] = h;
        auto residual = [&](const oracle::Vec6& delta) {
          const oracle::Mat4 P = oracle::expm(delta);
          return slot == 0 ? oracle::logm(M.inverse() * (A * P).inverse() * B)
                           : oracle::logm(M.inverse() * A.inverse() * (B * P));
        };
        fd.col(k) = noise.sqrtInformation().asDiagonal() * ((residual(d) - residual(-d)) / (2 * h));
      }
      jac = std::max(jac, (lf.jacobians[slot] - fd).norm() / fd.norm());
    }
  }

  const double critical = chi2Critical(6, 0.95), quadrature = oracle::chi2Quantile(6, 0.95);
  const double chi2_gap = std::abs(critical - quadrature);
  report(7, roundtrip < 1e-9 && jac < 1e-5 && chi2_gap < 1e-4,
         "exp/log roundtrip " + fmt("%.1e", roundtrip) + "; Jacobian vs central differences on 500 factors " +
             fmt("%.1e", jac) + "; chi2(6, 0.95) = " + fmt("%.6f", critical) + " vs quadrature " +
             fmt("%.6f", quadrature));
}

int sh(const std::string& cmd) { return std::system((cmd + " >/dev/null").c_str()); }

void pipeline(const fs::path& dir) {
  const std::string cli = ACTPGO_CLI;
  auto p = [&](const char* name) { return (dir / name).string(); };
  bool ok = true;
  std::vector<double> medians;
  double selfcheck = 0.0;
  std::size_t labels = 0;
  for (std::uint64_t seed = 0; seed < 5 && ok; ++seed) {
    io::writeFile(p("scenario.json"), io::scenarioToJson(ScenarioConfig::ObjectSlam(0.2, seed)).dump());
    ok = sh(cli + " simulate --config " + p("scenario.json") + " --out " + p("g.g2o") + " --gt " + p("gt.txt") +
            " --models-out " + p("models.json") + " --intrinsics-out " + p("k.json")) == 0 &&
         sh(cli + " optimize --graph " + p("g.g2o") + " --method act --out " + p("est.txt") + " --report " +
            p("report.json")) == 0 &&
         sh(cli + " label --graph " + p("g.g2o") + " --report " + p("report.json") + " --models " +
            p("models.json") + " --intrinsics " + p("k.json") + " --reference " + p("gt.txt.json") +
            " --s-pgo 0.9 --s-in 0.3 --out " + p("labels.jsonl")) == 0 &&
         sh(cli + " evaluate --est " + p("est.txt") + " --gt " + p("gt.txt") + " --labels " + p("labels.jsonl") +
            " --reference " + p("gt.txt.json") + " --models " + p("models.json") + " --intrinsics " + p("k.json") +
            " --out " + p("eval.csv")) == 0;
    if (!ok) break;
    std::istringstream csv(io::readFile(p("eval.csv")));
    std::string line, header, row;
    while (std::getline(csv, line)) {
      if (line.empty() || line[0] == '#') continue;
      (header.empty() ? header : row) = line;
    }
    std::vector<std::string> names, values;
    for (auto [src, dst] : {std::pair{&header, &names}, std::pair{&row, &values}}) {
      std::istringstream in(*src);
      std::string cell;
      while (std::getline(in, cell, ',')) dst->push_back(cell);
    }
    const auto at = std::find(names.begin(), names.end(), "median_label_px") - names.begin();
    medians.push_back(std::strtod(values.at(static_cast<std::size_t>(at)).c_str(), nullptr));

    const auto models = io::modelsFromJson(nlohmann::json::parse(io::readFile(p("models.json"))));
    const auto k = io::intrinsicsFromJson(nlohmann::json::parse(io::readFile(p("k.json"))));
    for (const auto& l : io::parseLabels(io::readFile(p("labels.jsonl")))) {
      const Keypoints2d kp = projectCuboid(l.pose, k, models.at(l.object));
      for (int i = 0; i < 9; ++i) selfcheck = std::max(selfcheck, (kp[i] - l.keypoints[i]).norm());
      ++labels;
    }
  }
  const double worst = medians.empty() ? INFINITY : *std::max_element(medians.begin(), medians.end());
  report(8, ok && medians.size() == 5 && worst < 5.0 && labels > 0 && selfcheck < 1e-9,
         "CLI simulate/optimize/label/evaluate at 20% outliers, 5 seeds: worst median label error " +
             fmt("%.2f px", worst) + ", " + std::to_string(labels) + " labels, worst reprojection mismatch " +
             fmt("%.1e px", selfcheck));
}

void formats() {
  bool g2o = true, tum = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ScenarioConfig c = seed % 2 ? ScenarioConfig::ObjectSlam(0.3, seed) : ScenarioConfig{};
    c.seed = seed;
    const Scenario s = generate(c);
    const std::string once = io::writeGraph(s.graph);
    g2o = g2o && io::writeGraph(io::parseGraph(once)) == once;
    const std::string traj = io::writeTrajectory(io::cameraTrajectory(s.graph.values()));
    tum = tum && io::writeTrajectory(io::parseTrajectory(traj)) == traj;
  }
  oracle::Rng rng(9);
  Trajectory random;
  for (int i = 0; i < 5000; ++i) random.push_back({0.001 * i, rng.pose(3.14, 50.0)});
  const std::string traj = io::writeTrajectory(random);
  tum = tum && io::writeTrajectory(io::parseTrajectory(traj)) == traj;
  const bool digits = io::formatNumber(1.0 / 3.0) == "0.333333333333";

  ScenarioConfig small = ScenarioConfig::ObjectSlam(0.3, 0);
  small.num_cameras = 10;
  const std::vector<NamedScenario> scenarios{{"dirty", small}, {"clean", ScenarioConfig::ObjectSlam(0.0, 0)}};
  BenchOptions options;
  options.seeds = 3;
  const std::string a = benchCsv(bench(scenarios, methodNames(), options));
  const std::string b = benchCsv(bench(scenarios, methodNames(), options));
  options.jobs = 3;
  const std::string c = benchCsv(bench(scenarios, methodNames(), options));
  const std::string header =
      "scenario,method,seeds,ate_median,ate_mean,obj_trans_median,obj_ori_median,median_label_px,auc,"
      "inlier_precision,inlier_recall\n";
  const bool schema = a.find("\n" + header) != std::string::npos &&
                      std::count(a.begin(), a.end(), '\n') == 2 + 2 * static_cast<long>(methodNames().size());
  report(9, g2o && tum && digits && schema && a == b && a == c,
         std::string("g2o roundtrip ") + (g2o ? "byte-stable" : "UNSTABLE") + ", TUM roundtrip " +
             (tum ? "byte-stable" : "UNSTABLE") + " (12 significant digits), bench CSV schema " +
             (schema ? "fixed" : "WRONG") + ", repeat/parallel runs " + (a == b && a == c ? "identical" : "DIFFER"));
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "actpgo_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  monotoneLoss();
  closedFormOptimality();
  l1Equivalence();
  gateQuality();
  robustness();
  nonDegradation();
  numericalKernels();
  pipeline(dir);
  formats();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}

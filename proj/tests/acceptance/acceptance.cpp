// Acceptance checks: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "netmech/experiments.hpp"
#include "netmech/verification.hpp"
#include "support/random_scenarios.hpp"

using namespace netmech;
using netmech::testing::random_profile;
using netmech::testing::random_scenario;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " (" << detail << ")"
            << std::endl;
  if (!pass) ++failures;
}

void closed_form() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial) % 19;
    const auto sc = random_scenario(rng, n);
    const auto theta = random_profile(rng, sc.dist, n);
    worst = std::max(worst, foc_residual(sc, theta, demand_solve(sc, theta)));
  }
  const double t = seconds_since(start);
  report(1, "closed-form demand satisfies the first-order conditions", worst <= 1e-9 && t < 5.0,
         "200 scenarios, max residual " + num(worst) + ", " + num(t) + " s");
}

void oracle_equivalence() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  const int instances = 60;
  for (int trial = 0; trial < instances; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial) % 2;
    const auto sc = random_scenario(rng, n);
    const auto theta = random_profile(rng, sc.dist, n);
    const auto x = demand_solve(sc, theta);
    for (auto m : {OracleMethod::GridRefine, OracleMethod::GradientAscent}) {
      worst = std::max(worst, (x - bruteforce_oracle(sc, theta, m)).lpNorm<Eigen::Infinity>());
    }
  }
  report(2, "demand matches direct maximisation of the virtual surplus", worst <= 1e-5,
         std::to_string(instances) + " instances, N in {2,3}, max deviation " + num(worst));
}

void sensitivity() {
  std::mt19937_64 rng(303);
  double min_entry = 0.0;
  double worst_rel = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial) % 9;
    const auto sc = random_scenario(rng, n);
    auto theta = random_profile(rng, sc.dist, n);
    const std::size_t i = static_cast<std::size_t>(trial) % n;
    const auto ii = static_cast<Eigen::Index>(i);
    const double h = 1e-4 * sc.dist.width();
    theta(ii) = std::clamp(theta(ii), sc.dist.lower() + h, sc.dist.upper() - h);
    const Eigen::MatrixXd dk = k_sensitivity(sc, theta, i);
    min_entry = std::min(min_entry, dk.minCoeff());
    auto up = theta;
    auto down = theta;
    up(ii) += h;
    down(ii) -= h;
    const Eigen::MatrixXd fd = (system_matrix(sc, up).inverse() - system_matrix(sc, down).inverse()) / (2.0 * h);
    worst_rel = std::max(worst_rel, (dk - fd).lpNorm<Eigen::Infinity>() / fd.lpNorm<Eigen::Infinity>());
  }
  report(3, "sensitivity of the inverse system matrix is nonnegative and matches finite differences",
         min_entry >= -1e-12 && worst_rel <= 1e-6,
         "100 instances, min entry " + num(min_entry) + ", max relative error " + num(worst_rel));
}

void incentive_properties() {
  const Scenario sc{make_network(NetworkKind::Complete, 5), MarketParams{}, TypeDistribution::uniform(0.4, 0.8)};
  const auto start = Clock::now();
  const auto curves = interim_curves(sc, 64, ExpectationEngine::quadrature(8));
  const auto rewards = reward_schedule(curves);
  const auto ic = verify_ic(sc, curves, rewards, 21, 201);
  const double t = seconds_since(start);
  report(4, "incentive compatibility on the 5-user complete graph",
         ic.ic_max_gain <= 1e-6 && ic.ic_argmax_ok && t < 60.0,
         "max gain " + num(ic.ic_max_gain) + ", argmax within one step: " + (ic.ic_argmax_ok ? "yes" : "no") +
             ", " + num(t) + " s");

  const auto ir = verify_ir(sc, curves, rewards, 21);
  report(5, "individual rationality binding at the lowest type",
         ir.ir_min >= -1e-8 && ir.ir_binding_gap <= 1e-8,
         "min utility " + num(ir.ir_min) + ", |U(lower)| " + num(ir.ir_binding_gap));

  const auto mono = verify_monotonicity(curves);
  report(6, "gamma is non-decreasing", mono.gamma_min_slope >= -1e-8,
         "min forward difference " + num(mono.gamma_min_slope) + " on the 64-point grid");
}

void fig4_ordering() {
  ExperimentSpec spec;
  const auto d = compute_fig4(spec);
  bool strict = true;
  std::string where = "21 types";
  for (std::size_t k = 1; k < d.thetas.size(); ++k) {
    if (!(d.complete_user[k] > d.star_center[k] && d.star_center[k] > d.star_branch[k])) {
      strict = false;
      where = "order broken at theta=" + num(d.thetas[k]);
      break;
    }
  }
  // Participation binds at the lowest type, so all three curves start at zero.
  const double low = std::max({std::abs(d.complete_user[0]), std::abs(d.star_center[0]), std::abs(d.star_branch[0])});
  report(7, "complete-graph user above star centre above star branch", strict && low <= 1e-8,
         where + "; common value at the lowest type " + num(low));
}

void table1_structure() {
  ExperimentSpec spec;
  const auto data = compute_table1(spec);
  std::vector<double> drop;
  for (const auto& r : data.rows) drop.push_back(r.drop());
  const bool pairs = std::abs(drop[2] - drop[3]) <= 1e-9 && std::abs(drop[1] - drop[4]) <= 1e-9;
  const bool order = drop[0] > drop[2] && drop[2] > drop[1];
  report(8, "untruthful-user impact ordering on the hub graph", pairs && order,
         "drops c1=" + num(drop[0]) + " c2=" + num(drop[1]) + " c3=" + num(drop[2]) + " c4=" + num(drop[3]) +
             " c5=" + num(drop[4]));
}

void scaling() {
  ExperimentSpec spec;
  const auto records = run_timing(spec, {100, 200, 400, 800});
  const double slope = loglog_slope(records, 4);
  const double t800 = records.back().wall_seconds;
  std::string detail = "slope " + num(slope) + ", medians";
  for (const auto& r : records) detail += " " + std::to_string(r.n) + ":" + num(r.wall_seconds) + "s";
  report(9, "solve time grows like N^3", slope >= 2.0 && slope <= 3.5 && t800 < 60.0, detail);
}

void estimator_consistency() {
  const Scenario sc{make_network(NetworkKind::Star, 3), MarketParams{}, TypeDistribution::uniform(0.4, 0.8)};
  const auto q = interim_curves(sc, 64, ExpectationEngine::quadrature(8));
  const auto mc = interim_curves(sc, 64, ExpectationEngine::monte_carlo(20000, 1));
  double worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < q.grid.size(); ++k) {
      const double z = std::abs(q.of(i).gamma[k] - mc.of(i).gamma[k]) / mc.of(i).gamma_se[k];
      worst = std::max(worst, z);
    }
  }
  report(10, "quadrature and Monte Carlo gamma agree", worst <= 3.0,
         "max deviation " + num(worst) + " standard errors over 3 users x 64 types");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI into dir; returns the exit code.
int cli(const std::string& args, const std::filesystem::path& dir) {
  const std::string cmd = std::string("\"") + NETMECH_CLI_PATH + "\" " + args + " --out \"" + dir.string() +
                          "\" > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

void determinism() {
  const std::string cfg = NETMECH_CONFIG_DIR;
  const std::vector<std::string> invocations{
      "verify --config " + cfg + "/complete5.json --seed 3",
      "rewards --config " + cfg + "/random_k.json --engine mc --mc-samples 2000 --seed 3",
      "verify --config " + cfg + "/hub3.json --engine mc --mc-samples 5000 --seed 3",
      "experiment fig6 --seed 3",
      "experiment table1 --seed 3",
  };
  const auto root = std::filesystem::temp_directory_path() / "netmech_acceptance_determinism";
  bool same = true;
  std::size_t files = 0;
  std::string where = "all outputs identical";
  for (std::size_t c = 0; c < invocations.size() && same; ++c) {
    std::vector<std::filesystem::path> dirs;
    for (const char* threads : {"1", "1", "4"}) {
      const auto dir = root / (std::to_string(c) + "_" + std::to_string(dirs.size()));
      std::filesystem::remove_all(dir);
      cli(invocations[c] + " --threads " + threads, dir);
      dirs.push_back(dir);
    }
    for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      const auto name = entry.path().filename();
      const auto ref = slurp(entry.path());
      if (ref.empty() || ref != slurp(dirs[1] / name) || ref != slurp(dirs[2] / name)) {
        same = false;
        where = "differs: " + invocations[c] + " -> " + name.string();
      }
    }
  }
  std::filesystem::remove_all(root);
  report(11, "CLI CSV outputs are byte-identical across reruns and thread counts", same && files > 0,
         std::to_string(files) + " CSV files compared; " + where);
}

} // namespace

int main() {
  closed_form();
  oracle_equivalence();
  sensitivity();
  incentive_properties();
  fig4_ordering();
  table1_structure();
  scaling();
  estimator_consistency();
  determinism();
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}

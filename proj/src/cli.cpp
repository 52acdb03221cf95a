#include "netmech/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "netmech/config.hpp"
#include "netmech/errors.hpp"
#include "netmech/experiments.hpp"
#include "netmech/verification.hpp"

namespace netmech {

namespace {

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  std::string engine;
  std::size_t mc_samples = 0;
  std::size_t quad_order = 0;
  std::size_t grid = 0;
  std::size_t report_grid = 0;
  std::size_t true_grid = 0;
  unsigned threads = 0;
  std::string out;
  std::string theta;
  std::vector<std::size_t> sizes;
  std::string experiment;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* engine_opt = nullptr;
  CLI::Option* mc_opt = nullptr;
  CLI::Option* quad_opt = nullptr;
  CLI::Option* grid_opt = nullptr;
  CLI::Option* report_opt = nullptr;
  CLI::Option* true_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Defaults < config file < NETMECH_SEED < --set < explicit flags.
Config resolve_config(const Options& o, bool config_required) {
  Config cfg = Config::object();
  if (!o.config.empty()) {
    cfg = load_config(o.config);
  } else if (config_required) {
    throw ConfigError("missing --config");
  }
  if (const char* env = std::getenv("NETMECH_SEED"); env != nullptr && *env != '\0') {
    cfg["seed"] = seed_from_config(cfg);
  }
  for (const auto& s : o.overrides) apply_override(cfg, s);
  if (o.seed_opt->count() > 0) cfg["seed"] = o.seed;
  if (o.engine_opt->count() > 0) cfg["engine"]["kind"] = o.engine;
  if (o.mc_opt->count() > 0) cfg["engine"]["mc_samples"] = o.mc_samples;
  if (o.quad_opt->count() > 0) cfg["engine"]["quad_order"] = o.quad_order;
  if (o.grid_opt->count() > 0) cfg["grid"] = o.grid;
  if (o.report_opt->count() > 0) cfg["report_grid"] = o.report_grid;
  if (o.true_opt->count() > 0) cfg["true_grid"] = o.true_grid;
  if (o.threads_opt->count() > 0) cfg["threads"] = o.threads;
  return cfg;
}

std::uint64_t resolved_seed(const Config& cfg) {
  if (cfg.contains("seed")) {
    if (!cfg.at("seed").is_number_unsigned()) throw ConfigError("seed must be an unsigned integer");
    return cfg.at("seed").get<std::uint64_t>();
  }
  return 1;
}

std::size_t grid_setting(const Config& cfg, const char* key, std::size_t fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_number_unsigned()) throw ConfigError(std::string(key) + " must be a positive integer");
  return cfg.at(key).get<std::size_t>();
}

TypeProfile parse_theta(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--theta entry '" + item + "' is not a number");
    }
  }
  if (values.empty()) throw ConfigError("--theta is empty");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& contents) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + (dir / name).string());
  f << contents;
}

Scenario validated_scenario(const Config& cfg, std::ostream& err) {
  Scenario sc = scenario_from_config(cfg, resolved_seed(cfg));
  try {
    require_valid(sc);
  } catch (const ValidationError&) {
    err << validate_regularity(sc.dist).message() << "\n" << validate_assumption2(sc).message() << "\n";
    throw;
  }
  return sc;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const Config cfg = resolve_config(o, true);
  const Scenario sc = scenario_from_config(cfg, resolved_seed(cfg));
  const auto reg = validate_regularity(sc.dist);
  const auto dom = validate_assumption2(sc);
  std::ostringstream msg;
  msg << "scenario: N=" << sc.size() << ", " << sc.dist.describe() << "\n"
      << reg.message() << "\n"
      << dom.message() << "\n";
  out << msg.str();
  if (!o.out.empty()) write_file(o.out, "summary.txt", msg.str());
  return reg.pass && dom.pass ? kExitOk : kExitConfigError;
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
  const Config cfg = resolve_config(o, true);
  const Scenario sc = validated_scenario(cfg, err);
  if (o.theta.empty()) throw ConfigError("solve requires --theta");
  const TypeProfile theta = parse_theta(o.theta);
  const DemandProfile x = DemandSolver(sc).solve(theta);
  std::ostringstream csv;
  csv << "user,theta,x\n";
  for (Eigen::Index i = 0; i < x.size(); ++i) csv << i << ',' << fmt(theta(i)) << ',' << fmt(x(i)) << '\n';
  out << csv.str();
  if (!o.out.empty()) {
    write_file(o.out, "solve.csv", csv.str());
    write_file(o.out, "summary.txt", "foc_residual " + fmt(foc_residual(sc, theta, x)) + "\n");
  }
  return kExitOk;
}

struct Computed {
  Scenario sc;
  InterimCurves curves;
  RewardSchedule rewards;
};

Computed compute(const Config& cfg, std::ostream& err) {
  Scenario sc = validated_scenario(cfg, err);
  const auto engine = engine_from_config(cfg, sc.size(), resolved_seed(cfg));
  auto curves = interim_curves(sc, grid_setting(cfg, "grid", 64), engine);
  auto rewards = reward_schedule(curves);
  std::map<std::size_t, std::vector<NegativeReward>> by_user;
  for (const auto& neg : negative_rewards(rewards)) by_user[neg.user].push_back(neg);
  for (const auto& [user, list] : by_user) {
    const auto worst = *std::min_element(list.begin(), list.end(),
                                         [](const NegativeReward& a, const NegativeReward& b) { return a.r < b.r; });
    err << "warning: user " << user << " has negative reward at " << list.size() << " grid types in ["
        << fmt(list.front().theta) << ", " << fmt(list.back().theta) << "], min r=" << fmt(worst.r)
        << " at theta=" << fmt(worst.theta) << "\n";
  }
  return {std::move(sc), std::move(curves), std::move(rewards)};
}

int cmd_rewards(const Options& o, std::ostream& out, std::ostream& err) {
  const Config cfg = resolve_config(o, true);
  const auto c = compute(cfg, err);
  std::ostringstream csv;
  write_curves_csv(csv, c.curves, c.rewards);
  std::ostringstream summary;
  summary << "engine " << c.curves.engine.describe() << "\n"
          << "cp_expected_utility " << fmt(cp_expected_utility(c.sc, c.curves, c.rewards)) << "\n"
          << "cp_virtual_surplus " << fmt(cp_virtual_surplus(c.sc, c.curves)) << "\n";
  if (o.out.empty()) {
    out << csv.str();
  } else {
    write_file(o.out, "rewards.csv", csv.str());
    write_file(o.out, "summary.txt", summary.str());
    out << summary.str();
  }
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  const Config cfg = resolve_config(o, true);
  const auto c = compute(cfg, err);
  const auto tol = Tolerances::for_curves(c.curves);
  const std::size_t true_grid = grid_setting(cfg, "true_grid", 21);
  auto report = verify_ic(c.sc, c.curves, c.rewards, true_grid, grid_setting(cfg, "report_grid", 201), tol);
  report.merge(verify_ir(c.sc, c.curves, c.rewards, true_grid, tol));
  report.merge(verify_monotonicity(c.curves, tol));
  const std::string summary = report.summary();
  out << summary;
  if (!o.out.empty()) {
    std::ostringstream verify_csv;
    report.write_csv(verify_csv);
    std::ostringstream curves_csv;
    write_curves_csv(curves_csv, c.curves, c.rewards);
    write_file(o.out, "verify.csv", verify_csv.str());
    write_file(o.out, "rewards.csv", curves_csv.str());
    write_file(o.out, "summary.txt", summary);
  }
  return report.pass() ? kExitOk : kExitPropertyFail;
}

int run_studies(const ExperimentSpec& base, const std::vector<ExperimentName>& names, const Options& o,
                std::ostream& out) {
  const std::filesystem::path dir = o.out.empty() ? std::filesystem::path("results") : std::filesystem::path(o.out);
  std::string summary;
  bool pass = true;
  for (auto name : names) {
    ExperimentSpec spec = base;
    spec.name = name;
    const auto result = run_experiment(spec);
    for (const auto& [file, contents] : result.files) write_file(dir, file, contents);
    summary += result.summary();
    pass = pass && result.pass();
  }
  write_file(dir, "summary.txt", summary);
  out << summary;
  return pass ? kExitOk : kExitPropertyFail;
}

int cmd_experiment(const Options& o, std::ostream& out) {
  const Config cfg = resolve_config(o, false);
  ExperimentSpec spec = experiment_spec_from_config(cfg, resolved_seed(cfg));
  if (!o.sizes.empty()) spec.table2_sizes = o.sizes;
  std::vector<ExperimentName> names;
  if (o.experiment == "all") {
    names = {ExperimentName::Fig3, ExperimentName::Fig4, ExperimentName::Table1, ExperimentName::Table2,
             ExperimentName::Fig6};
  } else {
    try {
      const auto name = parse_experiment_name(o.experiment);
      if (name == ExperimentName::Custom) throw std::invalid_argument("custom");
      names = {name};
    } catch (const std::invalid_argument&) {
      throw ConfigError("unknown experiment '" + o.experiment + "' (expected fig3, fig4, table1, table2, fig6 or all)");
    }
  }
  return run_studies(spec, names, o, out);
}

int cmd_bench(const Options& o, std::ostream& out) {
  const Config cfg = resolve_config(o, false);
  ExperimentSpec spec = experiment_spec_from_config(cfg, resolved_seed(cfg));
  spec.table2_sizes = o.sizes.empty() ? std::vector<std::size_t>{100, 200, 400, 800} : o.sizes;
  const auto result = run_table2(spec);
  out << result.files.at("table2.csv") << result.summary();
  if (!o.out.empty()) {
    write_file(o.out, "table2.csv", result.files.at("table2.csv"));
    write_file(o.out, "summary.txt", result.summary());
  }
  return result.pass() ? kExitOk : kExitPropertyFail;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal incentive mechanism for sponsored content with network effects"};
  app.require_subcommand(1);
  Options o;

  app.add_option("--config", o.config, "Scenario config (JSON, comments allowed)");
  app.add_option("--set", o.overrides, "Config override key.path=value (repeatable)");
  o.seed_opt = app.add_option("--seed", o.seed, "Seed; overrides NETMECH_SEED and the config");
  o.engine_opt = app.add_option("--engine", o.engine, "Expectation engine")
                     ->check(CLI::IsMember({"quadrature", "mc"}));
  o.mc_opt = app.add_option("--mc-samples", o.mc_samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
  o.quad_opt = app.add_option("--quad-order", o.quad_order, "Gauss-Legendre points per dimension")
                   ->check(CLI::PositiveNumber);
  o.grid_opt = app.add_option("--grid", o.grid, "Interim type-grid points (default 64)");
  o.report_opt = app.add_option("--report-grid", o.report_grid, "Report grid of the IC check (default 201)");
  o.true_opt = app.add_option("--true-grid", o.true_grid, "True-type grid of the IC/IR checks (default 21)");
  o.threads_opt = app.add_option("--threads", o.threads, "Worker threads (default: all cores)");
  app.add_option("--out", o.out, "Output directory for CSV files and summary.txt");
  app.add_option("--theta", o.theta, "solve: comma-separated type profile");
  app.add_option("--sizes", o.sizes, "experiment table2 / bench: network sizes")->delimiter(',');

  auto* validate = app.add_subcommand("validate", "Check regularity and dominance of a scenario");
  auto* solve = app.add_subcommand("solve", "Optimal demand for a type profile (--theta)");
  auto* rewards = app.add_subcommand("rewards", "Interim curves and reward schedule as CSV");
  auto* verify = app.add_subcommand("verify", "Certify IC, IR and monotonicity");
  auto* experiment = app.add_subcommand("experiment", "Run a study: fig3, fig4, table1, table2, fig6 or all");
  experiment->add_option("name", o.experiment, "Study name")->required();
  auto* bench = app.add_subcommand("bench", "Time demand solves over network sizes (--sizes)");
  for (auto* sub : {validate, solve, rewards, verify, experiment, bench}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfigError;
  }

  try {
    if (*validate) return cmd_validate(o, out);
    if (*solve) return cmd_solve(o, out, err);
    if (*rewards) return cmd_rewards(o, out, err);
    if (*verify) return cmd_verify(o, out, err);
    if (*experiment) return cmd_experiment(o, out);
    if (*bench) return cmd_bench(o, out);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"netmech"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace netmech

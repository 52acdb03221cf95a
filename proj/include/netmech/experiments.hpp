#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netmech/mechanism.hpp"
#include "netmech/verification.hpp"

namespace netmech {

enum class NetworkKind { Complete, Star, HubPlusEdge, RandomK };

NetworkKind parse_network_kind(const std::string& name);
std::string to_string(NetworkKind kind);

/// Symmetric 0/1 (times weight) graphs used by the studies.
///  complete:      every pair connected
///  star:          user 0 connected to every other user
///  hub_plus_edge: star plus the edge (2, 3); needs n >= 4
///  random_k:      each user links to k distinct uniformly chosen others
///                 (default k = n / 2), then the graph is symmetrised
Network make_network(NetworkKind kind, std::size_t n, std::uint64_t seed = 1,
                     std::optional<std::size_t> k = std::nullopt, double weight = 1.0);

/// Uniform support [theta_bar / 2, theta_bar] with
/// theta_bar = margin * (t + b) / max_i sum_j (g_ij + g_ji). Satisfies both
/// regularity and dominance for any graph (phi(lower) = 0 for the uniform law).
TypeDistribution dominance_safe_uniform(const Network& network, const MarketParams& params,
                                        double margin = 0.9);

enum class ExperimentName { Fig3, Fig4, Table1, Table2, Fig6, Custom };
ExperimentName parse_experiment_name(const std::string& name);
std::string to_string(ExperimentName name);

struct ExperimentSpec {
  ExperimentName name = ExperimentName::Custom;
  MarketParams params;                                         // s=1, t=1, a=0.5, b=6, p=0.1
  TypeDistribution dist = TypeDistribution::uniform(0.4, 0.8); // studies on small graphs
  ExpectationEngine engine = ExpectationEngine::quadrature(8);
  std::size_t grid = 64;
  std::size_t true_grid = 21;
  std::size_t report_grid = 201;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  std::vector<double> fig3_true_types;          // default: 5 evenly spaced types
  std::optional<TypeProfile> table1_theta;      // default: every user at the mean type
  std::vector<std::size_t> table2_sizes{10, 20, 50, 100, 200, 400, 600, 800};
  std::size_t table2_repetitions = 5;
  std::vector<std::size_t> fig6_sizes{10, 20, 50};
  std::size_t fig6_samples = 4000;
  std::size_t fig6_grid = 21;
};

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// CSV files (file name -> contents) and checked assertions of one study.
struct ExperimentOutput {
  std::string name;
  std::map<std::string, std::string> files;
  std::vector<Assertion> assertions;
  bool pass() const;
  std::string summary() const;
};

// --- fig3: misreport sweep of one user on the complete graph.
struct SweepCurve {
  double theta_true = 0.0;
  std::vector<double> reports;
  std::vector<double> interim;  // expected utility over the others' types
  std::vector<double> ex_post;  // others fixed at their reference types
  std::size_t argmax = 0;
};
std::vector<SweepCurve> misreport_sweep(const Scenario& sc, const InterimCurves& curves,
                                        const RewardSchedule& rewards, std::size_t user,
                                        const std::vector<double>& true_types, std::size_t report_grid,
                                        const TypeProfile& others);
struct Fig3Data {
  Scenario scenario;
  std::vector<SweepCurve> curves;
};
Fig3Data compute_fig3(const ExperimentSpec& spec);
ExperimentOutput run_fig3(const ExperimentSpec& spec);

// --- fig4: truthful interim utility by network role.
struct Fig4Data {
  std::vector<double> thetas;
  std::vector<double> complete_user;  // a.1
  std::vector<double> star_center;    // b.1
  std::vector<double> star_branch;    // b.2
  double complete_symmetry_gap = 0.0; // max spread across the complete graph's users
};
Fig4Data compute_fig4(const ExperimentSpec& spec);
ExperimentOutput run_fig4(const ExperimentSpec& spec);

// --- table1: CP utility under one untruthful user on the hub-plus-edge graph.
struct Table1Data {
  Scenario scenario;
  TypeProfile theta;
  std::vector<ImpactRow> rows;
};
Table1Data compute_table1(const ExperimentSpec& spec);
ExperimentOutput run_table1(const ExperimentSpec& spec);

// --- table2: demand solve time against network size.
struct TimingRecord {
  std::size_t n = 0;
  double wall_seconds = 0.0; // median over repetitions of the per-solve time
  std::size_t repetitions = 0;
  std::size_t inner_solves = 0;
  double theta_upper = 0.0;
  std::size_t min_degree = 0;
  std::size_t max_degree = 0;
};
std::vector<TimingRecord> run_timing(const ExperimentSpec& spec, const std::vector<std::size_t>& sizes);
/// Least-squares slope of log(time) on log(n) over the last `tail` records.
double loglog_slope(const std::vector<TimingRecord>& records, std::size_t tail = 4);
ExperimentOutput run_table2(const ExperimentSpec& spec);

// --- fig6: truthful interim utility against network size.
struct Fig6Curve {
  std::size_t n = 0;
  std::vector<double> utility;
  std::vector<double> se; // standard-error bound of the utility estimate
};
struct Fig6Data {
  TypeDistribution dist = TypeDistribution::uniform(0.0, 1.0);
  std::vector<double> thetas;
  std::vector<Fig6Curve> curves;
};
Fig6Data compute_fig6(const ExperimentSpec& spec);
ExperimentOutput run_fig6(const ExperimentSpec& spec);

ExperimentOutput run_experiment(const ExperimentSpec& spec);

} // namespace netmech

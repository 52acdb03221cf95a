#include <gtest/gtest.h>

#include "netmech/experiments.hpp"

using namespace netmech;

TEST(Networks, CompleteStarAndHub) {
  const auto c = make_network(NetworkKind::Complete, 5);
  EXPECT_EQ(c.edge_count(), 10u);
  EXPECT_DOUBLE_EQ(c.max_coupling(), 8.0);
  const auto s = make_network(NetworkKind::Star, 5);
  EXPECT_EQ(s.degrees(), (std::vector<std::size_t>{4, 1, 1, 1, 1}));
  const auto h = make_network(NetworkKind::HubPlusEdge, 5);
  EXPECT_EQ(h.degrees(), (std::vector<std::size_t>{4, 1, 2, 2, 1}));
  EXPECT_DOUBLE_EQ(h.weight(2, 3), 1.0);
  EXPECT_THROW(make_network(NetworkKind::HubPlusEdge, 3), std::invalid_argument);
}

TEST(Networks, RandomKIsSymmetricAndSeeded) {
  const auto a = make_network(NetworkKind::RandomK, 30, 4, 3);
  const auto b = make_network(NetworkKind::RandomK, 30, 4, 3);
  const auto c = make_network(NetworkKind::RandomK, 30, 5, 3);
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_NE(a.weights(), c.weights());
  EXPECT_EQ(a.weights(), a.weights().transpose());
  for (auto d : a.degrees()) {
    EXPECT_GE(d, 3u);
    EXPECT_LE(d, 29u);
  }
}

TEST(Networks, KindNamesRoundTrip) {
  for (auto k : {NetworkKind::Complete, NetworkKind::Star, NetworkKind::HubPlusEdge, NetworkKind::RandomK}) {
    EXPECT_EQ(parse_network_kind(to_string(k)), k);
  }
  EXPECT_EQ(parse_network_kind("hub"), NetworkKind::HubPlusEdge);
  EXPECT_THROW(parse_network_kind("ring"), std::invalid_argument);
}

TEST(Networks, DominanceSafeSupportValidates) {
  const auto net = make_network(NetworkKind::RandomK, 40, 2);
  const auto dist = dominance_safe_uniform(net, MarketParams{});
  EXPECT_NO_THROW(require_valid(Scenario{net, MarketParams{}, dist}));
  EXPECT_NEAR(dist.upper(), 0.9 * 7.0 / net.max_coupling(), 1e-14);
  EXPECT_NEAR(dist.lower(), 0.5 * dist.upper(), 1e-14);
}

TEST(Experiments, NamesRoundTrip) {
  for (auto n : {ExperimentName::Fig3, ExperimentName::Fig4, ExperimentName::Table1, ExperimentName::Table2,
                 ExperimentName::Fig6}) {
    EXPECT_EQ(parse_experiment_name(to_string(n)), n);
  }
  EXPECT_THROW(parse_experiment_name("fig9"), std::invalid_argument);
}

TEST(Timing, LogLogSlopeOfExactPowerLaw) {
  std::vector<TimingRecord> recs;
  for (std::size_t n : {10u, 100u, 200u, 400u, 800u}) {
    TimingRecord r;
    r.n = n;
    r.wall_seconds = 1e-9 * std::pow(static_cast<double>(n), 3.0);
    recs.push_back(r);
  }
  EXPECT_NEAR(loglog_slope(recs, 4), 3.0, 1e-12);
}

TEST(Fig3, TruthfulReportMaximisesUtility) {
  ExperimentSpec spec;
  spec.grid = 24;
  spec.report_grid = 81;
  const auto data = compute_fig3(spec);
  ASSERT_EQ(data.curves.size(), 5u);
  for (const auto& c : data.curves) {
    EXPECT_NEAR(c.reports[c.argmax], c.theta_true, 0.4 / 80 + 1e-12);
  }
}

TEST(Fig4, CompleteAboveCentreAboveBranch) {
  ExperimentSpec spec;
  spec.grid = 24;
  const auto d = compute_fig4(spec);
  ASSERT_EQ(d.thetas.size(), 21u);
  EXPECT_NEAR(d.complete_user[0], 0.0, 1e-10);
  for (std::size_t k = 1; k < d.thetas.size(); ++k) {
    EXPECT_GT(d.complete_user[k], d.star_center[k]);
    EXPECT_GT(d.star_center[k], d.star_branch[k]);
  }
  EXPECT_LE(d.complete_symmetry_gap, 1e-10);
}

TEST(Table1, HubHasLargestImpact) {
  ExperimentSpec spec;
  spec.grid = 24;
  spec.report_grid = 81;
  const auto out = run_table1(spec);
  EXPECT_TRUE(out.pass()) << out.summary();
  EXPECT_TRUE(out.files.count("table1.csv"));
}

TEST(Fig6, UtilityGrowsWithSize) {
  ExperimentSpec spec;
  spec.fig6_sizes = {6, 12};
  spec.fig6_samples = 1500;
  spec.fig6_grid = 11;
  const auto out = run_fig6(spec);
  EXPECT_TRUE(out.pass()) << out.summary();
}

TEST(Experiments, OutputsAreReproducible) {
  ExperimentSpec spec;
  spec.grid = 16;
  spec.report_grid = 41;
  spec.name = ExperimentName::Fig3;
  EXPECT_EQ(run_experiment(spec).files, run_experiment(spec).files);
  spec.name = ExperimentName::Custom;
  EXPECT_THROW(run_experiment(spec), std::invalid_argument);
}

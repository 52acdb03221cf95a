#include <gtest/gtest.h>

#include "netmech/errors.hpp"
#include "netmech/experiments.hpp"
#include "netmech/market.hpp"

using namespace netmech;

TEST(Network, RejectsNegativeWeightsAndSelfLoops) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
  g(0, 1) = -0.5;
  EXPECT_THROW(Network{g}, std::invalid_argument);
  g(0, 1) = 0.0;
  g(2, 2) = 1.0;
  EXPECT_THROW(Network{g}, std::invalid_argument);
  EXPECT_THROW(Network(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST(Network, CouplingCountsBothDirections) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
  g(0, 1) = 1.0;
  g(2, 0) = 0.5;
  const Network net(g);
  EXPECT_DOUBLE_EQ(net.coupling(0), 1.5);
  EXPECT_DOUBLE_EQ(net.coupling(1), 1.0);
  EXPECT_DOUBLE_EQ(net.coupling(2), 0.5);
  EXPECT_DOUBLE_EQ(net.max_coupling(), 1.5);
  EXPECT_EQ(net.edge_count(), 2u);
}

TEST(Network, FromEdgesIsSymmetric) {
  const auto net = Network::from_edges(4, {{0, 1}, {2, 3}}, 0.5);
  EXPECT_EQ(net.weights(), net.weights().transpose());
  EXPECT_DOUBLE_EQ(net.weight(3, 2), 0.5);
  EXPECT_EQ(net.degrees(), (std::vector<std::size_t>{1, 1, 1, 1}));
}

TEST(Network, PermutedRelabelsUsers) {
  const auto net = make_network(NetworkKind::Star, 4);
  const auto p = net.permuted({3, 2, 1, 0});
  EXPECT_DOUBLE_EQ(p.weight(3, 0), 1.0);
  EXPECT_DOUBLE_EQ(p.weight(0, 1), 0.0);
  EXPECT_EQ(p.degrees()[3], 3u);
}

TEST(Params, ValidateRejectsNegativeCoefficients) {
  MarketParams mp;
  EXPECT_NO_THROW(mp.validate());
  mp.b = -1.0;
  EXPECT_THROW(mp.validate(), ValidationError);
}

TEST(Assumption2, ReportsInequalityWithNumbers) {
  const Scenario sc{make_network(NetworkKind::Complete, 5), MarketParams{}, TypeDistribution::uniform(1.0, 2.0)};
  const auto rep = validate_assumption2(sc);
  EXPECT_FALSE(rep.pass);
  EXPECT_NE(rep.message().find("t+b > θ̄·Σ(g_ij+g_ji)"), std::string::npos);
  EXPECT_NE(rep.message().find("7 ≤ 16"), std::string::npos);
  EXPECT_THROW(require_valid(sc), ValidationError);
}

TEST(Assumption2, PriceMustStayBelowMargin) {
  MarketParams mp;
  mp.p = 2.0;
  const Scenario sc{make_network(NetworkKind::Complete, 3), mp, TypeDistribution::uniform(0.4, 0.8)};
  EXPECT_FALSE(validate_assumption2(sc).pass);
  EXPECT_THROW(require_valid(sc), ValidationError);
}

TEST(Assumption2, DefaultScenarioPasses) {
  const Scenario sc{make_network(NetworkKind::Complete, 5), MarketParams{}, TypeDistribution::uniform(0.4, 0.8)};
  const auto rep = validate_assumption2(sc);
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.slack[0], 7.0 - 0.8 * 8.0, 1e-12);
  EXPECT_NO_THROW(require_valid(sc));
}

TEST(Regularity, IrregularLawIsRejectedByRequireValid) {
  const Scenario sc{make_network(NetworkKind::Complete, 3), MarketParams{},
                    TypeDistribution::truncated_normal(0.6, 0.1, 0.4, 0.8)};
  EXPECT_THROW(require_valid(sc), ValidationError);
}

TEST(Profile, ChecksLengthAndSupport) {
  const Scenario sc{make_network(NetworkKind::Complete, 3), MarketParams{}, TypeDistribution::uniform(0.4, 0.8)};
  EXPECT_NO_THROW(check_profile(sc, Eigen::Vector3d(0.4, 0.6, 0.8)));
  EXPECT_THROW(check_profile(sc, Eigen::Vector2d(0.5, 0.6)), std::domain_error);
  EXPECT_THROW(check_profile(sc, Eigen::Vector3d(0.5, 0.6, 0.9)), std::domain_error);
}

TEST(Utility, UserAndProviderByHand) {
  const Scenario sc{Network::from_edges(2, {{0, 1}}), MarketParams{}, TypeDistribution::uniform(0.4, 0.8)};
  const Eigen::Vector2d x(0.2, 0.3);
  const Eigen::Vector2d theta(0.5, 0.7);
  const Eigen::Vector2d r(0.01, 0.02);
  // psi(0.2) = 0.1 - 0.12; network term 0.5*0.2*0.3; price 0.02; reward 0.01.
  EXPECT_NEAR(user_utility(sc, x, r, theta, 0), 0.1 - 0.12 + 0.03 - 0.02 + 0.01, 1e-15);
  // Q(0.2) + Q(0.3) - 0.03.
  EXPECT_NEAR(cp_ex_post_utility(sc, x, r), (0.2 - 0.02) + (0.3 - 0.045) - 0.03, 1e-15);
}

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "netmech/distributions.hpp"

namespace netmech {

/// Content-demand allocation, one entry per user.
using DemandProfile = Eigen::VectorXd;

/// Weighted influence graph. weights(i, j) is the strength of user i's tie on
/// user j; the diagonal is zero and all weights are nonnegative.
class Network {
public:
  explicit Network(Eigen::MatrixXd weights);
  static Network empty(std::size_t n);
  /// Undirected edges (i, j, w) are stored in both directions.
  static Network from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                            double weight = 1.0);

  std::size_t size() const { return static_cast<std::size_t>(weights_.rows()); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  double weight(std::size_t i, std::size_t j) const {
    return weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  /// sum_{j != i} (g_ij + g_ji)
  double coupling(std::size_t i) const;
  double max_coupling() const;
  /// Number of undirected edges (pairs with g_ij > 0 or g_ji > 0).
  std::size_t edge_count() const;
  std::vector<std::size_t> degrees() const;

  /// Network with users relabelled so that new user k is old user perm[k].
  Network permuted(const std::vector<std::size_t>& perm) const;

private:
  Eigen::MatrixXd weights_;
};

/// Coefficients of the linear-quadratic utilities.
///  psi(x) = a x - (b/2) x^2   (user's internal utility)
///  Q(x)   = s x - (t/2) x^2   (CP advertising revenue)
///  p      per-unit data price paid by the user
struct MarketParams {
  double a = 0.5;
  double b = 6.0;
  double s = 1.0;
  double t = 1.0;
  double p = 0.1;

  void validate() const;
  double psi(double x) const { return a * x - 0.5 * b * x * x; }
  double revenue(double x) const { return s * x - 0.5 * t * x * x; }
  double curvature() const { return t + b; }
  double net_margin() const { return s + a - p; }
};

struct Scenario {
  Network network;
  MarketParams params;
  TypeDistribution dist;

  std::size_t size() const { return network.size(); }
};

/// Per-row diagonal-dominance slack and the price condition.
struct Assumption2Report {
  bool pass = false;
  double curvature = 0.0;               // t + b
  double upper_type = 0.0;              // theta_bar
  std::vector<double> coupling;         // sum_{j != i} (g_ij + g_ji)
  std::vector<double> slack;            // (t + b) - theta_bar * coupling[i]
  std::size_t worst_row = 0;
  double price_slack = 0.0;             // s + a - p
  std::string message() const;
};

/// t + b > theta_bar * sum_{j != i}(g_ij + g_ji) for every row, and s + a > p.
Assumption2Report validate_assumption2(const Scenario& sc);

/// Regularity of the type law and the dominance condition together. Throws
/// ValidationError naming the violated inequality.
void require_valid(const Scenario& sc);

/// Throws std::domain_error when an entry is outside the support or the
/// length does not match the network.
void check_profile(const Scenario& sc, const TypeProfile& theta);

/// Ex-post user utility psi(x_i) + theta_i x_i sum_j g_ij x_j - p x_i + R_i.
double user_utility(const Scenario& sc, const DemandProfile& x, const Eigen::VectorXd& reward,
                    const TypeProfile& true_theta, std::size_t i);

/// Ex-post CP utility sum_i Q(x_i) - R_i.
double cp_ex_post_utility(const Scenario& sc, const DemandProfile& x, const Eigen::VectorXd& rewards);

} // namespace netmech

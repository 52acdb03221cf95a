#include "netmech/market.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "netmech/errors.hpp"

namespace netmech {

Network::Network(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
  if (weights_.rows() < 1 || weights_.rows() != weights_.cols()) {
    throw std::invalid_argument("network weights must be a non-empty square matrix");
  }
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    if (weights_(i, i) != 0.0) throw std::invalid_argument("network weights must have zero diagonal");
    for (Eigen::Index j = 0; j < weights_.cols(); ++j) {
      if (!(weights_(i, j) >= 0.0) || !std::isfinite(weights_(i, j))) {
        throw std::invalid_argument("network weights must be finite and nonnegative");
      }
    }
  }
}

Network Network::empty(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  return Network(Eigen::MatrixXd::Zero(m, m));
}

Network Network::from_edges(std::size_t n,
                            const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                            double weight) {
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n || i == j) throw std::invalid_argument("edge endpoint out of range or self-loop");
    g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = weight;
    g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = weight;
  }
  return Network(std::move(g));
}

double Network::coupling(std::size_t i) const {
  const auto k = static_cast<Eigen::Index>(i);
  return weights_.row(k).sum() + weights_.col(k).sum() - 2.0 * weights_(k, k);
}

double Network::max_coupling() const {
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i) best = std::max(best, coupling(i));
  return best;
}

std::size_t Network::edge_count() const {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < weights_.cols(); ++j) {
      if (weights_(i, j) > 0.0 || weights_(j, i) > 0.0) ++count;
    }
  }
  return count;
}

std::vector<std::size_t> Network::degrees() const {
  std::vector<std::size_t> deg(size(), 0);
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    for (Eigen::Index j = 0; j < weights_.cols(); ++j) {
      if (i != j && (weights_(i, j) > 0.0 || weights_(j, i) > 0.0)) ++deg[static_cast<std::size_t>(i)];
    }
  }
  return deg;
}

Network Network::permuted(const std::vector<std::size_t>& perm) const {
  if (perm.size() != size()) throw std::invalid_argument("permutation length mismatch");
  const auto n = weights_.rows();
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      g(i, j) = weights_(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]),
                         static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)]));
    }
  }
  return Network(std::move(g));
}

void MarketParams::validate() const {
  for (double v : {a, b, s, t, p}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("market parameters a, b, s, t, p must be finite and nonnegative");
    }
  }
  if (!(b > 0.0 || t > 0.0)) throw ValidationError("market parameters need b > 0 or t > 0");
}

std::string Assumption2Report::message() const {
  std::ostringstream os;
  if (pass) {
    os << "PASS dominance: min row slack " << (slack.empty() ? 0.0 : slack[worst_row]) << " at user "
       << worst_row << "; s+a-p = " << price_slack;
    return os.str();
  }
  os << "FAIL";
  if (!slack.empty() && !(slack[worst_row] > 0.0)) {
    os << " t+b > θ̄·Σ(g_ij+g_ji) at user " << worst_row << ": " << curvature
       << " ≤ " << upper_type * coupling[worst_row] << " (θ̄=" << upper_type
       << ", Σ=" << coupling[worst_row] << ")";
  }
  if (!(price_slack > 0.0)) os << " s+a > p: s+a-p = " << price_slack;
  return os.str();
}

Assumption2Report validate_assumption2(const Scenario& sc) {
  Assumption2Report report;
  const auto& g = sc.network;
  report.curvature = sc.params.curvature();
  report.upper_type = sc.dist.upper();
  report.coupling.resize(g.size());
  report.slack.resize(g.size());
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    report.coupling[i] = g.coupling(i);
    report.slack[i] = report.curvature - report.upper_type * report.coupling[i];
    if (report.slack[i] < worst) {
      worst = report.slack[i];
      report.worst_row = i;
    }
  }
  report.price_slack = sc.params.net_margin();
  report.pass = worst > 0.0 && report.price_slack > 0.0;
  return report;
}

void require_valid(const Scenario& sc) {
  sc.params.validate();
  const auto reg = validate_regularity(sc.dist);
  if (!reg.pass) throw ValidationError("type distribution is not regular: " + reg.message());
  const auto dom = validate_assumption2(sc);
  if (!dom.pass) throw ValidationError("scenario violates dominance: " + dom.message());
}

void check_profile(const Scenario& sc, const TypeProfile& theta) {
  if (static_cast<std::size_t>(theta.size()) != sc.size()) {
    throw std::domain_error("type profile length does not match the network");
  }
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!sc.dist.contains(theta(i))) {
      std::ostringstream os;
      os << "type of user " << i << " (" << theta(i) << ") is outside the support";
      throw std::domain_error(os.str());
    }
  }
}

double user_utility(const Scenario& sc, const DemandProfile& x, const Eigen::VectorXd& reward,
                    const TypeProfile& true_theta, std::size_t i) {
  const auto n = sc.size();
  if (i >= n) throw std::out_of_range("user_utility: user index out of range");
  if (static_cast<std::size_t>(x.size()) != n || static_cast<std::size_t>(reward.size()) != n ||
      static_cast<std::size_t>(true_theta.size()) != n) {
    throw std::invalid_argument("user_utility: length mismatch");
  }
  const auto k = static_cast<Eigen::Index>(i);
  const double xi = x(k);
  const double spill = sc.network.weights().row(k).dot(x);
  return sc.params.psi(xi) + true_theta(k) * xi * spill - sc.params.p * xi + reward(k);
}

double cp_ex_post_utility(const Scenario& sc, const DemandProfile& x, const Eigen::VectorXd& rewards) {
  if (static_cast<std::size_t>(x.size()) != sc.size() || rewards.size() != x.size()) {
    throw std::invalid_argument("cp_ex_post_utility: length mismatch");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) total += sc.params.revenue(x(i)) - rewards(i);
  return total;
}

} // namespace netmech

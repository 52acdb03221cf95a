#include "netmech/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "netmech/errors.hpp"
#include "netmech/parallel.hpp"
#include "netmech/quadrature.hpp"

namespace netmech {

namespace {

constexpr double kMinReciprocalCondition = 1e-12;

/// Row of A with the smallest diagonal-dominance margin.
std::pair<Eigen::Index, double> weakest_row(const Eigen::MatrixXd& a) {
  Eigen::Index worst = 0;
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double off = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
    const double m = a(i, i) - off;
    if (m < margin) {
      margin = m;
      worst = i;
    }
  }
  return {worst, margin};
}

void assemble(const Scenario& sc, const Eigen::VectorXd& phi, Eigen::MatrixXd& a) {
  const auto& g = sc.network.weights();
  const auto n = g.rows();
  a.resize(n, n);
  const double diag = sc.params.curvature();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      a(i, j) = -(phi(i) * g(i, j) + phi(j) * g(j, i));
    }
    a(j, j) = diag;
  }
}

Eigen::VectorXd virtual_values(const Scenario& sc, const TypeProfile& theta) {
  Eigen::VectorXd phi(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) phi(i) = sc.dist.virtual_value(theta(i));
  return phi;
}

struct Cell {
  std::size_t k;  // left grid index
  double lambda;  // position in [0, 1] inside the cell
  double width;
};

Cell locate(const std::vector<double>& grid, double theta) {
  const std::size_t n = grid.size();
  if (theta <= grid.front()) return {0, 0.0, grid[1] - grid[0]};
  if (theta >= grid.back()) return {n - 2, 1.0, grid[n - 1] - grid[n - 2]};
  const auto it = std::upper_bound(grid.begin(), grid.end(), theta);
  const auto k = static_cast<std::size_t>(it - grid.begin()) - 1;
  const double h = grid[k + 1] - grid[k];
  return {k, (theta - grid[k]) / h, h};
}

double lerp(const std::vector<double>& values, const Cell& cell) {
  return values[cell.k] + cell.lambda * (values[cell.k + 1] - values[cell.k]);
}

void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw std::invalid_argument("interim grid needs at least two points");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw std::invalid_argument("interim grid is not sorted ascending");
  }
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

} // namespace

Eigen::MatrixXd system_matrix(const Scenario& sc, const TypeProfile& theta) {
  check_profile(sc, theta);
  Eigen::MatrixXd a;
  assemble(sc, virtual_values(sc, theta), a);
  return a;
}

DemandSolver::DemandSolver(const Scenario& sc) : sc_(sc) { require_valid(sc_); }

void DemandSolver::solve_from_phi(const Eigen::VectorXd& phi, Workspace& ws, DemandProfile& x) const {
  assemble(sc_, phi, ws.a);
  ws.llt.compute(ws.a);
  if (ws.llt.info() != Eigen::Success) {
    const auto [row, margin] = weakest_row(ws.a);
    std::ostringstream os;
    os << "system matrix is not positive definite; weakest dominance row " << row << " (margin "
       << margin << ")";
    throw SolverError(os.str());
  }
  ws.rhs.setConstant(ws.a.rows(), sc_.params.net_margin());
  x = ws.llt.solve(ws.rhs);
}

DemandProfile DemandSolver::solve(const TypeProfile& theta) const {
  check_profile(sc_, theta);
  Workspace ws;
  DemandProfile x;
  solve_from_phi(virtual_values(sc_, theta), ws, x);
  if (ws.llt.rcond() < kMinReciprocalCondition) {
    const auto [row, margin] = weakest_row(ws.a);
    std::ostringstream os;
    os << "system matrix is ill-conditioned (rcond " << ws.llt.rcond()
       << "); weakest dominance row " << row << " (margin " << margin << ")";
    throw SolverError(os.str());
  }
  return x;
}

DemandProfile demand_solve(const Scenario& sc, const TypeProfile& theta) {
  return DemandSolver(sc).solve(theta);
}

double foc_residual(const Scenario& sc, const TypeProfile& theta, const DemandProfile& x) {
  const auto& g = sc.network.weights();
  const Eigen::VectorXd phi = virtual_values(sc, theta);
  const Eigen::VectorXd residual =
      Eigen::VectorXd::Constant(x.size(), sc.params.net_margin()) - sc.params.curvature() * x +
      phi.cwiseProduct(g * x) + g.transpose() * phi.cwiseProduct(x);
  return residual.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd k_sensitivity(const Scenario& sc, const TypeProfile& theta, std::size_t i) {
  require_valid(sc);
  check_profile(sc, theta);
  if (i >= sc.size()) throw std::out_of_range("k_sensitivity: user index out of range");
  const auto k = static_cast<Eigen::Index>(i);
  const auto& g = sc.network.weights();
  const auto n = g.rows();

  Eigen::MatrixXd a;
  assemble(sc, virtual_values(sc, theta), a);
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw SolverError("k_sensitivity: system matrix not positive definite");

  const double dphi = sc.dist.virtual_value_derivative(theta(k));
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n); // E_i G + G^T E_i
  e.row(k) += dphi * g.row(k);
  e.col(k) += dphi * g.row(k).transpose();

  const Eigen::MatrixXd ke = llt.solve(e);                 // K B
  return llt.solve(ke.transpose()).transpose();            // (K (K B)^T)^T = K B K
}

std::string to_string(ExpectationEngine::Kind kind) {
  return kind == ExpectationEngine::Kind::Quadrature ? "quadrature" : "mc";
}

std::string ExpectationEngine::describe() const {
  std::ostringstream os;
  if (kind == Kind::Quadrature) {
    os << "quadrature(order=" << quad_order << ")";
  } else {
    os << "mc(samples=" << mc_samples << ", seed=" << seed << ")";
  }
  return os.str();
}

const UserCurves& InterimCurves::of(std::size_t i) const {
  for (const auto& u : users) {
    if (u.user == i) return u;
  }
  throw std::out_of_range("interim curves were not computed for user " + std::to_string(i));
}

bool InterimCurves::has(std::size_t i) const {
  return std::any_of(users.begin(), users.end(), [i](const UserCurves& u) { return u.user == i; });
}

const UserReward& RewardSchedule::of(std::size_t i) const {
  for (const auto& u : users) {
    if (u.user == i) return u;
  }
  throw std::out_of_range("reward schedule has no user " + std::to_string(i));
}

std::vector<double> type_grid(const TypeDistribution& dist, std::size_t points) {
  if (points < 2) throw std::invalid_argument("type_grid: need at least two points");
  std::vector<double> grid(points);
  const double step = dist.width() / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) grid[k] = dist.lower() + static_cast<double>(k) * step;
  grid.back() = dist.upper();
  return grid;
}

InterimCurves interim_curves(const Scenario& sc, std::size_t grid_size, const ExpectationEngine& engine,
                             std::vector<std::size_t> users) {
  if (grid_size < 9) throw std::invalid_argument("interim_curves: grid_size must be >= 9");
  const std::size_t n = sc.size();
  const bool quad = engine.kind == ExpectationEngine::Kind::Quadrature;
  if (quad && engine.quad_order == 0) throw std::invalid_argument("interim_curves: quadrature order is 0");
  if (!quad && engine.mc_samples < 2) throw std::invalid_argument("interim_curves: Monte Carlo budget < 2");
  if (quad && n > ExpectationEngine::kMaxQuadratureUsers) {
    throw std::invalid_argument("interim_curves: tensor quadrature is limited to " +
                                std::to_string(ExpectationEngine::kMaxQuadratureUsers) +
                                " users; use the Monte Carlo engine");
  }
  const DemandSolver solver(sc);
  if (users.empty()) {
    users.resize(n);
    for (std::size_t i = 0; i < n; ++i) users[i] = i;
  }
  for (auto i : users) {
    if (i >= n) throw std::out_of_range("interim_curves: user index out of range");
  }

  InterimCurves out;
  out.engine = engine;
  out.grid = type_grid(sc.dist, grid_size);
  std::vector<double> phi_grid(grid_size);
  for (std::size_t k = 0; k < grid_size; ++k) phi_grid[k] = sc.dist.virtual_value(out.grid[k]);

  // Expectation nodes over the other users' types. Quadrature nodes carry n-1
  // virtual values each; Monte Carlo samples carry a full profile of n.
  std::vector<double> node_phi;
  std::vector<double> node_weight;
  std::size_t node_count = 0;
  std::size_t stride = 0;
  if (quad) {
    const std::size_t dims = n - 1;
    const auto rule = gauss_legendre(engine.quad_order, sc.dist.lower(), sc.dist.upper());
    const std::size_t q = rule.nodes.size();
    std::vector<double> w1(q), phi1(q);
    double wsum = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
      w1[k] = rule.weights[k] * sc.dist.pdf(rule.nodes[k]);
      phi1[k] = sc.dist.virtual_value(rule.nodes[k]);
      wsum += w1[k];
    }
    for (auto& w : w1) w /= wsum;
    node_count = 1;
    for (std::size_t d = 0; d < dims; ++d) node_count *= q;
    stride = dims;
    node_phi.resize(node_count * dims);
    node_weight.resize(node_count);
    for (std::size_t m = 0; m < node_count; ++m) {
      std::size_t rest = m;
      double w = 1.0;
      for (std::size_t d = 0; d < dims; ++d) {
        const std::size_t idx = rest % q;
        rest /= q;
        node_phi[m * dims + d] = phi1[idx];
        w *= w1[idx];
      }
      node_weight[m] = w;
    }
  } else {
    node_count = engine.mc_samples;
    stride = n;
    node_phi.resize(node_count * n);
    node_weight.assign(node_count, 1.0 / static_cast<double>(node_count));
    for (std::size_t m = 0; m < node_count; ++m) {
      for (std::size_t j = 0; j < n; ++j) {
        const double u = counter_uniform(engine.seed, m * n + j);
        node_phi[m * n + j] = sc.dist.virtual_value(sc.dist.quantile(u));
      }
    }
  }

  out.users.resize(users.size());
  for (std::size_t u = 0; u < users.size(); ++u) {
    auto& uc = out.users[u];
    uc.user = users[u];
    uc.gamma.assign(grid_size, 0.0);
    uc.v.assign(grid_size, 0.0);
    uc.c.assign(grid_size, 0.0);
    uc.gamma_se.assign(grid_size, 0.0);
  }

  const auto& g = sc.network.weights();
  const auto& mp = sc.params;
  parallel_for(users.size() * grid_size, engine.threads, [&](std::size_t task) {
    const std::size_t u = task / grid_size;
    const std::size_t k = task % grid_size;
    const std::size_t i = users[u];
    const auto ii = static_cast<Eigen::Index>(i);

    DemandSolver::Workspace ws;
    Eigen::VectorXd phi(static_cast<Eigen::Index>(n));
    DemandProfile x;
    double gamma = 0.0, v = 0.0, c = 0.0;
    double mean = 0.0, m2 = 0.0; // Welford on the gamma integrand (Monte Carlo only)
    for (std::size_t m = 0; m < node_count; ++m) {
      const double* src = node_phi.data() + m * stride;
      if (quad) {
        std::size_t d = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) phi(static_cast<Eigen::Index>(j)) = src[d++];
        }
      } else {
        for (std::size_t j = 0; j < n; ++j) phi(static_cast<Eigen::Index>(j)) = src[j];
      }
      phi(ii) = phi_grid[k];
      solver.solve_from_phi(phi, ws, x);
      const double xi = x(ii);
      const double gi = xi * g.row(ii).dot(x);
      const double w = node_weight[m];
      gamma += w * gi;
      v += w * ((mp.a - mp.p) * xi - 0.5 * mp.b * xi * xi);
      c += w * mp.revenue(xi);
      if (!quad) {
        const double delta = gi - mean;
        mean += delta / static_cast<double>(m + 1);
        m2 += delta * (gi - mean);
      }
    }
    auto& uc = out.users[u];
    uc.gamma[k] = gamma;
    uc.v[k] = v;
    uc.c[k] = c;
    if (!quad) {
      const auto count = static_cast<double>(node_count);
      uc.gamma_se[k] = std::sqrt(m2 / (count - 1.0) / count);
    }
  });
  return out;
}

RewardSchedule reward_schedule(const InterimCurves& curves) {
  check_grid(curves.grid);
  RewardSchedule out;
  out.grid = curves.grid;
  const auto& grid = curves.grid;
  for (const auto& uc : curves.users) {
    UserReward ur;
    ur.user = uc.user;
    ur.envelope.assign(grid.size(), 0.0);
    ur.r.assign(grid.size(), 0.0);
    for (std::size_t k = 1; k < grid.size(); ++k) {
      ur.envelope[k] = ur.envelope[k - 1] + 0.5 * (grid[k] - grid[k - 1]) * (uc.gamma[k] + uc.gamma[k - 1]);
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
      ur.r[k] = ur.envelope[k] - grid[k] * uc.gamma[k] - uc.v[k];
    }
    out.users.push_back(std::move(ur));
  }
  return out;
}

double gamma_at(const InterimCurves& curves, std::size_t i, double theta) {
  return lerp(curves.of(i).gamma, locate(curves.grid, theta));
}

double v_at(const InterimCurves& curves, std::size_t i, double theta) {
  return lerp(curves.of(i).v, locate(curves.grid, theta));
}

double c_at(const InterimCurves& curves, std::size_t i, double theta) {
  return lerp(curves.of(i).c, locate(curves.grid, theta));
}

double reward_at(const InterimCurves& curves, const RewardSchedule& rewards, std::size_t i, double theta) {
  if (rewards.grid.size() != curves.grid.size()) throw std::invalid_argument("reward/curve grid mismatch");
  const Cell cell = locate(rewards.grid, theta);
  const auto& gamma = curves.of(i).gamma;
  // Linear part plus the exact-envelope correction h * dgamma * lambda (1 - lambda) / 2.
  const double dgamma = gamma[cell.k + 1] - gamma[cell.k];
  return lerp(rewards.of(i).r, cell) + 0.5 * cell.width * dgamma * cell.lambda * (1.0 - cell.lambda);
}

Eigen::VectorXd ex_post_rewards(const InterimCurves& curves, const RewardSchedule& rewards,
                                const TypeProfile& reported) {
  Eigen::VectorXd out(reported.size());
  for (Eigen::Index i = 0; i < reported.size(); ++i) {
    out(i) = reward_at(curves, rewards, static_cast<std::size_t>(i), reported(i));
  }
  return out;
}

std::vector<NegativeReward> negative_rewards(const RewardSchedule& rewards) {
  std::vector<NegativeReward> out;
  for (const auto& ur : rewards.users) {
    for (std::size_t k = 0; k < ur.r.size(); ++k) {
      if (ur.r[k] < 0.0) out.push_back({ur.user, rewards.grid[k], ur.r[k]});
    }
  }
  return out;
}

namespace {

// Integrates fn over the grid cell by cell with an 8-point Gauss rule; the
// piecewise interim functions are smooth inside each cell.
template <typename Fn>
double integrate_cells(const std::vector<double>& grid, Fn&& fn) {
  static const QuadratureRule ref = gauss_legendre(8);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double half = 0.5 * (grid[k + 1] - grid[k]);
    const double mid = 0.5 * (grid[k + 1] + grid[k]);
    double cell = 0.0;
    for (std::size_t q = 0; q < ref.nodes.size(); ++q) cell += ref.weights[q] * fn(mid + half * ref.nodes[q]);
    total += half * cell;
  }
  return total;
}

void check_consistent(const InterimCurves& curves, const RewardSchedule& rewards) {
  if (curves.grid != rewards.grid) throw std::invalid_argument("interim curves and rewards use different grids");
}

} // namespace

double cp_expected_utility(const Scenario& sc, const InterimCurves& curves, const RewardSchedule& rewards) {
  check_consistent(curves, rewards);
  double total = 0.0;
  for (const auto& uc : curves.users) {
    total += integrate_cells(curves.grid, [&](double theta) {
      return (c_at(curves, uc.user, theta) - reward_at(curves, rewards, uc.user, theta)) * sc.dist.pdf(theta);
    });
  }
  return total;
}

double cp_virtual_surplus(const Scenario& sc, const InterimCurves& curves) {
  check_grid(curves.grid);
  double total = 0.0;
  for (const auto& uc : curves.users) {
    total += integrate_cells(curves.grid, [&](double theta) {
      const double cv = c_at(curves, uc.user, theta) + v_at(curves, uc.user, theta);
      return cv * sc.dist.pdf(theta) + gamma_at(curves, uc.user, theta) * sc.dist.virtual_density(theta);
    });
  }
  return total;
}

void write_curves_csv(std::ostream& os, const InterimCurves& curves, const RewardSchedule& rewards) {
  check_consistent(curves, rewards);
  os << "user,theta,gamma,V,C,r\n";
  for (const auto& uc : curves.users) {
    const auto& ur = rewards.of(uc.user);
    for (std::size_t k = 0; k < curves.grid.size(); ++k) {
      os << uc.user << ',' << format_number(curves.grid[k]) << ',' << format_number(uc.gamma[k]) << ','
         << format_number(uc.v[k]) << ',' << format_number(uc.c[k]) << ',' << format_number(ur.r[k]) << '\n';
    }
  }
}

} // namespace netmech

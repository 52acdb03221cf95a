#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "netmech/market.hpp"

namespace netmech {

/// A = (t+b) I - (M_phi G + G^T M_phi) with M_phi = diag(phi(theta_1..N)).
/// Symmetric, strictly diagonally dominant for a valid scenario.
Eigen::MatrixXd system_matrix(const Scenario& sc, const TypeProfile& theta);

/// Optimal demand x(theta) = (s+a-p) A^{-1} 1, solved by Cholesky.
///
/// The scenario is validated once at construction; every solve then only
/// checks the profile against the support.
class DemandSolver {
public:
  explicit DemandSolver(const Scenario& sc);

  const Scenario& scenario() const { return sc_; }

  DemandProfile solve(const TypeProfile& theta) const;

  /// Reusable buffers for repeated solves of the same size.
  struct Workspace {
    Eigen::MatrixXd a;
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::VectorXd rhs;
  };
  /// Hot-path solve from precomputed virtual values; no support checks.
  void solve_from_phi(const Eigen::VectorXd& phi, Workspace& ws, DemandProfile& x) const;

private:
  Scenario sc_;
};

DemandProfile demand_solve(const Scenario& sc, const TypeProfile& theta);

/// max_i |(s+a-p) - (t+b) x_i + phi_i sum_j g_ij x_j + sum_j phi_j g_ji x_j|
double foc_residual(const Scenario& sc, const TypeProfile& theta, const DemandProfile& x);

/// dK/dtheta_i = K (E_i G + G^T E_i) K with K = A^{-1}.
Eigen::MatrixXd k_sensitivity(const Scenario& sc, const TypeProfile& theta, std::size_t i);

/// How expectations over the other users' types are taken.
struct ExpectationEngine {
  enum class Kind { Quadrature, MonteCarlo };
  Kind kind = Kind::Quadrature;
  std::size_t quad_order = 8;     // Gauss-Legendre points per dimension
  std::size_t mc_samples = 20000; // common random numbers across the grid
  std::uint64_t seed = 1;
  unsigned threads = 0;           // 0 = all cores

  /// Largest network handled by tensor quadrature.
  static constexpr std::size_t kMaxQuadratureUsers = 7;

  static ExpectationEngine quadrature(std::size_t order = 8) {
    ExpectationEngine e;
    e.kind = Kind::Quadrature;
    e.quad_order = order;
    return e;
  }
  static ExpectationEngine monte_carlo(std::size_t samples = 20000, std::uint64_t seed = 1) {
    ExpectationEngine e;
    e.kind = Kind::MonteCarlo;
    e.mc_samples = samples;
    e.seed = seed;
    return e;
  }
  std::string describe() const;
};

std::string to_string(ExpectationEngine::Kind kind);

/// Interim quantities of one user on the type grid.
struct UserCurves {
  std::size_t user = 0;
  std::vector<double> gamma;    // E[x_i sum_j g_ij x_j]
  std::vector<double> v;        // E[(a-p) x_i - (b/2) x_i^2]
  std::vector<double> c;        // E[s x_i - (t/2) x_i^2]
  std::vector<double> gamma_se; // Monte Carlo standard error of gamma; zero for quadrature
};

struct InterimCurves {
  std::vector<double> grid;
  std::vector<UserCurves> users;
  ExpectationEngine engine;

  /// Curves of network user i; throws std::out_of_range if not computed.
  const UserCurves& of(std::size_t i) const;
  bool has(std::size_t i) const;
};

/// Equally spaced grid with both support endpoints.
std::vector<double> type_grid(const TypeDistribution& dist, std::size_t points);

/// Interim curves of the listed users (all users when empty) on a grid of
/// grid_size points. Deterministic for a given engine seed, independent of
/// the thread count.
InterimCurves interim_curves(const Scenario& sc, std::size_t grid_size, const ExpectationEngine& engine,
                             std::vector<std::size_t> users = {});

struct UserReward {
  std::size_t user = 0;
  std::vector<double> r;        // r_i on the grid
  std::vector<double> envelope; // integral of gamma_i from the lower bound
};

/// Reward schedule r_i(theta) = int_lower^theta gamma_i - theta gamma_i(theta) - V_i(theta).
///
/// Between grid points gamma and V are linear, the envelope is the exact
/// integral of the linear gamma, and r follows from the same identity. At the
/// grid points the envelope is the cumulative trapezoid.
struct RewardSchedule {
  std::vector<double> grid;
  std::vector<UserReward> users;
  const UserReward& of(std::size_t i) const;
};

RewardSchedule reward_schedule(const InterimCurves& curves);

/// Piecewise evaluators on the interim grid (types clamped to the grid range).
double gamma_at(const InterimCurves& curves, std::size_t i, double theta);
double v_at(const InterimCurves& curves, std::size_t i, double theta);
double c_at(const InterimCurves& curves, std::size_t i, double theta);
double reward_at(const InterimCurves& curves, const RewardSchedule& rewards, std::size_t i, double theta);

/// Reward paid ex post: R_i(theta_hat) = r_i(theta_hat_i).
Eigen::VectorXd ex_post_rewards(const InterimCurves& curves, const RewardSchedule& rewards,
                                const TypeProfile& reported);

/// Users whose reward is negative somewhere on the grid, with the offending
/// (theta, r) pairs.
struct NegativeReward {
  std::size_t user;
  double theta;
  double r;
};
std::vector<NegativeReward> negative_rewards(const RewardSchedule& rewards);

/// sum_i int (C_i - r_i) f over the support.
double cp_expected_utility(const Scenario& sc, const InterimCurves& curves, const RewardSchedule& rewards);

/// sum_i int (C_i + V_i + phi gamma_i) f over the support; equals
/// cp_expected_utility by integration by parts.
double cp_virtual_surplus(const Scenario& sc, const InterimCurves& curves);

/// CSV with columns user,theta,gamma,V,C,r (12 significant digits).
void write_curves_csv(std::ostream& os, const InterimCurves& curves, const RewardSchedule& rewards);

} // namespace netmech

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "netmech/mechanism.hpp"

namespace netmech {

/// Interim utility of user i with true type theta_true reporting theta_hat:
/// V_i(theta_hat) + theta_true * gamma_i(theta_hat) + r_i(theta_hat).
double interim_utility(const InterimCurves& curves, const RewardSchedule& rewards, std::size_t i,
                       double theta_true, double theta_hat);

struct Tolerances {
  double ic = 1e-6;
  double ir = 1e-8;
  double mono = 1e-8;

  /// Quadrature defaults, or three standard errors of the gamma estimate
  /// (scaled by the support width) for Monte Carlo curves.
  static Tolerances for_curves(const InterimCurves& curves);
};

/// Location of an extreme value.
struct Witness {
  std::size_t user = 0;
  double theta = 0.0;
  double theta_hat = 0.0;
  double value = 0.0;
};

struct UserVerification {
  std::size_t user = 0;
  double ic_max_gain = 0.0;
  Witness ic;
  bool argmax_near_truth = true;
  double ir_min = 0.0;
  double ir_theta = 0.0;
  double binding_gap = 0.0;
  double gamma_min_slope = 0.0;
  std::size_t slope_index = 0;
};

struct VerificationReport {
  Tolerances tol;
  std::string estimator;

  bool ic_checked = false;
  double ic_max_gain = 0.0;
  Witness ic_witness;
  bool ic_argmax_ok = true;
  Witness argmax_witness; // worst distance between argmax report and truth
  std::size_t true_grid = 0;
  std::size_t report_grid = 0;

  bool ir_checked = false;
  double ir_min = 0.0;
  Witness ir_witness;
  double ir_binding_gap = 0.0;

  bool mono_checked = false;
  double gamma_min_slope = 0.0;
  Witness mono_witness; // theta = left end of the worst forward difference
  std::size_t mono_index = 0;

  std::vector<UserVerification> per_user;

  bool ic_pass() const { return !ic_checked || (ic_max_gain <= tol.ic && ic_argmax_ok); }
  bool ir_pass() const { return !ir_checked || (ir_min >= -tol.ir && ir_binding_gap <= tol.ir); }
  bool mono_pass() const { return !mono_checked || gamma_min_slope >= -tol.mono; }
  bool pass() const { return ic_pass() && ir_pass() && mono_pass(); }

  /// Fold the checks present in other into this report.
  void merge(const VerificationReport& other);

  /// Human-readable PASS/FAIL lines with worst-case witnesses.
  std::string summary() const;
  /// One row per user.
  void write_csv(std::ostream& os) const;
};

/// For every user, every true type on a true_grid-point grid and every report
/// on a report_grid-point grid: largest misreport gain, and whether the
/// best report lies within one report step of the true type.
VerificationReport verify_ic(const Scenario& sc, const InterimCurves& curves, const RewardSchedule& rewards,
                             std::size_t true_grid, std::size_t report_grid,
                             const Tolerances& tol);
VerificationReport verify_ic(const Scenario& sc, const InterimCurves& curves, const RewardSchedule& rewards,
                             std::size_t true_grid = 21, std::size_t report_grid = 201);

/// Truthful interim utility is nonnegative and binds at the lowest type.
VerificationReport verify_ir(const Scenario& sc, const InterimCurves& curves, const RewardSchedule& rewards,
                             std::size_t true_grid, const Tolerances& tol);
VerificationReport verify_ir(const Scenario& sc, const InterimCurves& curves, const RewardSchedule& rewards,
                             std::size_t true_grid = 21);

/// gamma_i is non-decreasing on the interim grid.
VerificationReport verify_monotonicity(const InterimCurves& curves, const Tolerances& tol);
VerificationReport verify_monotonicity(const InterimCurves& curves);

/// Forward-difference check on a bare array; returns (min difference, index).
std::pair<double, std::size_t> min_forward_difference(const std::vector<double>& values);

/// CP ex-post utility when one user misreports while the rest are truthful.
struct ImpactRow {
  std::size_t deviator = 0;
  double baseline = 0.0;     // all users truthful
  double worst = 0.0;        // minimum over the deviator's reports
  double worst_report = 0.0;
  std::vector<double> reports;
  std::vector<double> sweep; // CP utility per report
  double drop() const { return baseline - worst; }
};

ImpactRow untruthful_impact(const Scenario& sc, const InterimCurves& curves, const RewardSchedule& rewards,
                            const TypeProfile& theta_true, std::size_t deviator, std::size_t report_grid);

/// Direct maximisation of the pointwise virtual surplus
///   sum_i (s+a-p) x_i - ((t+b)/2) x_i^2 + phi_i x_i sum_j g_ij x_j  over x >= 0.
/// Test oracle for demand_solve.
enum class OracleMethod { GridRefine, GradientAscent };

double virtual_surplus_objective(const Scenario& sc, const TypeProfile& theta, const DemandProfile& x);

DemandProfile bruteforce_oracle(const Scenario& sc, const TypeProfile& theta, OracleMethod method);

} // namespace netmech

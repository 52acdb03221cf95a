#include "netmech/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "netmech/errors.hpp"

namespace netmech {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTolerance = 1e-12;

std::vector<double> linspace(double lo, double hi, std::size_t points) {
  if (points < 2) throw std::invalid_argument("grid needs at least two points");
  std::vector<double> out(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) out[k] = lo + static_cast<double>(k) * step;
  out.back() = hi;
  return out;
}

void check_type(const InterimCurves& curves, double theta, const char* what) {
  if (!(theta >= curves.grid.front() && theta <= curves.grid.back())) {
    std::ostringstream os;
    os << what << "=" << theta << " outside [" << curves.grid.front() << ", " << curves.grid.back() << "]";
    throw std::domain_error(os.str());
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

UserVerification& user_entry(VerificationReport& report, std::size_t user) {
  for (auto& u : report.per_user) {
    if (u.user == user) return u;
  }
  report.per_user.push_back(UserVerification{});
  report.per_user.back().user = user;
  return report.per_user.back();
}

} // namespace

double interim_utility(const InterimCurves& curves, const RewardSchedule& rewards, std::size_t i,
                       double theta_true, double theta_hat) {
  check_type(curves, theta_true, "theta_true");
  check_type(curves, theta_hat, "theta_hat");
  return v_at(curves, i, theta_hat) + theta_true * gamma_at(curves, i, theta_hat) +
         reward_at(curves, rewards, i, theta_hat);
}

Tolerances Tolerances::for_curves(const InterimCurves& curves) {
  Tolerances tol;
  if (curves.engine.kind == ExpectationEngine::Kind::MonteCarlo) {
    double se = 0.0;
    for (const auto& uc : curves.users) {
      for (double s : uc.gamma_se) se = std::max(se, s);
    }
    const double width = curves.grid.back() - curves.grid.front();
    tol.ic = std::max(tol.ic, 3.0 * se * width);
  }
  return tol;
}

void VerificationReport::merge(const VerificationReport& other) {
  if (estimator.empty()) estimator = other.estimator;
  if (other.ic_checked) {
    ic_checked = true;
    ic_max_gain = other.ic_max_gain;
    ic_witness = other.ic_witness;
    ic_argmax_ok = other.ic_argmax_ok;
    argmax_witness = other.argmax_witness;
    true_grid = other.true_grid;
    report_grid = other.report_grid;
    tol.ic = other.tol.ic;
  }
  if (other.ir_checked) {
    ir_checked = true;
    ir_min = other.ir_min;
    ir_witness = other.ir_witness;
    ir_binding_gap = other.ir_binding_gap;
    tol.ir = other.tol.ir;
  }
  if (other.mono_checked) {
    mono_checked = true;
    gamma_min_slope = other.gamma_min_slope;
    mono_witness = other.mono_witness;
    mono_index = other.mono_index;
    tol.mono = other.tol.mono;
  }
  for (const auto& u : other.per_user) {
    auto& mine = user_entry(*this, u.user);
    if (other.ic_checked) {
      mine.ic_max_gain = u.ic_max_gain;
      mine.ic = u.ic;
      mine.argmax_near_truth = u.argmax_near_truth;
    }
    if (other.ir_checked) {
      mine.ir_min = u.ir_min;
      mine.ir_theta = u.ir_theta;
      mine.binding_gap = u.binding_gap;
    }
    if (other.mono_checked) {
      mine.gamma_min_slope = u.gamma_min_slope;
      mine.slope_index = u.slope_index;
    }
  }
  std::sort(per_user.begin(), per_user.end(),
            [](const UserVerification& a, const UserVerification& b) { return a.user < b.user; });
}

std::string VerificationReport::summary() const {
  std::ostringstream os;
  os << "estimator: " << estimator << "\n";
  if (ic_checked) {
    os << (ic_max_gain <= tol.ic ? "PASS" : "FAIL") << " incentive compatibility: max misreport gain "
       << fmt(ic_max_gain) << " (tol " << fmt(tol.ic) << ") at user " << ic_witness.user << ", theta="
       << fmt(ic_witness.theta) << ", report=" << fmt(ic_witness.theta_hat) << " [" << true_grid
       << " true x " << report_grid << " reports]\n";
    os << (ic_argmax_ok ? "PASS" : "FAIL") << " truthful report is the best report within one grid step"
       << " (worst: user " << argmax_witness.user << ", theta=" << fmt(argmax_witness.theta)
       << ", best report=" << fmt(argmax_witness.theta_hat) << ")\n";
  }
  if (ir_checked) {
    os << (ir_min >= -tol.ir ? "PASS" : "FAIL") << " individual rationality: min truthful utility "
       << fmt(ir_min) << " (tol " << fmt(tol.ir) << ") at user " << ir_witness.user << ", theta="
       << fmt(ir_witness.theta) << "\n";
    os << (ir_binding_gap <= tol.ir ? "PASS" : "FAIL") << " participation binds at the lowest type: max |U(lower,lower)| "
       << fmt(ir_binding_gap) << "\n";
  }
  if (mono_checked) {
    os << (mono_pass() ? "PASS" : "FAIL") << " gamma monotonicity: min forward difference "
       << fmt(gamma_min_slope) << " (tol " << fmt(tol.mono) << ") at user " << mono_witness.user
       << ", grid index " << mono_index << ", theta=" << fmt(mono_witness.theta) << "\n";
  }
  os << (pass() ? "PASS" : "FAIL") << " overall\n";
  return os.str();
}

void VerificationReport::write_csv(std::ostream& os) const {
  os << "user,ic_max_gain,ic_theta,ic_theta_hat,argmax_near_truth,ir_min,ir_theta,binding_gap,"
        "gamma_min_slope,slope_index\n";
  for (const auto& u : per_user) {
    os << u.user << ',' << fmt12(u.ic_max_gain) << ',' << fmt12(u.ic.theta) << ',' << fmt12(u.ic.theta_hat)
       << ',' << (u.argmax_near_truth ? 1 : 0) << ',' << fmt12(u.ir_min) << ',' << fmt12(u.ir_theta) << ','
       << fmt12(u.binding_gap) << ',' << fmt12(u.gamma_min_slope) << ',' << u.slope_index << '\n';
  }
}

VerificationReport verify_ic(const Scenario& sc, const InterimCurves& curves, const RewardSchedule& rewards,
                             std::size_t true_grid, std::size_t report_grid, const Tolerances& tol) {
  if (true_grid < 9 || report_grid < 9) throw std::invalid_argument("verify_ic: grids must have >= 9 points");
  VerificationReport report;
  report.tol = tol;
  report.estimator = curves.engine.describe();
  report.ic_checked = true;
  report.true_grid = true_grid;
  report.report_grid = report_grid;
  report.ic_max_gain = -kInf;

  const auto trues = linspace(sc.dist.lower(), sc.dist.upper(), true_grid);
  const auto reports = linspace(sc.dist.lower(), sc.dist.upper(), report_grid);
  const double step = reports[1] - reports[0];
  double worst_distance = -1.0;
  std::vector<double> values(reports.size());

  for (const auto& uc : curves.users) {
    auto& ue = user_entry(report, uc.user);
    ue.ic_max_gain = -kInf;
    for (double theta : trues) {
      const double truthful = interim_utility(curves, rewards, uc.user, theta, theta);
      double best = -kInf;
      for (std::size_t r = 0; r < reports.size(); ++r) {
        values[r] = interim_utility(curves, rewards, uc.user, theta, reports[r]);
        best = std::max(best, values[r]);
      }
      std::size_t arg = 0;
      double arg_distance = kInf;
      for (std::size_t r = 0; r < reports.size(); ++r) {
        if (values[r] >= best - kTieTolerance && std::abs(reports[r] - theta) < arg_distance) {
          arg = r;
          arg_distance = std::abs(reports[r] - theta);
        }
      }
      const double gain = best - truthful;
      if (gain > ue.ic_max_gain) {
        ue.ic_max_gain = gain;
        ue.ic = {uc.user, theta, reports[arg], gain};
      }
      if (gain > report.ic_max_gain) {
        report.ic_max_gain = gain;
        report.ic_witness = {uc.user, theta, reports[arg], gain};
      }
      const bool near = arg_distance <= step * (1.0 + 1e-9);
      if (!near) ue.argmax_near_truth = false;
      if (arg_distance > worst_distance) {
        worst_distance = arg_distance;
        report.argmax_witness = {uc.user, theta, reports[arg], values[arg]};
      }
    }
    if (!ue.argmax_near_truth) report.ic_argmax_ok = false;
  }
  return report;
}

VerificationReport verify_ic(const Scenario& sc, const InterimCurves& curves, const RewardSchedule& rewards,
                             std::size_t true_grid, std::size_t report_grid) {
  return verify_ic(sc, curves, rewards, true_grid, report_grid, Tolerances::for_curves(curves));
}

VerificationReport verify_ir(const Scenario& sc, const InterimCurves& curves, const RewardSchedule& rewards,
                             std::size_t true_grid, const Tolerances& tol) {
  if (true_grid < 2) throw std::invalid_argument("verify_ir: true grid needs >= 2 points");
  VerificationReport report;
  report.tol = tol;
  report.estimator = curves.engine.describe();
  report.ir_checked = true;
  report.ir_min = kInf;
  const auto trues = linspace(sc.dist.lower(), sc.dist.upper(), true_grid);
  for (const auto& uc : curves.users) {
    auto& ue = user_entry(report, uc.user);
    ue.ir_min = kInf;
    for (double theta : trues) {
      const double u = interim_utility(curves, rewards, uc.user, theta, theta);
      if (u < ue.ir_min) {
        ue.ir_min = u;
        ue.ir_theta = theta;
      }
    }
    const double lo = sc.dist.lower();
    ue.binding_gap = std::abs(interim_utility(curves, rewards, uc.user, lo, lo));
    if (ue.ir_min < report.ir_min) {
      report.ir_min = ue.ir_min;
      report.ir_witness = {uc.user, ue.ir_theta, ue.ir_theta, ue.ir_min};
    }
    report.ir_binding_gap = std::max(report.ir_binding_gap, ue.binding_gap);
  }
  return report;
}

VerificationReport verify_ir(const Scenario& sc, const InterimCurves& curves, const RewardSchedule& rewards,
                             std::size_t true_grid) {
  return verify_ir(sc, curves, rewards, true_grid, Tolerances::for_curves(curves));
}

std::pair<double, std::size_t> min_forward_difference(const std::vector<double>& values) {
  double best = kInf;
  std::size_t at = 0;
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double d = values[k + 1] - values[k];
    if (d < best) {
      best = d;
      at = k;
    }
  }
  return {best, at};
}

VerificationReport verify_monotonicity(const InterimCurves& curves, const Tolerances& tol) {
  VerificationReport report;
  report.tol = tol;
  report.estimator = curves.engine.describe();
  report.mono_checked = true;
  report.gamma_min_slope = kInf;
  for (const auto& uc : curves.users) {
    const auto [slope, at] = min_forward_difference(uc.gamma);
    auto& ue = user_entry(report, uc.user);
    ue.gamma_min_slope = slope;
    ue.slope_index = at;
    if (slope < report.gamma_min_slope) {
      report.gamma_min_slope = slope;
      report.mono_index = at;
      report.mono_witness = {uc.user, curves.grid[at], curves.grid[at], slope};
    }
  }
  return report;
}

VerificationReport verify_monotonicity(const InterimCurves& curves) {
  return verify_monotonicity(curves, Tolerances::for_curves(curves));
}

ImpactRow untruthful_impact(const Scenario& sc, const InterimCurves& curves, const RewardSchedule& rewards,
                            const TypeProfile& theta_true, std::size_t deviator, std::size_t report_grid) {
  if (deviator >= sc.size()) throw std::out_of_range("untruthful_impact: deviator out of range");
  const DemandSolver solver(sc);
  check_profile(sc, theta_true);

  auto cp_at = [&](const TypeProfile& reported) {
    const DemandProfile x = solver.solve(reported);
    return cp_ex_post_utility(sc, x, ex_post_rewards(curves, rewards, reported));
  };

  ImpactRow row;
  row.deviator = deviator;
  row.baseline = cp_at(theta_true);
  row.reports = linspace(sc.dist.lower(), sc.dist.upper(), report_grid);
  row.sweep.resize(row.reports.size());
  row.worst = kInf;
  TypeProfile reported = theta_true;
  for (std::size_t r = 0; r < row.reports.size(); ++r) {
    reported(static_cast<Eigen::Index>(deviator)) = row.reports[r];
    row.sweep[r] = cp_at(reported);
    if (row.sweep[r] < row.worst) {
      row.worst = row.sweep[r];
      row.worst_report = row.reports[r];
    }
  }
  // the truthful report is always a candidate
  if (row.baseline < row.worst) {
    row.worst = row.baseline;
    row.worst_report = theta_true(static_cast<Eigen::Index>(deviator));
  }
  return row;
}

namespace {

struct Surplus {
  double margin;    // s + a - p
  double curvature; // t + b
  Eigen::VectorXd phi;
  Eigen::MatrixXd g;

  double value(const Eigen::VectorXd& x) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      total += margin * x(i) - 0.5 * curvature * x(i) * x(i) + phi(i) * x(i) * g.row(i).dot(x);
    }
    return total;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    return Eigen::VectorXd::Constant(x.size(), margin) - curvature * x + phi.cwiseProduct(g * x) +
           g.transpose() * phi.cwiseProduct(x);
  }
  Eigen::MatrixXd hessian() const {
    const auto n = g.rows();
    Eigen::MatrixXd h(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) h(i, j) = i == j ? -curvature : phi(i) * g(i, j) + phi(j) * g(j, i);
    }
    return h;
  }
};

Surplus make_surplus(const Scenario& sc, const TypeProfile& theta) {
  check_profile(sc, theta);
  Surplus s{sc.params.net_margin(), sc.params.curvature(), Eigen::VectorXd(theta.size()), sc.network.weights()};
  for (Eigen::Index i = 0; i < theta.size(); ++i) s.phi(i) = sc.dist.virtual_value(theta(i));
  return s;
}

} // namespace

double virtual_surplus_objective(const Scenario& sc, const TypeProfile& theta, const DemandProfile& x) {
  return make_surplus(sc, theta).value(x);
}

DemandProfile bruteforce_oracle(const Scenario& sc, const TypeProfile& theta, OracleMethod method) {
  const Surplus obj = make_surplus(sc, theta);
  const auto n = theta.size();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(obj.hessian(), Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  const double bottom = eig.eigenvalues().minCoeff();
  if (!(top < 0.0)) throw SolverError("virtual surplus is not strictly concave (Hessian eigenvalue >= 0)");

  if (method == OracleMethod::GradientAscent) {
    // Projected gradient ascent with step 1/L on the nonnegative orthant.
    const double step = 1.0 / -bottom;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int iter = 0; iter < 1000000; ++iter) {
      Eigen::VectorXd next = (x + step * obj.gradient(x)).cwiseMax(0.0);
      const double change = (next - x).cwiseAbs().maxCoeff();
      x = std::move(next);
      if (change < 1e-15) break;
    }
    return x;
  }

  if (n > 3) throw std::invalid_argument("bruteforce_oracle: grid search supports at most 3 users");
  // Box bound from row dominance of the negated Hessian: |x|_inf <= margin / min row margin.
  const Eigen::MatrixXd h = obj.hessian();
  double min_margin = kInf;
  for (Eigen::Index i = 0; i < n; ++i) {
    min_margin = std::min(min_margin, -h(i, i) - (h.row(i).cwiseAbs().sum() - std::abs(h(i, i))));
  }
  double upper = min_margin > 0.0 ? 1.5 * obj.margin / min_margin : 10.0 * obj.margin / -top;
  upper = std::max(upper, 1e-12);

  constexpr int kPoints = 21;
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, upper);
  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  for (int round = 0; round < 200; ++round) {
    const Eigen::VectorXd step = (hi - lo) / (kPoints - 1);
    double best_value = -kInf;
    long total = 1;
    for (Eigen::Index d = 0; d < n; ++d) total *= kPoints;
    Eigen::VectorXd x(n);
    for (long idx = 0; idx < total; ++idx) {
      long rest = idx;
      for (Eigen::Index d = 0; d < n; ++d) {
        x(d) = lo(d) + static_cast<double>(rest % kPoints) * step(d);
        rest /= kPoints;
      }
      const double v = obj.value(x);
      if (v > best_value) {
        best_value = v;
        best = x;
      }
    }
    if (step.maxCoeff() < 1e-9) break;
    lo = (best - 2.0 * step).cwiseMax(0.0);
    hi = best + 2.0 * step;
  }
  return best;
}

} // namespace netmech

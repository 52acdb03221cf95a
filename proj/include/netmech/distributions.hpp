#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace netmech {

/// Vector of per-user types (true or reported), one entry per user.
using TypeProfile = Eigen::VectorXd;

enum class DistributionFamily { Uniform, TruncatedNormal, TruncatedExponential };

std::string to_string(DistributionFamily family);

/// Continuous law of a user's private type on a bounded support [lower, upper].
///
/// Besides pdf/cdf the class exposes the hazard rate f/(1-F) and the virtual
/// value theta - (1-F)/f. The hazard has a pole at the upper end of the
/// support; the virtual value is extended there by its limit, phi(upper) = upper.
class TypeDistribution {
public:
  static TypeDistribution uniform(double lower, double upper);
  static TypeDistribution truncated_normal(double mu, double sigma, double lower, double upper);
  static TypeDistribution truncated_exponential(double rate, double lower, double upper);

  DistributionFamily family() const { return family_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double width() const { return upper_ - lower_; }
  /// Family parameters: (mu, sigma) for the normal, (rate) for the exponential.
  const std::vector<double>& params() const { return params_; }

  bool contains(double theta) const { return theta >= lower_ && theta <= upper_; }

  double pdf(double theta) const;
  double cdf(double theta) const;
  /// 1 - F(theta), computed without cancellation.
  double survival(double theta) const;
  /// Inverse cdf; u in [0, 1].
  double quantile(double u) const;
  double mean() const;

  /// f / (1 - F). Throws std::domain_error outside [lower, upper).
  double hazard(double theta) const;
  /// (1 - F) / f, the inverse hazard. Zero at the upper bound.
  double inverse_hazard(double theta) const;
  /// theta - (1 - F)/f. Throws std::domain_error outside [lower, upper].
  double virtual_value(double theta) const;
  /// d phi / d theta. Analytic for uniform and exponential families, central
  /// differences with step 1e-6 * width otherwise.
  double virtual_value_derivative(double theta) const;
  bool has_analytic_virtual_value_derivative() const {
    return family_ != DistributionFamily::TruncatedNormal;
  }

  /// theta * f(theta) - (1 - F(theta)), i.e. phi(theta) * f(theta) without the pole.
  double virtual_density(double theta) const;

  /// n iid draws by inverse-cdf sampling. Deterministic in (seed, n).
  TypeProfile sample(std::size_t n, std::uint64_t seed) const;

  std::string describe() const;

private:
  TypeDistribution(DistributionFamily family, std::vector<double> params, double lower, double upper);
  void check_support(double theta, const char* what) const;

  DistributionFamily family_;
  std::vector<double> params_;
  double lower_;
  double upper_;
  double norm_ = 1.0; // normaliser of the truncated law
};

/// Outcome of the grid check for monotone hazard and nonnegative virtual value.
struct RegularityReport {
  bool pass = false;
  std::size_t grid_points = 0;
  double min_hazard_increment = 0.0;
  double hazard_increment_at = 0.0; // left end of the worst increment
  double min_virtual_value = 0.0;
  double virtual_value_at = 0.0;
  std::string message() const;
};

inline constexpr double kRegularityTolerance = 1e-12;

/// Check on `grid_points` equally spaced types in [lower, upper) (the pole at
/// upper is excluded) that the hazard is non-decreasing and phi >= 0.
/// Throws std::invalid_argument for grid_points < 16.
RegularityReport validate_regularity(const TypeDistribution& dist, std::size_t grid_points = 512);

/// Free-function form of TypeDistribution::virtual_value.
double virtual_value(const TypeDistribution& dist, double theta);

/// n iid types drawn from dist; identical for identical (n, seed).
TypeProfile sample_profile(const TypeDistribution& dist, std::size_t n, std::uint64_t seed);

/// Counter-based uniform in [0, 1): splitmix64 of (seed, index). Used wherever
/// per-sample randomness must not depend on evaluation order.
double counter_uniform(std::uint64_t seed, std::uint64_t index);

} // namespace netmech

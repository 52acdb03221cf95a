#include "netmech/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace netmech {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double std_normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double std_normal_ccdf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

double std_normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  if (p < 0.5) return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
  return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * (1.0 - p));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

} // namespace

std::string to_string(DistributionFamily family) {
  switch (family) {
  case DistributionFamily::Uniform: return "uniform";
  case DistributionFamily::TruncatedNormal: return "truncated_normal";
  case DistributionFamily::TruncatedExponential: return "truncated_exponential";
  }
  return "unknown";
}

double counter_uniform(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t bits = splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ULL));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

TypeDistribution::TypeDistribution(DistributionFamily family, std::vector<double> params,
                                   double lower, double upper)
    : family_(family), params_(std::move(params)), lower_(lower), upper_(upper) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper)) {
    throw std::invalid_argument("type support requires finite lower < upper");
  }
  switch (family_) {
  case DistributionFamily::Uniform:
    norm_ = 1.0;
    break;
  case DistributionFamily::TruncatedNormal: {
    const double mu = params_.at(0);
    const double sigma = params_.at(1);
    if (!(sigma > 0.0) || !std::isfinite(mu)) {
      throw std::invalid_argument("truncated normal requires finite mu and sigma > 0");
    }
    const double alpha = (lower_ - mu) / sigma;
    const double beta = (upper_ - mu) / sigma;
    norm_ = alpha > 0.0 ? std_normal_ccdf(alpha) - std_normal_ccdf(beta)
                        : std_normal_cdf(beta) - std_normal_cdf(alpha);
    if (!(norm_ > 0.0)) throw std::invalid_argument("truncated normal has no mass on the support");
    break;
  }
  case DistributionFamily::TruncatedExponential: {
    const double rate = params_.at(0);
    if (!(rate > 0.0) || !std::isfinite(rate)) {
      throw std::invalid_argument("truncated exponential requires rate > 0");
    }
    norm_ = -std::expm1(-rate * width());
    break;
  }
  }
}

TypeDistribution TypeDistribution::uniform(double lower, double upper) {
  return TypeDistribution(DistributionFamily::Uniform, {}, lower, upper);
}

TypeDistribution TypeDistribution::truncated_normal(double mu, double sigma, double lower,
                                                    double upper) {
  return TypeDistribution(DistributionFamily::TruncatedNormal, {mu, sigma}, lower, upper);
}

TypeDistribution TypeDistribution::truncated_exponential(double rate, double lower, double upper) {
  return TypeDistribution(DistributionFamily::TruncatedExponential, {rate}, lower, upper);
}

void TypeDistribution::check_support(double theta, const char* what) const {
  if (!(theta >= lower_ && theta <= upper_)) {
    std::ostringstream os;
    os << what << ": theta=" << theta << " outside support [" << lower_ << ", " << upper_ << "]";
    throw std::domain_error(os.str());
  }
}

double TypeDistribution::pdf(double theta) const {
  if (theta < lower_ || theta > upper_) return 0.0;
  switch (family_) {
  case DistributionFamily::Uniform:
    return 1.0 / width();
  case DistributionFamily::TruncatedNormal: {
    const double sigma = params_[1];
    return std_normal_pdf((theta - params_[0]) / sigma) / (sigma * norm_);
  }
  case DistributionFamily::TruncatedExponential: {
    const double rate = params_[0];
    return rate * std::exp(-rate * (theta - lower_)) / norm_;
  }
  }
  return 0.0;
}

double TypeDistribution::cdf(double theta) const {
  if (theta <= lower_) return 0.0;
  if (theta >= upper_) return 1.0;
  switch (family_) {
  case DistributionFamily::Uniform:
    return (theta - lower_) / width();
  case DistributionFamily::TruncatedNormal: {
    const double mu = params_[0];
    const double sigma = params_[1];
    const double alpha = (lower_ - mu) / sigma;
    const double z = (theta - mu) / sigma;
    if (alpha > 0.0) return (std_normal_ccdf(alpha) - std_normal_ccdf(z)) / norm_;
    return (std_normal_cdf(z) - std_normal_cdf(alpha)) / norm_;
  }
  case DistributionFamily::TruncatedExponential:
    return -std::expm1(-params_[0] * (theta - lower_)) / norm_;
  }
  return 0.0;
}

double TypeDistribution::survival(double theta) const {
  if (theta <= lower_) return 1.0;
  if (theta >= upper_) return 0.0;
  switch (family_) {
  case DistributionFamily::Uniform:
    return (upper_ - theta) / width();
  case DistributionFamily::TruncatedNormal: {
    const double mu = params_[0];
    const double sigma = params_[1];
    const double z = (theta - mu) / sigma;
    const double beta = (upper_ - mu) / sigma;
    if (z > 0.0) return (std_normal_ccdf(z) - std_normal_ccdf(beta)) / norm_;
    return (std_normal_cdf(beta) - std_normal_cdf(z)) / norm_;
  }
  case DistributionFamily::TruncatedExponential: {
    const double rate = params_[0];
    // e^{-rate(theta-lower)} - e^{-rate*width}
    return std::exp(-rate * (theta - lower_)) * -std::expm1(-rate * (upper_ - theta)) / norm_;
  }
  }
  return 0.0;
}

double TypeDistribution::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("quantile: u outside [0, 1]");
  double theta = lower_;
  switch (family_) {
  case DistributionFamily::Uniform:
    theta = lower_ + u * width();
    break;
  case DistributionFamily::TruncatedNormal: {
    const double mu = params_[0];
    const double sigma = params_[1];
    const double alpha = (lower_ - mu) / sigma;
    const double beta = (upper_ - mu) / sigma;
    double z = 0.0;
    if (alpha > 0.0) {
      // work in the upper tail to keep precision
      const double q = std_normal_ccdf(alpha) - u * norm_;
      z = -std_normal_quantile(q);
    } else {
      z = std_normal_quantile(std_normal_cdf(alpha) + u * norm_);
    }
    z = std::clamp(z, alpha, beta);
    theta = mu + sigma * z;
    break;
  }
  case DistributionFamily::TruncatedExponential:
    theta = lower_ - std::log1p(-u * norm_) / params_[0];
    break;
  }
  return std::clamp(theta, lower_, upper_);
}

double TypeDistribution::mean() const {
  switch (family_) {
  case DistributionFamily::Uniform:
    return 0.5 * (lower_ + upper_);
  case DistributionFamily::TruncatedNormal: {
    const double mu = params_[0];
    const double sigma = params_[1];
    const double alpha = (lower_ - mu) / sigma;
    const double beta = (upper_ - mu) / sigma;
    return mu + sigma * (std_normal_pdf(alpha) - std_normal_pdf(beta)) / norm_;
  }
  case DistributionFamily::TruncatedExponential: {
    const double rate = params_[0];
    return lower_ + 1.0 / rate - width() * std::exp(-rate * width()) / norm_;
  }
  }
  return 0.0;
}

double TypeDistribution::inverse_hazard(double theta) const {
  check_support(theta, "inverse_hazard");
  switch (family_) {
  case DistributionFamily::Uniform:
    return upper_ - theta;
  case DistributionFamily::TruncatedNormal: {
    const double mu = params_[0];
    const double sigma = params_[1];
    const double z = (theta - mu) / sigma;
    const double beta = (upper_ - mu) / sigma;
    const double tail = z > 0.0 ? std_normal_ccdf(z) - std_normal_ccdf(beta)
                                : std_normal_cdf(beta) - std_normal_cdf(z);
    return sigma * tail / std_normal_pdf(z);
  }
  case DistributionFamily::TruncatedExponential: {
    const double rate = params_[0];
    return -std::expm1(-rate * (upper_ - theta)) / rate;
  }
  }
  return 0.0;
}

double TypeDistribution::hazard(double theta) const {
  if (!(theta >= lower_ && theta < upper_)) {
    std::ostringstream os;
    os << "hazard: theta=" << theta << " outside [" << lower_ << ", " << upper_ << ")";
    throw std::domain_error(os.str());
  }
  return 1.0 / inverse_hazard(theta);
}

double TypeDistribution::virtual_value(double theta) const {
  check_support(theta, "virtual_value");
  if (theta == upper_) return upper_;
  return theta - inverse_hazard(theta);
}

double TypeDistribution::virtual_value_derivative(double theta) const {
  check_support(theta, "virtual_value_derivative");
  switch (family_) {
  case DistributionFamily::Uniform:
    return 2.0;
  case DistributionFamily::TruncatedExponential:
    return 1.0 + std::exp(-params_[0] * (upper_ - theta));
  case DistributionFamily::TruncatedNormal:
    break;
  }
  const double step = 1e-6 * width();
  const double lo = std::max(lower_, theta - step);
  const double hi = std::min(upper_, theta + step);
  return (virtual_value(hi) - virtual_value(lo)) / (hi - lo);
}

double TypeDistribution::virtual_density(double theta) const {
  return theta * pdf(theta) - survival(theta);
}

TypeProfile TypeDistribution::sample(std::size_t n, std::uint64_t seed) const {
  TypeProfile out(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    out(static_cast<Eigen::Index>(k)) = quantile(counter_uniform(seed, k));
  }
  return out;
}

std::string TypeDistribution::describe() const {
  std::ostringstream os;
  os << to_string(family_);
  if (family_ == DistributionFamily::TruncatedNormal) {
    os << "(mu=" << params_[0] << ", sigma=" << params_[1] << ")";
  } else if (family_ == DistributionFamily::TruncatedExponential) {
    os << "(rate=" << params_[0] << ")";
  }
  os << " on [" << lower_ << ", " << upper_ << "]";
  return os.str();
}

std::string RegularityReport::message() const {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << " regularity on " << grid_points
     << " points: min hazard increment " << min_hazard_increment << " at theta="
     << hazard_increment_at << ", min virtual value " << min_virtual_value
     << " at theta=" << virtual_value_at;
  if (!pass) {
    if (min_hazard_increment < -kRegularityTolerance) os << "; hazard is not non-decreasing";
    if (min_virtual_value < -kRegularityTolerance) os << "; phi(theta) >= 0 fails";
  }
  return os.str();
}

RegularityReport validate_regularity(const TypeDistribution& dist, std::size_t grid_points) {
  if (grid_points < 16) throw std::invalid_argument("validate_regularity: grid_points must be >= 16");
  RegularityReport report;
  report.grid_points = grid_points;
  report.min_hazard_increment = std::numeric_limits<double>::infinity();
  report.min_virtual_value = std::numeric_limits<double>::infinity();

  const double step = dist.width() / static_cast<double>(grid_points);
  double prev_hazard = 0.0;
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double theta = dist.lower() + static_cast<double>(k) * step;
    const double h = dist.hazard(theta);
    const double phi = dist.virtual_value(theta);
    if (phi < report.min_virtual_value) {
      report.min_virtual_value = phi;
      report.virtual_value_at = theta;
    }
    if (k > 0 && h - prev_hazard < report.min_hazard_increment) {
      report.min_hazard_increment = h - prev_hazard;
      report.hazard_increment_at = theta - step;
    }
    prev_hazard = h;
  }
  report.pass = report.min_hazard_increment >= -kRegularityTolerance &&
                report.min_virtual_value >= -kRegularityTolerance;
  return report;
}

double virtual_value(const TypeDistribution& dist, double theta) {
  return dist.virtual_value(theta);
}

TypeProfile sample_profile(const TypeDistribution& dist, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_profile: n must be >= 1");
  return dist.sample(n, seed);
}

} // namespace netmech

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "netmech/distributions.hpp"

using namespace netmech;

namespace {

// Simpson integral of the density, independent of the closed-form cdf.
double integrate_pdf(const TypeDistribution& d, double to, int panels = 2000) {
  const double h = (to - d.lower()) / panels;
  double sum = d.pdf(d.lower()) + d.pdf(to);
  for (int k = 1; k < panels; ++k) sum += (k % 2 ? 4.0 : 2.0) * d.pdf(d.lower() + k * h);
  return sum * h / 3.0;
}

bool dense_regularity(const TypeDistribution& d, int points) {
  double prev = -1.0;
  for (int k = 0; k < points; ++k) {
    const double th = d.lower() + d.width() * k / points;
    const double h = d.pdf(th) / (1.0 - integrate_pdf(d, th, 400));
    if (k > 0 && h < prev - 1e-9) return false;
    if (th - 1.0 / h < -1e-9) return false;
    prev = h;
  }
  return true;
}

} // namespace

TEST(Uniform, VirtualValueIsTwoThetaMinusUpper) {
  const auto d = TypeDistribution::uniform(0.4, 0.8);
  for (double th : {0.4, 0.5, 0.63, 0.79}) EXPECT_NEAR(d.virtual_value(th), 2.0 * th - 0.8, 1e-14);
  EXPECT_DOUBLE_EQ(d.virtual_value(0.8), 0.8);
  EXPECT_DOUBLE_EQ(d.virtual_value_derivative(0.55), 2.0);
  EXPECT_NEAR(d.mean(), 0.6, 1e-15);
  EXPECT_NEAR(d.hazard(0.6), 1.0 / 0.2, 1e-12);
}

TEST(Uniform, RejectsBadSupport) {
  EXPECT_THROW(TypeDistribution::uniform(0.8, 0.4), std::invalid_argument);
  EXPECT_THROW(TypeDistribution::uniform(0.4, 0.4), std::invalid_argument);
}

TEST(Hazard, UndefinedAtUpperBoundAndOutside) {
  const auto d = TypeDistribution::uniform(0.4, 0.8);
  EXPECT_THROW(d.hazard(0.8), std::domain_error);
  EXPECT_THROW(d.virtual_value(0.9), std::domain_error);
  EXPECT_DOUBLE_EQ(d.inverse_hazard(0.8), 0.0);
}

TEST(TruncatedExponential, VirtualValueMatchesHandValue) {
  const auto d = TypeDistribution::truncated_exponential(2.0, 0.5, 1.5);
  // (1-F)/f at theta = 1 is (1 - e^{-1}) / 2.
  EXPECT_NEAR(d.virtual_value(1.0), 1.0 - (1.0 - std::exp(-1.0)) / 2.0, 1e-12);
  EXPECT_NEAR(d.virtual_value_derivative(1.0), 1.0 + std::exp(-1.0), 1e-12);
}

TEST(TruncatedExponential, CdfMatchesNumericIntegral) {
  const auto d = TypeDistribution::truncated_exponential(2.0, 0.5, 1.5);
  for (double th : {0.6, 0.9, 1.2, 1.5}) EXPECT_NEAR(d.cdf(th), integrate_pdf(d, th), 1e-10);
}

TEST(TruncatedNormal, CdfMatchesNumericIntegral) {
  const auto d = TypeDistribution::truncated_normal(0.6, 0.3, 0.4, 0.8);
  for (double th : {0.45, 0.6, 0.75}) EXPECT_NEAR(d.cdf(th), integrate_pdf(d, th), 1e-10);
}

TEST(TruncatedNormal, NarrowLawFailsRegularity) {
  const auto d = TypeDistribution::truncated_normal(0.6, 0.1, 0.4, 0.8);
  const auto rep = validate_regularity(d);
  EXPECT_FALSE(rep.pass);
  EXPECT_LT(rep.min_virtual_value, -1.0);
  EXPECT_NEAR(rep.virtual_value_at, 0.4, 1e-12);
  EXPECT_NE(rep.message().find("FAIL"), std::string::npos);
}

TEST(Regularity, AgreesWithTenfoldDenserGrid) {
  const std::vector<TypeDistribution> laws{
      TypeDistribution::uniform(0.4, 0.8),
      TypeDistribution::uniform(0.3, 0.9),
      TypeDistribution::truncated_exponential(2.0, 0.5, 1.5),
      TypeDistribution::truncated_exponential(0.5, 0.2, 0.6),
      TypeDistribution::truncated_normal(0.6, 0.1, 0.4, 0.8),
      TypeDistribution::truncated_normal(1.0, 0.5, 0.6, 1.0),
  };
  for (const auto& d : laws) {
    EXPECT_EQ(validate_regularity(d, 64).pass, dense_regularity(d, 640)) << d.describe();
  }
  EXPECT_THROW(validate_regularity(laws[0], 8), std::invalid_argument);
}

TEST(Quantile, RoundTripsThroughCdf) {
  const std::vector<TypeDistribution> laws{
      TypeDistribution::uniform(0.4, 0.8),
      TypeDistribution::truncated_exponential(2.0, 0.5, 1.5),
      TypeDistribution::truncated_normal(0.6, 0.2, 0.4, 0.8),
  };
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& d : laws) {
    for (int k = 0; k < 1000; ++k) {
      const double p = u(rng);
      EXPECT_NEAR(d.cdf(d.quantile(p)), p, 1e-10) << d.describe();
    }
    EXPECT_DOUBLE_EQ(d.quantile(0.0), d.lower());
    EXPECT_DOUBLE_EQ(d.quantile(1.0), d.upper());
  }
}

TEST(Sampling, DeterministicAndInSupport) {
  const auto d = TypeDistribution::truncated_normal(0.6, 0.2, 0.4, 0.8);
  const auto a = d.sample(500, 7);
  const auto b = d.sample(500, 7);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, d.sample(500, 8));
  for (double v : a) EXPECT_TRUE(d.contains(v));
  EXPECT_NEAR(a.mean(), d.mean(), 0.03);
}

TEST(Sampling, CounterUniformIsStateless) {
  EXPECT_EQ(counter_uniform(3, 17), counter_uniform(3, 17));
  EXPECT_NE(counter_uniform(3, 17), counter_uniform(3, 18));
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const double v = counter_uniform(42, k);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(VirtualDensity, EqualsPhiTimesPdf) {
  const auto d = TypeDistribution::truncated_exponential(2.0, 0.5, 1.5);
  for (double th : {0.5, 0.8, 1.3}) EXPECT_NEAR(d.virtual_density(th), d.virtual_value(th) * d.pdf(th), 1e-12);
}

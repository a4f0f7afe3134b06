#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fluctuate/offspring.hpp"

using fluctuate::OffspringDistribution;

TEST_CASE("binary split moments") {
  const auto f = OffspringDistribution::binary_split();
  CHECK(f.mean() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(f.extinction_prob() == 0.0);
  CHECK(f.second_factorial_moment() == doctest::Approx(2.0));
  CHECK(f.pgf(0.3) == doctest::Approx(0.09));
}

TEST_CASE("extinction probability of a quadratic law") {
  // q = 1/4 + q/4 + q^2/2 has roots 1/2 and 1.
  const OffspringDistribution f({0.25, 0.25, 0.5});
  CHECK(f.extinction_prob() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fluctuate::extinction_prob(f) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("h and complement map agree with the pgf") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(2 + trial % 6);
    double total = 0.0;
    for (auto& x : p) total += (x = u(rng));
    p.back() += total;  // keep the law supercritical
    total *= 2.0;
    for (auto& x : p) x /= total;
    double mean = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) mean += static_cast<double>(k) * p[k];
    if (mean <= 1.05) continue;
    const OffspringDistribution f(p);
    for (double s : {0.0, 0.2, 0.7, 0.99}) {
      CHECK(f.h(s) * (1.0 - s) == doctest::Approx(1.0 - f.pgf(s)).epsilon(1e-12));
      CHECK(f.complement_map(1.0 - s) == doctest::Approx(1.0 - f.pgf(s)).epsilon(1e-12));
    }
    CHECK(f.h(1.0) == doctest::Approx(f.mean()).epsilon(1e-12));
    // f(s) < s strictly between q and 1.
    const double q = f.extinction_prob();
    for (double t : {0.1, 0.5, 0.9}) {
      const double s = q + t * (1.0 - q);
      CHECK(f.pgf(s) < s);
    }
    CHECK(f.pgf(q) == doctest::Approx(q).epsilon(1e-12));
  }
}

TEST_CASE("complex pgf stays in the closed unit disk") {
  const OffspringDistribution f({0.1, 0.2, 0.3, 0.4});
  for (int j = 0; j < 64; ++j) {
    const auto s = std::polar(1.0, 2.0 * M_PI * j / 64.0);
    CHECK(std::abs(f.pgf(s)) <= 1.0 + 1e-15);
  }
  CHECK_THROWS_AS(f.pgf(std::complex<double>(1.1, 0.0)), std::domain_error);
}

TEST_CASE("fractional linear law") {
  for (double mu : {1.5, 2.0, 4.0}) {
    const auto f = OffspringDistribution::fractional_linear(mu);
    CHECK(f.mean() == doctest::Approx(mu).epsilon(1e-10));
    CHECK(f.extinction_prob() == doctest::Approx(0.0).epsilon(1e-12));
    for (double s : {0.1, 0.5, 0.9}) CHECK(f.pgf(s) == doctest::Approx(s / (mu - (mu - 1.0) * s)).epsilon(1e-10));
  }
}

TEST_CASE("invalid offspring laws are rejected") {
  CHECK_THROWS_AS(OffspringDistribution({}), std::invalid_argument);
  CHECK_THROWS_AS(OffspringDistribution({-0.1, 0.1, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(OffspringDistribution({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(OffspringDistribution({0.5, 0.0, 0.5}), std::invalid_argument);  // critical
  CHECK_THROWS_AS(OffspringDistribution::fractional_linear(1.0), std::invalid_argument);
}

TEST_CASE("star probe recovers the defect exponent") {
  // Finite variance gives a linear defect.
  const auto f = OffspringDistribution::binary_split();
  const std::vector<double> grid{0.1, 0.01, 0.001, 1e-4};
  const auto report = fluctuate::star_probe(f, grid);
  CHECK(report.omega_estimate == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(report.fitted_slope == doctest::Approx(1.0).epsilon(1e-6));

  // pi_k proportional to k^{-2.5} has defect of order s^{1/2}.
  std::vector<double> p(200001, 0.0);
  double total = 0.0;
  for (std::size_t k = 1; k < p.size(); ++k) total += (p[k] = std::pow(static_cast<double>(k), -2.5));
  for (auto& x : p) x /= total;
  const OffspringDistribution heavy(p);
  const std::vector<double> fine{1e-2, 3e-3, 1e-3};
  const auto r = fluctuate::star_probe(heavy, fine);
  CHECK(r.omega_estimate == doctest::Approx(0.5).epsilon(0.05));

  CHECK_THROWS_AS(fluctuate::star_probe(f, std::vector<double>{0.1, 0.2}), std::invalid_argument);
}

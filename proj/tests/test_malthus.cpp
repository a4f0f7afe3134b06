#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "fluctuate/malthus.hpp"
#include "fluctuate/random.hpp"

using namespace fluctuate;

namespace {

// Offspring law on floor(mu) and floor(mu) + 1 with mean mu.
OffspringDistribution offspring_two_point(double mu) {
  const auto base = static_cast<std::size_t>(mu);
  std::vector<double> p(base + 2, 0.0);
  p[base] = 1.0 - (mu - static_cast<double>(base));
  p[base + 1] = mu - static_cast<double>(base);
  return OffspringDistribution(p);
}

// Independent closed forms for the gamma(k, k lambda) life time.
double gamma_beta(int k, double lambda, double mu) { return k * lambda * (std::pow(mu, 1.0 / k) - 1.0); }

double gamma_n1(int k, double mu) {
  const double r = std::pow(mu, 1.0 / k);
  return (mu - 1.0) * r / (k * mu * (r - 1.0));
}

// Max of k exponentials by direct quadrature of its density.
struct RahnQuadrature {
  double a;
  int k;
  double density(double t) const { return k * a * std::exp(-a * t) * std::pow(-std::expm1(-a * t), k - 1); }
  double lst(double beta) const {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate([&](double t) { return std::exp(-beta * t) * density(t); }, 1e-13);
  }
  double discounted_mean(double beta) const {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate([&](double t) { return t * std::exp(-beta * t) * density(t); }, 1e-13);
  }
  double beta(double mu) const {
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve([&](double b) { return mu * lst(b) - 1.0; }, 1e-9, 50.0 * a,
                                                      boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
  }
};

}  // namespace

TEST_CASE("exponential life time gives beta = lambda (mu - 1) and n1 = 1") {
  for (double lambda : {0.5, 1.0, 3.0}) {
    for (double mu : {1.5, 2.0, 4.0}) {
      const ProliferationModel m(offspring_two_point(mu), LifetimeDistribution(Exponential{lambda}));
      CHECK(m.beta() == doctest::Approx(lambda * (mu - 1.0)).epsilon(1e-12));
      CHECK(m.n1() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("gamma life time closed forms") {
  for (int k : {1, 2, 3, 5, 10}) {
    for (double mu : {1.5, 2.0, 4.0}) {
      const ProliferationModel m(offspring_two_point(mu), LifetimeDistribution(KendallGamma{k, 1.3}));
      CHECK(std::abs(m.beta() - gamma_beta(k, 1.3, mu)) < 1e-10);
      CHECK(std::abs(m.n1() - gamma_n1(k, mu)) < 1e-10);
      CHECK(std::abs(kendall_beta(k, 1.3, mu) - gamma_beta(k, 1.3, mu)) < 1e-12);
      CHECK(std::abs(kendall_n1(k, mu) - gamma_n1(k, mu)) < 1e-12);
    }
  }
  // Two stages and binary fission.
  CHECK(gamma_beta(2, 1.0, 2.0) == doctest::Approx(0.828427124746).epsilon(1e-12));
  CHECK(gamma_n1(2, 2.0) == doctest::Approx(0.853553390593).epsilon(1e-12));
}

TEST_CASE("maximum of exponentials against quadrature") {
  for (int k : {1, 2, 4, 8}) {
    const RahnQuadrature oracle{0.7, k};
    const LifetimeDistribution life(Rahn{0.7, k});
    for (double b : {0.1, 0.5, 2.0}) {
      CHECK(life.laplace_stieltjes(b) == doctest::Approx(oracle.lst(b)).epsilon(1e-10));
      CHECK(life.discounted_mean(b) == doctest::Approx(oracle.discounted_mean(b)).epsilon(1e-10));
    }
    const ProliferationModel m(OffspringDistribution::binary_split(), life);
    const double beta = oracle.beta(2.0);
    CHECK(m.beta() == doctest::Approx(beta).epsilon(1e-9));
    const double n1 = 1.0 / (beta * 4.0 * oracle.discounted_mean(beta));
    CHECK(m.n1() == doctest::Approx(n1).epsilon(1e-9));
    CHECK(rahn_n1(0.7, k, m.beta(), 2.0) == doctest::Approx(n1).epsilon(1e-9));
  }
}

TEST_CASE("n1 never falls below the Hoelder bound") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  while (checked < 100) {
    std::vector<double> p(2 + rng() % 7);
    for (auto& x : p) x = u(rng);
    double total = 0.0, mean = 0.0;
    for (double x : p) total += x;
    for (std::size_t i = 0; i < p.size(); ++i) mean += static_cast<double>(i) * (p[i] /= total);
    if (mean < 1.01) continue;
    const OffspringDistribution f(p);
    const double rate = 0.2 + 3.0 * u(rng);
    const int k = 1 + static_cast<int>(rng() % 12);
    LifetimeDistribution life = Exponential{rate};
    switch (checked % 3) {
      case 1: life = KendallGamma{k, rate}; break;
      case 2: life = Rahn{rate, k}; break;
      default: break;
    }
    const ProliferationModel m(f, life);
    CHECK(m.n1() >= n1_lower_bound(mean) - 1e-12);
    CHECK(m.n1() <= 1.0 + 1e-12);
    ++checked;
  }
  CHECK(n1_lower_bound(2.0) == doctest::Approx(1.0 / (2.0 * std::log(2.0))).epsilon(1e-15));
}

TEST_CASE("Euler-Lotka residual vanishes at beta") {
  const OffspringDistribution f({0.1, 0.3, 0.4, 0.2});
  for (const LifetimeDistribution& life :
       {LifetimeDistribution(Exponential{2.0}), LifetimeDistribution(KendallGamma{4, 0.5}),
        LifetimeDistribution(Rahn{1.5, 3})}) {
    const double b = solve_beta(f, life);
    CHECK(std::abs(f.mean() * life.laplace_stieltjes(b) - 1.0) < 1e-12);
    CHECK(compute_n1(f, life, b) == doctest::Approx((f.mean() - 1.0) /
                                                    (b * f.mean() * f.mean() * life.discounted_mean(b))));
  }
}

TEST_CASE("tabulated life time approximates its source law") {
  TabulatedCdf tab;
  for (int i = 0; i <= 4000; ++i) {
    const double t = i * 0.005;
    tab.t.push_back(t);
    tab.cdf.push_back(i == 4000 ? 1.0 : -std::expm1(-t));
  }
  const LifetimeDistribution life(tab);
  CHECK_FALSE(life.is_lattice());
  CHECK(life.cdf(1.0) == doctest::Approx(-std::expm1(-1.0)).epsilon(1e-5));
  CHECK(solve_beta(OffspringDistribution::binary_split(), life) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK_FALSE(life.phase_rates().has_value());

  const LifetimeDistribution lattice(TabulatedCdf{{0.0, 1.0, 1.0, 2.0}, {0.0, 0.0, 1.0, 1.0}});
  CHECK(lattice.is_lattice());
  CHECK(solve_beta(OffspringDistribution::binary_split(), lattice) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("life-time validation") {
  CHECK_THROWS_AS(LifetimeDistribution(Exponential{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(LifetimeDistribution(KendallGamma{0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(LifetimeDistribution(Rahn{1.0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(LifetimeDistribution(TabulatedCdf{{0.0, 1.0}, {0.0, 0.5}}), std::invalid_argument);
}

TEST_CASE("phase representation matches the law") {
  const LifetimeDistribution rahn(Rahn{2.0, 3});
  const auto rates = rahn.phase_rates();
  REQUIRE(rates.has_value());
  CHECK(*rates == std::vector<double>{6.0, 4.0, 2.0});
  double mean = 0.0;
  for (double r : *rates) mean += 1.0 / r;
  CHECK(rahn.mean() == doctest::Approx(mean).epsilon(1e-12));
  CHECK(LifetimeDistribution(KendallGamma{3, 2.0}).phase_rates()->size() == 3);
}

TEST_CASE("sampled life times have the right mean") {
  Rng rng(99);
  for (const LifetimeDistribution& life :
       {LifetimeDistribution(Exponential{2.0}), LifetimeDistribution(KendallGamma{4, 0.5}),
        LifetimeDistribution(Rahn{1.5, 3})}) {
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += life.sample(rng);
    CHECK(sum / n == doctest::Approx(life.mean()).epsilon(0.01));
    CHECK(life.cdf(life.median()) == doctest::Approx(0.5).epsilon(1e-8));
  }
}

TEST_CASE("neutrality residual") {
  const auto f = OffspringDistribution::binary_split();
  const LifetimeDistribution e(Exponential{1.0});
  CHECK(check_neutrality(f, e, f, e) < kNeutralityTolerance);
  CHECK(check_neutrality(f, LifetimeDistribution(Exponential{2.0}), f, e) > 1e-3);
  // Same growth rate from different life-time shapes is neutral.
  const LifetimeDistribution k(KendallGamma{2, 1.0 / (2.0 * (std::sqrt(2.0) - 1.0))});
  CHECK(check_neutrality(f, k, f, e) < 1e-9);
}

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <cmath>
#include <random>
#include <vector>

#include "fluctuate/error.hpp"
#include "fluctuate/estimate.hpp"

using namespace fluctuate;

namespace {

const LddFamily& lea_coulson_family() {
  static const LddFamily family(
      PgfEvaluator(ProliferationModel(OffspringDistribution::binary_split(), LifetimeDistribution(Exponential{1.0}))),
      4000);
  return family;
}

ExperimentData sample_counts(const std::vector<double>& pmf, std::size_t cultures, std::uint64_t seed) {
  std::vector<double> cdf(pmf.size());
  std::partial_sum(pmf.begin(), pmf.end(), cdf.begin());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ExperimentData data;
  for (std::size_t i = 0; i < cultures; ++i) {
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u(rng));
    data.counts.push_back(static_cast<std::uint64_t>(it - cdf.begin()));  // beyond R lands on R + 1
  }
  return data;
}

}  // namespace

TEST_CASE("data validation and jackpot cutoff") {
  CHECK_THROWS_AS(validate(ExperimentData{}), DataError);
  ExperimentData bad{{1, 2}, std::nullopt, -5.0};
  CHECK_THROWS_AS(validate(bad), DataError);
  ExperimentData small{{0, 1, 2, 3}, std::nullopt, std::nullopt};
  CHECK(default_jackpot_cutoff(small) == 50);
  ExperimentData wide;
  for (std::uint64_t i = 1; i <= 1000; ++i) wide.counts.push_back(i);
  CHECK(default_jackpot_cutoff(wide) == 990);
}

TEST_CASE("p0 method") {
  ExperimentData data{{0, 0, 0, 5, 7, 0, 2, 0, 0, 9}, std::nullopt, std::nullopt};
  const auto est = p0_estimate(data, 1e6);
  CHECK(est.zeros == 6);
  CHECK(est.p0_hat == doctest::Approx(0.6));
  CHECK(est.rho_hat == doctest::Approx(-std::log(0.6) / 1e6));
  CHECK(est.se_rho == doctest::Approx(std::sqrt(0.6 * 0.4 / 10.0) / (0.6 * 1e6)));
  CHECK_FALSE(est.upper_bound.has_value());

  const ExperimentData zeros{{0, 0, 0, 0}, std::nullopt, std::nullopt};
  const auto z = p0_estimate(zeros, 100.0);
  CHECK(z.rho_hat == 0.0);
  REQUIRE(z.upper_bound.has_value());
  CHECK(*z.upper_bound == doctest::Approx(std::log(20.0) / 400.0));

  const ExperimentData none{{1, 2, 3}, std::nullopt, std::nullopt};
  CHECK_THROWS_AS(p0_estimate(none, 1e6), DataError);
}

TEST_CASE("log-likelihood by hand") {
  const auto& family = lea_coulson_family();
  const ExperimentData data{{0, 1, 1, 3, 80, 200}, std::nullopt, std::nullopt};
  const double a = 2.5;
  const auto p = family.pmf(a).probs;
  double head = 0.0;
  for (std::size_t r = 0; r <= 60; ++r) head += p[r];
  const double expect = std::log(p[0]) + 2.0 * std::log(p[1]) + std::log(p[3]) + 2.0 * std::log(1.0 - head);
  CHECK(log_likelihood(data, family, a, 60) == doctest::Approx(expect).epsilon(1e-8));
  CHECK_THROWS_AS(log_likelihood(data, family, a, 5000), std::invalid_argument);
}

TEST_CASE("maximum likelihood recovers m and its profile interval") {
  const auto& family = lea_coulson_family();
  const auto data = sample_counts(family.pmf(4.0).probs, 500, 11);
  MleOptions opts;
  const auto fit = mle_fit(data, family, opts);
  CHECK(fit.m_hat == doctest::Approx(fit.A_hat));  // n1 = 1
  CHECK(fit.ci_low < 4.0);
  CHECK(fit.ci_high > 4.0);
  CHECK_FALSE(fit.boundary);
  CHECK(std::isnan(fit.B_hat));
  const auto cut = fit.jackpot_cutoff;
  CHECK(cut == default_jackpot_cutoff(data));
  for (double f : {0.99, 1.01}) CHECK(log_likelihood(data, family, fit.A_hat * f, cut) <= fit.loglik);
  CHECK(log_likelihood(data, family, fit.ci_low, cut) == doctest::Approx(fit.loglik - 1.92).epsilon(1e-6));
  CHECK(log_likelihood(data, family, fit.ci_high, cut) == doctest::Approx(fit.loglik - 1.92).epsilon(1e-6));

  // A shifted grid must find the same maximum.
  opts.grid_offset = 0.5;
  CHECK(mle_fit(data, family, opts).A_hat == doctest::Approx(fit.A_hat).epsilon(1e-5));
  opts.grid_offset = 0.0;
  opts.threads = 3;
  CHECK(mle_fit(data, family, opts).A_hat == fit.A_hat);
}

TEST_CASE("all-zero data hit the lower boundary") {
  const ExperimentData zeros{std::vector<std::uint64_t>(50, 0), std::nullopt, std::nullopt};
  const auto fit = mle_fit(zeros, lea_coulson_family());
  CHECK(fit.boundary);
  CHECK(fit.A_hat == doctest::Approx(1e-3).epsilon(1e-3));
}

TEST_CASE("rate from the fit") {
  FitResult fit;
  fit.A_hat = 3.0;
  const auto est = rho_from_fit(fit, 0.75, 2e8);
  CHECK(est.m_hat == doctest::Approx(4.0));
  REQUIRE(est.rho_hat.has_value());
  CHECK(*est.rho_hat == doctest::Approx(2e-8));
  CHECK_FALSE(rho_from_fit(fit, 0.75, std::nullopt).rho_hat.has_value());
}

TEST_CASE("bootstrap interval is reproducible") {
  const auto& family = lea_coulson_family();
  const auto data = sample_counts(family.pmf(2.0).probs, 200, 5);
  const auto fit = mle_fit(data, family);
  MleOptions opts;
  opts.jackpot_cutoff = fit.jackpot_cutoff;
  const auto a = bootstrap_ci(data, family, opts, 40, 42);
  const auto b = bootstrap_ci(data, family, opts, 40, 42);
  CHECK(a.replicates == b.replicates);
  CHECK(a.low < fit.A_hat);
  CHECK(a.high > fit.A_hat);
  CHECK_THROWS_AS(bootstrap_ci(data, family, opts, 1, 42), std::invalid_argument);
}

TEST_CASE("evaluator overload builds its own family") {
  const PgfEvaluator ev(
      ProliferationModel(OffspringDistribution::binary_split(), LifetimeDistribution(KendallGamma{2, 1.0})));
  const LddFamily family(ev, 3000);
  auto data = sample_counts(family.pmf(3.0).probs, 300, 3);
  data.n_final = 1e8;
  const auto fit = mle_fit(data, ev);
  CHECK(fit.m_hat == doctest::Approx(fit.A_hat / ev.model().n1()));
  CHECK(std::isfinite(fit.B_hat));
  REQUIRE(fit.rho_hat.has_value());
  CHECK(*fit.rho_hat == doctest::Approx(fit.m_hat / 1e8));
  CHECK(fit.ci_low < 3.0 * ev.model().n1());
  CHECK(fit.ci_high > 3.0 * ev.model().n1());
}

#include "fluctuate/malthus.hpp"

#include <cmath>
#include <stdexcept>

#include "fluctuate/error.hpp"

namespace fluctuate {

ProliferationModel::ProliferationModel(OffspringDistribution offspring, LifetimeDistribution lifetime)
    : offspring_(std::move(offspring)),
      lifetime_(std::move(lifetime)),
      beta_(solve_beta(offspring_, lifetime_)),
      n1_(compute_n1(offspring_, lifetime_, beta_)) {}

double solve_beta(const OffspringDistribution& offspring, const LifetimeDistribution& lifetime) {
  const double mu = offspring.mean();
  auto excess = [&](double beta) { return mu * lifetime.laplace_stieltjes(beta) - 1.0; };

  double lo = 0.0;
  double hi = 1.0;
  while (excess(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 0x1.0p60) {
      throw NumericalError("no root of the Malthusian equation below 2^60; defective life-time law?");
    }
  }
  // Bisect to the resolution of double precision.
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double compute_n1(const OffspringDistribution& offspring, const LifetimeDistribution& lifetime,
                  double beta) {
  const double mu = offspring.mean();
  return (mu - 1.0) / (beta * mu * mu * lifetime.discounted_mean(beta));
}

double n1_lower_bound(double mu) {
  if (!(mu > 1.0)) throw std::invalid_argument("n1_lower_bound needs mu > 1");
  return (mu - 1.0) / (mu * std::log(mu));
}

double check_neutrality(const OffspringDistribution& mutant_offspring,
                        const LifetimeDistribution& mutant_lifetime,
                        const OffspringDistribution& nonmutant_offspring,
                        const LifetimeDistribution& nonmutant_lifetime) {
  const double beta = solve_beta(nonmutant_offspring, nonmutant_lifetime);
  return std::abs(mutant_offspring.mean() * mutant_lifetime.laplace_stieltjes(beta) - 1.0);
}

double kendall_beta(int stages, double rate, double mu) {
  return stages * rate * (std::pow(mu, 1.0 / stages) - 1.0);
}

double kendall_n1(int stages, double mu) {
  return (mu - 1.0) / (stages * (mu - std::pow(mu, 1.0 - 1.0 / stages)));
}

double rahn_n1(double rate, int stages, double beta, double mu) {
  double sum = 0.0;
  for (int i = 1; i <= stages; ++i) sum += 1.0 / (beta / rate + i);
  return (rate / beta) * ((mu - 1.0) / mu) / sum;
}

double rahn_beta_heuristic(double rate, int stages, double mu) {
  return rate * (stages + 1) * (std::pow(mu, 1.0 / stages) - 1.0) / 2.0;
}

}  // namespace fluctuate

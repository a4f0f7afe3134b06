#pragma once

#include "fluctuate/lifetime.hpp"
#include "fluctuate/offspring.hpp"

namespace fluctuate {

/// Offspring law and life-time law of one cell type, with the Malthusian
/// growth rate beta and the correction factor n1 derived at construction.
class ProliferationModel {
 public:
  ProliferationModel(OffspringDistribution offspring, LifetimeDistribution lifetime);

  const OffspringDistribution& offspring() const noexcept { return offspring_; }
  const LifetimeDistribution& lifetime() const noexcept { return lifetime_; }
  double beta() const noexcept { return beta_; }
  double n1() const noexcept { return n1_; }

 private:
  OffspringDistribution offspring_;
  LifetimeDistribution lifetime_;
  double beta_;
  double n1_;
};

/// Unique beta > 0 with mean * L(beta) = 1, by bracketing and bisection.
/// Throws NumericalError when no sign change is found below 2^60.
double solve_beta(const OffspringDistribution& offspring, const LifetimeDistribution& lifetime);

/// n1 = (mu - 1) / (beta mu^2 int t e^{-beta t} dG(t)).
double compute_n1(const OffspringDistribution& offspring, const LifetimeDistribution& lifetime,
                  double beta);

/// (mu - 1) / (mu ln mu); n1 never falls below it, whatever the life-time law.
double n1_lower_bound(double mu);

/// |mu_mut L_mut(beta) - 1| with beta solved from the non-mutant pair.
double check_neutrality(const OffspringDistribution& mutant_offspring,
                        const LifetimeDistribution& mutant_lifetime,
                        const OffspringDistribution& nonmutant_offspring,
                        const LifetimeDistribution& nonmutant_lifetime);

inline constexpr double kNeutralityTolerance = 1e-9;

// Closed forms for the multi-stage families.
double kendall_beta(int stages, double rate, double mu);
double kendall_n1(int stages, double mu);
double rahn_n1(double rate, int stages, double beta, double mu);
/// Empirical approximation beta ~ rate (k+1)(mu^{1/k} - 1)/2; diagnostic only.
double rahn_beta_heuristic(double rate, int stages, double mu);

}  // namespace fluctuate

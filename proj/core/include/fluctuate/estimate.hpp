#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fluctuate/lddist.hpp"

namespace fluctuate {

/// Mutant counts of a fluctuation experiment, one entry per culture.
struct ExperimentData {
  std::vector<std::uint64_t> counts;
  std::optional<std::uint64_t> jackpot_cutoff;
  std::optional<double> n_final;  // mean final population size
};

/// Checks counts are nonempty; throws DataError otherwise.
void validate(const ExperimentData& data);

/// max(50, 99th percentile of the counts).
std::uint64_t default_jackpot_cutoff(const ExperimentData& data);

struct P0Estimate {
  double rho_hat = 0.0;
  double p0_hat = 0.0;
  double se_rho = 0.0;                // delta-method standard error
  std::optional<double> upper_bound;  // one-sided 95% bound when every count is zero
  std::size_t zeros = 0;
  std::size_t cultures = 0;
};

/// rho = -ln(p0_hat) / n. Throws DataError when no culture is mutant-free.
P0Estimate p0_estimate(const ExperimentData& data, double n);

struct MleOptions {
  double a_min = 1e-3;
  double a_max = 1e4;
  std::size_t grid_points = 141;  // log-spaced over [a_min, a_max]
  double grid_offset = 0.0;       // shift of the grid, in units of one grid step
  double rel_tol = 1e-6;          // golden-section stopping rule on A
  std::optional<std::uint64_t> jackpot_cutoff;
  std::optional<double> delta;  // skips the delta probe when set
  unsigned threads = 1;
};

struct FitResult {
  double A_hat = 0.0;  // estimate of n1 m
  double m_hat = 0.0;  // A_hat / n1
  double B_hat = 0.0;  // delta / n1 of the fitted model (diagnostic)
  double loglik = 0.0;
  double ci_low = 0.0;  // 95% profile interval for A
  double ci_high = 0.0;
  std::uint64_t jackpot_cutoff = 0;
  bool boundary = false;    // maximum at a search boundary
  bool tail_flag = false;   // lumped tail mass numerically <= 0 somewhere
  std::optional<double> rho_hat;
};

/// Log-likelihood of the data at A = n1 m using the family's PMF up to R*,
/// with counts above R* lumped into ln(1 - sum_{r <= R*} p_r).
double log_likelihood(const ExperimentData& data, const LddFamily& family, double a, std::uint64_t cutoff,
                      bool* tail_flag = nullptr);

/// Maximum-likelihood estimate of A = n1 m over [a_min, a_max]: log grid,
/// golden-section refinement, profile interval at loglik_max - 1.92.
/// `family.rmax()` must be at least the jackpot cutoff.
FitResult mle_fit(const ExperimentData& data, const LddFamily& family, const MleOptions& options = {});
/// Builds the family for the data's cutoff and probes delta when needed.
FitResult mle_fit(const ExperimentData& data, const PgfEvaluator& evaluator, const MleOptions& options = {});

struct RhoEstimate {
  double m_hat;
  std::optional<double> rho_hat;
};

/// m = A_hat / n1 and, when n_final is known, rho = m / n_final.
RhoEstimate rho_from_fit(const FitResult& fit, double n1, std::optional<double> n_final);

struct BootstrapInterval {
  double low;
  double high;
  std::vector<double> replicates;
};

/// Percentile interval of A_hat over resampled cultures.
BootstrapInterval bootstrap_ci(const ExperimentData& data, const LddFamily& family, const MleOptions& options,
                               std::size_t replicates, std::uint64_t seed);

}  // namespace fluctuate

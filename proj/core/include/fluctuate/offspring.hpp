#pragma once

#include <complex>
#include <span>
#include <vector>

namespace fluctuate {

/// First-generation offspring law f(s) = sum_k pi_k s^k with finite support.
///
/// Construction enforces normalization (to 1e-12) and supercriticality
/// (1 < mean < inf). The extinction probability q, the smallest fixed point
/// of f in [0,1), is computed once at construction.
class OffspringDistribution {
 public:
  explicit OffspringDistribution(std::vector<double> probs);

  /// pi_2 = 1.
  static OffspringDistribution binary_split();
  /// Power-series form of f(s) = s / (s + mean (1 - s)), truncated once the
  /// remaining tail mass falls below `tail_tol` and renormalized.
  static OffspringDistribution fractional_linear(double mean, double tail_tol = 1e-12);

  const std::vector<double>& probs() const noexcept { return probs_; }
  double mean() const noexcept { return mean_; }
  double extinction_prob() const noexcept { return q_; }
  /// f''(1), finite for every finite-support law.
  double second_factorial_moment() const noexcept;

  std::complex<double> pgf(std::complex<double> s) const;
  double pgf(double s) const;

  /// h(s) = (1 - f(s)) / (1 - s), with h(1) = mean.
  std::complex<double> h(std::complex<double> s) const;
  double h(double s) const;

  /// 1 - f(1 - d), evaluated without cancellation as d * h(1 - d).
  std::complex<double> complement_map(std::complex<double> d) const noexcept;
  double complement_map(double d) const noexcept;

  /// mean - h(1 - s) for small s > 0, summed term by term so that it does
  /// not cancel to zero before s itself underflows.
  double h_defect(double s) const noexcept;

 private:
  std::vector<double> probs_;
  std::vector<double> tails_;  // tails_[k] = sum_{j > k} pi_j, coefficients of h
  double mean_ = 0.0;
  double q_ = 0.0;
};

/// Smallest fixed point of f in [0,1) by monotone iteration from 0.
/// Throws NumericalError if |q_{n+1} - q_n| has not dropped below 1e-14
/// within 10^6 steps.
double extinction_prob(const OffspringDistribution& dist);

struct StarProbeRow {
  double s;
  double defect;       // mean - h(1 - s)
  double local_slope;  // log-log slope against the previous row; NaN on the first
};

struct StarProbeReport {
  double omega_estimate;  // slope over the two smallest retained s values
  double fitted_slope;    // least-squares slope over all retained rows
  std::vector<StarProbeRow> rows;
  bool truncated = false;  // grid cut where the defect underflowed
};

/// Empirical exponent of the regularity condition mean - h(1-s) ~ s^omega.
/// `s_grid` must lie in (0, 0.5] and be strictly decreasing.
StarProbeReport star_probe(const OffspringDistribution& dist, std::span<const double> s_grid);

}  // namespace fluctuate

#pragma once

#include <optional>
#include <vector>

#include "fluctuate/offspring.hpp"

namespace fluctuate {

/// Galton-Watson analogue of g:
///   g_f(s) = ((mu - 1) / mu) sum_{i >= 0} f_i(s) / mu^i,  f_0(s) = s.
/// Pure powers f = s^mu are iterated in the exact form s^{mu^i}; the
/// fractional-linear law uses its closed-form iterates.
class GwSeries {
 public:
  enum class Kind { Generic, Power, FractionalLinear };

  /// `terms` = 0 picks N with mu^{-N} / (1 - 1/mu) < 1e-12.
  explicit GwSeries(OffspringDistribution f, int terms = 0);
  static GwSeries power(int mu, int terms = 0);
  static GwSeries fractional_linear(double mu, int terms = 0);

  Kind kind() const noexcept { return kind_; }
  const OffspringDistribution& offspring() const noexcept { return f_; }
  double mean() const noexcept { return mu_; }
  /// (mu - 1) / (mu ln mu).
  double kappa() const noexcept { return kappa_; }
  int terms() const noexcept { return terms_; }
  /// Bound on the omitted part of the series after terms() iterates.
  double remainder_bound() const noexcept;

  /// Partial sum with terms() iterates, s in [0, 1].
  double g_f(double s) const;
  /// Same partial sum, always by repeated composition of the offspring law.
  double g_f_iterated(double s) const;

  /// gamma_f = (1 - g_f(s)) / (1 - s) evaluated from d = 1 - s > 0 without
  /// forming s; the iterate count adapts so the neglected terms are < 1e-17.
  double gamma_at(double d) const;
  /// gamma_f(s) + kappa log(1 - s), again parametrized by d = 1 - s.
  double delta_at(double d) const;

 private:
  double complement_iterate(double d, int i) const;  // 1 - f_i(1 - d)

  OffspringDistribution f_;
  Kind kind_;
  double mu_;
  double kappa_;
  int terms_;
  int power_ = 0;
};

double delta_gw(const GwSeries& series, double s);

/// Power-series coefficients c_0..c_K of gamma_f, by truncated composition.
std::vector<double> gamma_coefficients(const GwSeries& series, int max_degree);

/// |int_0^inf (1 - (1 - mu^{-u})^n) du - H_n / ln mu| by adaptive quadrature.
double harmonic_identity_check(int mu, int n);

/// sum_{i>=0} (1 - (1 - mu^{-i})^n) - H_n / ln mu: partial coefficient sums
/// of the fractional-linear gamma_f against the logarithm's, without the
/// common factor (mu - 1) / mu.
double fraclin_discounted_partial_sum(double mu, long n);

struct SubsequenceGap {
  std::vector<int> n;
  std::vector<double> delta_a;  // at d = c_a 2^{-n}
  std::vector<double> delta_b;  // at d = c_b 2^{-n}
  std::vector<double> gap;      // |delta_a - delta_b|
  double min_gap = 0.0;
};

/// delta along the two subsequences s = 1 - c 2^{-n}, n = n_first..n_last.
SubsequenceGap subsequence_gap(const GwSeries& series, int n_first, int n_last, double c_a = 1.0,
                               double c_b = 1.4);

struct IncrementReport {
  std::vector<int> n;
  std::vector<double> delta;       // at s = 1 - 2^{-n}
  std::vector<double> increments;  // |delta_{n+1} - delta_n|
  bool monotone = true;            // increments strictly decreasing
};

IncrementReport cauchy_increments(const GwSeries& series, int n_first, int n_last);

struct PeriodReport {
  std::vector<double> peak_t;  // local maxima of delta in t = -ln(1 - s)
  std::optional<double> period;
};

/// Samples delta on a uniform grid of t = -ln(1 - s) in [t_min, t_max] and
/// measures the spacing of its local maxima.
PeriodReport oscillation_period(const GwSeries& series, double t_min, double t_max, int samples);

}  // namespace fluctuate

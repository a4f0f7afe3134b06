#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fluctuate/bhpgf.hpp"
#include "fluctuate/stable.hpp"

namespace fluctuate {

/// Mutant-count law p_0..p_R with generating function exp(m (g(s) - 1)).
struct LddPmf {
  double m = 0.0;
  std::vector<double> probs;
  double captured_mass = 0.0;
  double inversion_radius = 0.0;
  std::string model_tag;
  std::size_t clamped = 0;      // negative values within the noise floor set to 0
  double most_negative = 0.0;   // smallest raw value before clamping
  bool aliasing_alarm = false;  // |p_R| > 1e-6 max p_r
};

std::string model_tag(const ProliferationModel& model);

/// R giving captured mass of about 0.9995: the law's tail is ~ n1 m / r.
std::size_t default_pmf_rmax(double n1, double m);
/// ceil(50 n1 m (ln m + 5)), the size used by limit_check.
std::size_t limit_check_rmax(double n1, double m);
/// exp(ln(1e-14) / (2R)), floored at 0.8.
double inversion_radius(std::size_t rmax);
/// Smallest 2^a 3^b 5^c 7^d >= n.
std::size_t fft_size_at_least(std::size_t n);

/// Coefficients of g on the circle |s| = c for one model, computed once and
/// reused for any m. Points default to the smallest FFT size >= 4(R + 1).
class LddFamily {
 public:
  LddFamily(const PgfEvaluator& evaluator, std::size_t rmax, std::size_t points = 0, double radius = 0.0);

  std::size_t rmax() const noexcept { return rmax_; }
  std::size_t points() const noexcept { return points_; }
  double radius() const noexcept { return radius_; }
  double n1() const noexcept { return n1_; }
  /// g(0) evaluated directly.
  double g0() const noexcept { return g0_; }
  /// Clone-size law: coefficients q_0..q_R of g, q_0 = g(0).
  const std::vector<double>& clone_sizes() const noexcept { return clone_; }

  /// PMF by inversion of exp(-m (1 - g)) on the stored circle.
  LddPmf pmf(double m) const;
  /// PMF by the compound-Poisson recursion p_r = (m / r) sum_k k q_k p_{r-k}.
  std::vector<double> pmf_recursion(double m, std::size_t rmax) const;

 private:
  std::size_t rmax_, points_;
  double radius_;
  double n1_;
  double g0_;
  std::string tag_;
  std::vector<cplx> one_minus_;  // 1 - g at c w^j, j = 0..points/2
  std::vector<double> clone_;
};

/// p_r = c^{-r} (1/M) sum_j g_LD(c w^j) w^{-jr}; p_0 from exp(-m (1 - g(0))).
LddPmf ldd_pmf(const PgfEvaluator& evaluator, double m, std::size_t rmax, std::size_t points = 0,
               double radius = 0.0);

/// Lea-Coulson law by the Ma-Sandri-Sarkar recursion p_r = (m / r) sum_{j<r} p_j / (r - j + 1).
std::vector<double> lea_coulson_recursion(double m, std::size_t rmax);

/// Kolmogorov-Smirnov distance between the law of r / A - ln A - shift
/// (A = scale * m) and the stable limit, with the lattice CDF compared on both
/// sides of every jump.
double ks_distance(const LddPmf& pmf, double scale, double shift, const StableTable& table = StableTable::instance());

struct LimitCheckRow {
  double m = 0.0;
  std::size_t rmax = 0;
  double captured_mass = 0.0;
  double ks = 0.0;
  double ks_delta_minus = 0.0;  // delta shifted down by the probe's last increment
  double ks_delta_plus = 0.0;
  double ks_misscaled = 0.0;    // n1 replaced by 2 n1
  bool rmax_warning = false;    // rmax above 10^6
  bool aliasing_alarm = false;
};

struct LimitCheckReport {
  double n1 = 0.0;
  double delta = 0.0;
  double delta_uncertainty = 0.0;
  std::vector<LimitCheckRow> rows;
};

LimitCheckReport limit_check(const PgfEvaluator& evaluator, std::span<const double> m_list);

}  // namespace fluctuate

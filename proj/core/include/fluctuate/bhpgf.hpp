#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "fluctuate/malthus.hpp"

namespace fluctuate {

using cplx = std::complex<double>;

/// F_u(s) of a Bellman-Harris clone on the time grid u_i = i * step,
/// i = 0..rows()-1, for each evaluation point s_j. Values are held in
/// complement form 1 - F, which keeps full relative precision near s = 1.
class PgfGrid {
 public:
  PgfGrid(double step, std::vector<cplx> points, std::size_t rows);

  double step() const noexcept { return step_; }
  double horizon() const noexcept { return step_ * static_cast<double>(rows_ - 1); }
  std::size_t rows() const noexcept { return rows_; }
  const std::vector<cplx>& points() const noexcept { return points_; }
  double time(std::size_t i) const noexcept { return step_ * static_cast<double>(i); }

  cplx value(std::size_t i, std::size_t j) const { return 1.0 - complement(i, j); }
  cplx complement(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }
  std::span<cplx> column(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const cplx> column(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }
  /// Index of `s` among the points; throws std::out_of_range if absent.
  std::size_t index_of(cplx s) const;

 private:
  double step_;
  std::vector<cplx> points_;
  std::size_t rows_;
  std::vector<cplx> data_;
};

/// min(1e-2 / beta, median life-time / 50).
double default_renewal_step(const ProliferationModel& model);
/// 30 / beta.
double default_horizon(const ProliferationModel& model);

/// Forward-marching solution of
///   F_u(s) = (1 - G(u)) s + int_0^u f(F_{u-y}(s)) dG(y)
/// with trapezoidal Stieltjes weights built from CDF increments and one
/// predictor-corrector pass per step. Columns are solved in parallel.
/// Throws std::invalid_argument if G(step) >= 0.1 and NumericalError if
/// |F| exceeds 1 + 1e-8 anywhere.
PgfGrid solve_renewal(const ProliferationModel& model, std::span<const cplx> points, double step,
                      double horizon, unsigned threads = 1);

struct GValue {
  cplx value;      // g(s)
  cplx one_minus;  // 1 - g(s), computed without cancellation
  cplx tail;       // contribution assigned to u > horizon
  bool tail_warning = false;
};

/// g(s) = beta int_0^inf e^{-beta u} F_u(s) du on the grid (exponentially
/// weighted trapezoid, exact for piecewise-linear F) plus the tail q e^{-beta U}.
GValue compute_g(const ProliferationModel& model, const PgfGrid& grid, std::size_t point_index);
GValue compute_g(const ProliferationModel& model, const PgfGrid& grid, cplx s);

enum class PgfMethod {
  Auto,       // PhaseType when the life-time law has a phase representation
  Volterra,   // solve_renewal + compute_g
  PhaseType,  // fixed-step RK4 on the multi-stage Markov system
};

struct PgfNumerics {
  PgfMethod method = PgfMethod::Auto;
  double step = 0.0;     // 0 selects the method default
  double horizon = 0.0;  // 0 selects 30 / beta
  unsigned threads = 1;
  // Volterra only: combine steps h and 2h to cancel the O(h^2) error term.
  // Ignored for lattice laws and when G(2h) >= 0.1.
  bool extrapolate = true;
};

/// Evaluates g(s) for one proliferation model at arbitrary points of the
/// closed unit disk. The numerical error of either method is the same
/// analytic function of s at every point (one shared time grid), so it
/// perturbs power-series coefficients instead of acting as point noise.
class PgfEvaluator {
 public:
  explicit PgfEvaluator(ProliferationModel model, PgfNumerics numerics = {});

  const ProliferationModel& model() const noexcept { return model_; }
  PgfMethod method() const noexcept { return method_; }
  double step() const noexcept { return step_; }
  double horizon() const noexcept { return horizon_; }
  unsigned threads() const noexcept { return threads_; }
  bool extrapolated() const noexcept { return extrapolate_; }

  std::vector<cplx> one_minus_g(std::span<const cplx> points) const;
  cplx g(cplx s) const;

 private:
  ProliferationModel model_;
  PgfMethod method_;
  double step_;
  double horizon_;
  unsigned threads_;
  bool extrapolate_ = false;
};

struct DeltaProbe {
  std::vector<double> s;
  std::vector<double> gamma;  // (1 - g(s)) / (1 - s)
  std::vector<double> delta;  // gamma(s) + n1 log(1 - s)
  double limit = 0.0;         // last retained value
  bool cauchy = true;         // increments |delta_{j+1} - delta_j| nonincreasing
  bool precision_exhausted = false;
};

/// 1 - 2^{-j}, j = 3..20.
std::vector<double> default_delta_sequence();

/// delta(s) = gamma(s) + n1 log(1 - s) along a real sequence increasing to 1.
/// Stops early once |1 - g(s)| drops below 100x the complement roundoff floor.
DeltaProbe delta_probe(const PgfEvaluator& evaluator, std::span<const double> s_sequence);

/// zbar(s) = (lambda / beta) (s - f(s)) / (1 - s) for an exponential life-time.
double markov_zbar(const ProliferationModel& model, double s);

/// gamma(s) on `s_mesh` from the first-order relation
///   gamma = 1 + zbar(s) (gamma - gamma'(s) (1 - s)),
/// integrated in t = -log(1 - s) with an adaptive Dormand-Prince stepper,
/// starting at s_start from `gamma_start`. Only exponential life-times.
std::vector<double> markov_gamma_ode(const ProliferationModel& model, double s_start,
                                     double gamma_start, std::span<const double> s_mesh);

/// Same, with the starting value taken from the renewal route at s_start.
std::vector<double> markov_gamma_ode(const ProliferationModel& model, double s_start,
                                     std::span<const double> s_mesh);

}  // namespace fluctuate

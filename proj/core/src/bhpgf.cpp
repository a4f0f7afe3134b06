#include "fluctuate/bhpgf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#include "fluctuate/error.hpp"
#include "fluctuate/parallel.hpp"
#include "phase_type.hpp"

namespace fluctuate {

PgfGrid::PgfGrid(double step, std::vector<cplx> points, std::size_t rows)
    : step_(step), points_(std::move(points)), rows_(rows), data_(points_.size() * rows) {}

std::size_t PgfGrid::index_of(cplx s) const {
  const auto it = std::find(points_.begin(), points_.end(), s);
  if (it == points_.end()) throw std::out_of_range("point is not on the pgf grid");
  return static_cast<std::size_t>(it - points_.begin());
}

double default_renewal_step(const ProliferationModel& model) {
  return std::min(1e-2 / model.beta(), model.lifetime().median() / 50.0);
}

double default_horizon(const ProliferationModel& model) { return 30.0 / model.beta(); }

PgfGrid solve_renewal(const ProliferationModel& model, std::span<const cplx> points, double step,
                      double horizon, unsigned threads) {
  if (!(step > 0.0) || !(horizon >= step)) throw std::invalid_argument("renewal grid needs 0 < step <= horizon");
  const auto& life = model.lifetime();
  if (life.cdf(step) >= 0.1) {
    throw std::invalid_argument("renewal step too coarse: G(step) >= 0.1");
  }
  for (const auto& s : points) {
    if (std::abs(s) > 1.0 + 1e-12) throw std::domain_error("renewal points must satisfy |s| <= 1");
  }
  const auto n_steps = static_cast<std::size_t>(std::llround(horizon / step));
  const std::size_t rows = n_steps + 1;

  // survival[n] = 1 - G(n h); dG[j] = G(jh) - G((j-1)h), j >= 1.
  std::vector<double> survival(rows), dG(rows, 0.0);
  for (std::size_t n = 0; n < rows; ++n) survival[n] = life.survival(step * static_cast<double>(n));
  for (std::size_t j = 1; j < rows; ++j) dG[j] = survival[j - 1] - survival[j];
  // Combined trapezoid weight for lag l >= 1 (both adjacent intervals).
  std::vector<double> w(rows, 0.0);
  for (std::size_t l = 1; l + 1 < rows; ++l) w[l] = 0.5 * (dG[l] + dG[l + 1]);

  const auto& off = model.offspring();
  PgfGrid grid(step, std::vector<cplx>(points.begin(), points.end()), rows);

  parallel_for(points.size(), threads, [&](std::size_t j) {
    auto col = grid.column(j);
    const cplx d0 = 1.0 - points[j];
    // phi values stored newest-first so the convolution walks memory forward:
    // phi_k lives at index n_steps - k.
    std::vector<double> pre(rows), pim(rows);
    auto put = [&](std::size_t k, cplx v) {
      pre[n_steps - k] = v.real();
      pim[n_steps - k] = v.imag();
    };
    col[0] = d0;
    const cplx phi0 = off.complement_map(d0);
    put(0, phi0);
    for (std::size_t n = 1; n < rows; ++n) {
      double acc_re = 0.0, acc_im = 0.0;
      const double* wr = w.data() + 1;
      const double* xr = pre.data() + (n_steps - n + 1);
      const double* xi = pim.data() + (n_steps - n + 1);
      const std::size_t terms = n - 1;  // lags 1..n-1, phi_{n-1} .. phi_1
      for (std::size_t l = 0; l < terms; ++l) {
        acc_re += wr[l] * xr[l];
        acc_im += wr[l] * xi[l];
      }
      const cplx known = survival[n] * d0 + 0.5 * dG[n] * phi0 + cplx(acc_re, acc_im);
      const cplx prev_phi(pre[n_steps - (n - 1)], pim[n_steps - (n - 1)]);
      const cplx predictor = known + 0.5 * dG[1] * prev_phi;
      const cplx d = known + 0.5 * dG[1] * off.complement_map(predictor);
      if (std::abs(1.0 - d) > 1.0 + 1e-8 || !std::isfinite(d.real()) || !std::isfinite(d.imag())) {
        throw NumericalError("renewal march unstable at u = " + std::to_string(step * static_cast<double>(n)) +
                             "; reduce the step size");
      }
      col[n] = d;
      put(n, off.complement_map(d));
    }
  });
  return grid;
}

namespace {

// Weights of D_i and D_{i+1} in int_{u_i}^{u_i+h} beta e^{-beta u} D(u) du / e^{-beta u_i}
// for D linear on the cell.
struct CellWeights {
  double left, right;
};

CellWeights exp_trapezoid_weights(double x) {
  const double one_minus_e = -std::expm1(-x);  // 1 - e^{-x}
  double ratio;                                // (1 - e^{-x}) / x
  if (x < 1e-4) {
    ratio = 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
  } else {
    ratio = one_minus_e / x;
  }
  const double left = 1.0 - ratio;
  return {left, one_minus_e - left};
}

}  // namespace

GValue compute_g(const ProliferationModel& model, const PgfGrid& grid, std::size_t point_index) {
  const double beta = model.beta();
  const auto col = grid.column(point_index);
  const auto cw = exp_trapezoid_weights(beta * grid.step());
  const double decay = std::exp(-beta * grid.step());
  cplx acc = 0.0;
  double disc = 1.0;
  for (std::size_t i = 0; i + 1 < grid.rows(); ++i) {
    acc += disc * (cw.left * col[i] + cw.right * col[i + 1]);
    disc *= decay;
  }
  const double tail_weight = std::exp(-beta * grid.horizon());
  const cplx s = grid.points()[point_index];
  const double q = model.offspring().extinction_prob();
  const double f_tail = (s == 1.0) ? 1.0 : q;
  GValue out;
  out.one_minus = acc + tail_weight * (1.0 - f_tail);
  out.value = 1.0 - out.one_minus;
  out.tail = tail_weight * f_tail;
  out.tail_warning = std::abs(out.tail) > 1e-8 * std::abs(out.value);
  return out;
}

GValue compute_g(const ProliferationModel& model, const PgfGrid& grid, cplx s) {
  return compute_g(model, grid, grid.index_of(s));
}

PgfEvaluator::PgfEvaluator(ProliferationModel model, PgfNumerics numerics)
    : model_(std::move(model)), threads_(numerics.threads) {
  const auto rates = model_.lifetime().phase_rates();
  method_ = numerics.method;
  if (method_ == PgfMethod::Auto) method_ = rates ? PgfMethod::PhaseType : PgfMethod::Volterra;
  if (method_ == PgfMethod::PhaseType && !rates) {
    throw std::invalid_argument("life-time law " + model_.lifetime().describe() +
                                " has no phase-type representation");
  }
  horizon_ = numerics.horizon > 0.0 ? numerics.horizon : default_horizon(model_);
  if (numerics.step > 0.0) {
    step_ = numerics.step;
  } else if (method_ == PgfMethod::PhaseType) {
    step_ = 0.02 / *std::max_element(rates->begin(), rates->end());
  } else {
    step_ = default_renewal_step(model_);
  }
  extrapolate_ = method_ == PgfMethod::Volterra && numerics.extrapolate && !model_.lifetime().is_lattice() &&
                 model_.lifetime().cdf(2.0 * step_) < 0.1;
}

std::vector<cplx> PgfEvaluator::one_minus_g(std::span<const cplx> points) const {
  if (method_ == PgfMethod::PhaseType) {
    const auto rates = *model_.lifetime().phase_rates();
    return detail::phase_type_one_minus_g(model_, rates, points, step_, horizon_, threads_);
  }
  // Volterra: solve in chunks to bound the grid's memory footprint.
  constexpr std::size_t kChunk = 32;
  std::vector<cplx> out(points.size());
  for (std::size_t first = 0; first < points.size(); first += kChunk) {
    const auto count = std::min(kChunk, points.size() - first);
    const auto chunk = points.subspan(first, count);
    const auto grid = solve_renewal(model_, chunk, step_, horizon_, threads_);
    for (std::size_t j = 0; j < count; ++j) out[first + j] = compute_g(model_, grid, j).one_minus;
    if (!extrapolate_) continue;
    const auto coarse = solve_renewal(model_, chunk, 2.0 * step_, horizon_, threads_);
    for (std::size_t j = 0; j < count; ++j) {
      out[first + j] = (4.0 * out[first + j] - compute_g(model_, coarse, j).one_minus) / 3.0;
    }
  }
  return out;
}

cplx PgfEvaluator::g(cplx s) const {
  const cplx pts[] = {s};
  return 1.0 - one_minus_g(pts)[0];
}

std::vector<double> default_delta_sequence() {
  std::vector<double> s;
  for (int j = 3; j <= 20; ++j) s.push_back(1.0 - std::ldexp(1.0, -j));
  return s;
}

DeltaProbe delta_probe(const PgfEvaluator& evaluator, std::span<const double> s_sequence) {
  for (std::size_t i = 0; i < s_sequence.size(); ++i) {
    const double s = s_sequence[i];
    if (!(s >= 0.0 && s < 1.0)) throw std::invalid_argument("delta_probe points must lie in [0, 1)");
    if (i > 0 && !(s > s_sequence[i - 1])) throw std::invalid_argument("delta_probe points must increase");
  }
  std::vector<cplx> pts(s_sequence.begin(), s_sequence.end());
  const auto one_minus = evaluator.one_minus_g(pts);
  const double n1 = evaluator.model().n1();
  constexpr double kComplementFloor = 1e-15;

  DeltaProbe probe;
  for (std::size_t i = 0; i < s_sequence.size(); ++i) {
    const double om = one_minus[i].real();
    if (std::abs(om) < 100.0 * kComplementFloor) {
      probe.precision_exhausted = true;
      break;
    }
    const double s = s_sequence[i];
    const double gamma = om / (1.0 - s);
    probe.s.push_back(s);
    probe.gamma.push_back(gamma);
    probe.delta.push_back(gamma + n1 * std::log1p(-s));
  }
  if (probe.delta.empty()) throw NumericalError("delta_probe retained no points");
  probe.limit = probe.delta.back();
  for (std::size_t i = 2; i < probe.delta.size(); ++i) {
    const double prev = std::abs(probe.delta[i - 1] - probe.delta[i - 2]);
    const double cur = std::abs(probe.delta[i] - probe.delta[i - 1]);
    if (cur > prev * (1.0 + 1e-9) + 1e-13) probe.cauchy = false;
  }
  return probe;
}

namespace {

const Exponential& require_exponential(const ProliferationModel& model) {
  const auto* e = std::get_if<Exponential>(&model.lifetime().variant());
  if (!e) throw std::invalid_argument("the Markov gamma ODE needs an exponential life-time");
  return *e;
}

}  // namespace

double markov_zbar(const ProliferationModel& model, double s) {
  const auto& e = require_exponential(model);
  return e.rate / model.beta() * (model.offspring().h(s) - 1.0);
}

std::vector<double> markov_gamma_ode(const ProliferationModel& model, double s_start, double gamma_start,
                                     std::span<const double> s_mesh) {
  const auto& e = require_exponential(model);
  const double q = model.offspring().extinction_prob();
  if (!(s_start > q && s_start < 1.0)) throw std::invalid_argument("s_start must lie in (q, 1)");
  for (std::size_t i = 0; i < s_mesh.size(); ++i) {
    if (!(s_mesh[i] >= s_start && s_mesh[i] < 1.0) || (i > 0 && !(s_mesh[i] > s_mesh[i - 1]))) {
      throw std::invalid_argument("s_mesh must increase within [s_start, 1)");
    }
  }
  const double ratio = e.rate / model.beta();
  const auto& off = model.offspring();
  // theta'(t) = theta - (theta - 1) / z(t), s = 1 - e^{-t}
  auto rhs = [&](const double& theta, double& dtheta, double t) {
    const double s = -std::expm1(-t);
    const double z = ratio * (off.h(s) - 1.0);
    dtheta = theta - (theta - 1.0) / z;
  };

  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<double>());
  std::vector<double> times{-std::log1p(-s_start)};
  for (double s : s_mesh) times.push_back(-std::log1p(-s));
  std::vector<double> out;
  out.reserve(s_mesh.size());
  double theta = gamma_start;
  bool first = true;
  ode::integrate_times(stepper, rhs, theta, times.begin(), times.end(), 1e-3,
                       [&](const double& value, double) {
                         if (first) {
                           first = false;
                           return;
                         }
                         out.push_back(value);
                       });
  return out;
}

std::vector<double> markov_gamma_ode(const ProliferationModel& model, double s_start,
                                     std::span<const double> s_mesh) {
  PgfEvaluator renewal(model, {PgfMethod::Volterra, 1e-3 / model.beta(), 0.0, 1});
  const cplx pt[] = {s_start};
  const double gamma0 = renewal.one_minus_g(pt)[0].real() / (1.0 - s_start);
  return markov_gamma_ode(model, s_start, gamma0, s_mesh);
}

}  // namespace fluctuate

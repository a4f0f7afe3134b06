#include "fluctuate/lddist.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <fftw3.h>

#include "fluctuate/error.hpp"

namespace fluctuate {

namespace {

constexpr double kNoiseFloor = 1e-9;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Real sequence a_r = (1/M) sum_j G_j w^{-jr}, r = 0..M-1, for G with
// conjugate symmetry, given G_0..G_{M/2}.
std::vector<double> inverse_real_dft(const std::vector<cplx>& half, std::size_t n) {
  auto* in = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * half.size()));
  auto* out = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  if (!in || !out) throw std::bad_alloc();
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  // The backward transform of conj(G) equals the forward transform of G
  // when the result is real.
  for (std::size_t j = 0; j < half.size(); ++j) {
    in[j][0] = half[j].real();
    in[j][1] = -half[j].imag();
  }
  fftw_execute(plan);
  std::vector<double> a(out, out + n);
  for (auto& v : a) v /= static_cast<double>(n);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return a;
}

std::vector<cplx> circle_points(std::size_t n, double radius) {
  std::vector<cplx> pts(n / 2 + 1);
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    pts[j] = std::polar(radius, angle);
  }
  // Exact real endpoints keep the Hermitian input consistent.
  pts[0] = radius;
  if (n % 2 == 0) pts.back() = -radius;
  return pts;
}

void check_sizes(std::size_t rmax, std::size_t points) {
  if (rmax < 1) throw std::invalid_argument("pmf needs R >= 1");
  if (points < 4 * rmax) throw std::invalid_argument("pmf needs M >= 4R");
}

}  // namespace

std::string model_tag(const ProliferationModel& model) {
  std::ostringstream os;
  os.precision(17);
  os << "offspring=[";
  const auto& p = model.offspring().probs();
  for (std::size_t k = 0; k < p.size(); ++k) os << (k ? ", " : "") << p[k];
  os << "]; lifetime=" << model.lifetime().describe();
  return os.str();
}

std::size_t default_pmf_rmax(double n1, double m) {
  if (!(n1 > 0.0) || !(m > 0.0)) throw std::invalid_argument("need n1 > 0 and m > 0");
  return static_cast<std::size_t>(std::ceil(2000.0 * n1 * m)) + 50;
}

std::size_t limit_check_rmax(double n1, double m) {
  if (!(n1 > 0.0) || !(m > 0.0)) throw std::invalid_argument("need n1 > 0 and m > 0");
  return static_cast<std::size_t>(std::ceil(50.0 * n1 * m * (std::log(m) + 5.0)));
}

double inversion_radius(std::size_t rmax) {
  return std::max(0.8, std::exp(std::log(1e-14) / (2.0 * static_cast<double>(rmax))));
}

std::size_t fft_size_at_least(std::size_t n) {
  std::size_t best = 1;
  while (best < n) best *= 2;
  for (std::size_t p7 = 1; p7 < best; p7 *= 7) {
    for (std::size_t p5 = p7; p5 < best; p5 *= 5) {
      for (std::size_t p3 = p5; p3 < best; p3 *= 3) {
        std::size_t v = p3;
        while (v < n) v *= 2;
        best = std::min(best, v);
      }
    }
  }
  return best;
}

LddFamily::LddFamily(const PgfEvaluator& evaluator, std::size_t rmax, std::size_t points, double radius)
    : rmax_(rmax),
      points_(points ? points : fft_size_at_least(4 * (rmax + 1))),
      radius_(radius > 0.0 ? radius : inversion_radius(rmax)),
      n1_(evaluator.model().n1()),
      tag_(model_tag(evaluator.model())) {
  check_sizes(rmax_, points_);
  if (!(radius_ > 0.0 && radius_ < 1.0)) throw std::invalid_argument("inversion radius must lie in (0, 1)");
  const cplx zero[] = {0.0};
  // Without childless divisions a clone never dies out, so g(0) = 0 exactly.
  g0_ = evaluator.model().offspring().probs()[0] == 0.0 ? 0.0 : 1.0 - evaluator.one_minus_g(zero)[0].real();
  one_minus_ = evaluator.one_minus_g(circle_points(points_, radius_));

  std::vector<cplx> values(one_minus_.size());
  for (std::size_t j = 0; j < values.size(); ++j) values[j] = 1.0 - one_minus_[j];
  const auto a = inverse_real_dft(values, points_);
  clone_.resize(rmax_ + 1);
  const double log_c = std::log(radius_);
  for (std::size_t k = 0; k <= rmax_; ++k) clone_[k] = a[k] * std::exp(-static_cast<double>(k) * log_c);
  clone_[0] = g0_;
}

LddPmf LddFamily::pmf(double m) const {
  if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("m must be finite and >= 0");
  std::vector<cplx> values(one_minus_.size());
  for (std::size_t j = 0; j < values.size(); ++j) values[j] = std::exp(-m * one_minus_[j]);
  const auto a = inverse_real_dft(values, points_);

  LddPmf out;
  out.m = m;
  out.inversion_radius = radius_;
  out.model_tag = tag_;
  out.probs.resize(rmax_ + 1);
  const double log_c = std::log(radius_);
  for (std::size_t r = 0; r <= rmax_; ++r) out.probs[r] = a[r] * std::exp(-static_cast<double>(r) * log_c);
  out.probs[0] = std::exp(-m * (1.0 - g0_));
  for (auto& p : out.probs) {
    if (p < 0.0) {
      out.most_negative = std::min(out.most_negative, p);
      if (p < -kNoiseFloor) {
        throw NumericalError("pmf inversion noise " + std::to_string(p) + " exceeds the floor; increase M");
      }
      p = 0.0;
      ++out.clamped;
    }
  }
  double mass = 0.0, peak = 0.0;
  for (double p : out.probs) {
    mass += p;
    peak = std::max(peak, p);
  }
  out.captured_mass = mass;
  out.aliasing_alarm = std::abs(out.probs.back()) > 1e-6 * peak;
  return out;
}

std::vector<double> LddFamily::pmf_recursion(double m, std::size_t rmax) const {
  if (rmax > rmax_) throw std::invalid_argument("recursion length exceeds the family's R");
  if (!(m >= 0.0)) throw std::invalid_argument("m must be >= 0");
  std::vector<double> kq(rmax + 1), p(rmax + 1);
  for (std::size_t k = 1; k <= rmax; ++k) kq[k] = static_cast<double>(k) * std::max(0.0, clone_[k]);
  p[0] = std::exp(-m * (1.0 - g0_));
  for (std::size_t r = 1; r <= rmax; ++r) {
    double acc = 0.0;
    for (std::size_t k = 1; k <= r; ++k) acc += kq[k] * p[r - k];
    p[r] = m * acc / static_cast<double>(r);
  }
  return p;
}

LddPmf ldd_pmf(const PgfEvaluator& evaluator, double m, std::size_t rmax, std::size_t points, double radius) {
  return LddFamily(evaluator, rmax, points, radius).pmf(m);
}

std::vector<double> lea_coulson_recursion(double m, std::size_t rmax) {
  std::vector<double> p(rmax + 1);
  p[0] = std::exp(-m);
  for (std::size_t r = 1; r <= rmax; ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      acc += p[j] / static_cast<double>(r - j + 1);
    }
    p[r] = m * acc / static_cast<double>(r);
  }
  return p;
}

double ks_distance(const LddPmf& pmf, double scale, double shift, const StableTable& table) {
  const double a = scale * pmf.m;
  if (!(a > 0.0)) throw std::invalid_argument("ks_distance needs scale * m > 0");
  const double offset = std::log(a) + shift;
  double below = 0.0, worst = 0.0;
  for (std::size_t r = 0; r < pmf.probs.size(); ++r) {
    const double s = table.cdf(static_cast<double>(r) / a - offset);
    const double above = below + pmf.probs[r];
    worst = std::max({worst, std::abs(below - s), std::abs(above - s)});
    below = above;
  }
  return worst;
}

LimitCheckReport limit_check(const PgfEvaluator& evaluator, std::span<const double> m_list) {
  const auto& model = evaluator.model();
  const auto probe = delta_probe(evaluator, default_delta_sequence());
  LimitCheckReport report;
  report.n1 = model.n1();
  report.delta = probe.limit;
  const auto k = probe.delta.size();
  report.delta_uncertainty = k >= 2 ? std::abs(probe.delta[k - 1] - probe.delta[k - 2]) : std::abs(probe.limit);
  const auto& table = StableTable::instance();
  const double n1 = report.n1;
  for (double m : m_list) {
    if (!(m > 0.0)) throw std::invalid_argument("limit_check needs m > 0");
    LimitCheckRow row;
    row.m = m;
    row.rmax = limit_check_rmax(n1, m);
    row.rmax_warning = row.rmax > 1'000'000;
    const auto pmf = ldd_pmf(evaluator, m, row.rmax);
    row.captured_mass = pmf.captured_mass;
    row.aliasing_alarm = pmf.aliasing_alarm;
    row.ks = ks_distance(pmf, n1, report.delta / n1, table);
    row.ks_delta_minus = ks_distance(pmf, n1, (report.delta - report.delta_uncertainty) / n1, table);
    row.ks_delta_plus = ks_distance(pmf, n1, (report.delta + report.delta_uncertainty) / n1, table);
    row.ks_misscaled = ks_distance(pmf, 2.0 * n1, report.delta / (2.0 * n1), table);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace fluctuate

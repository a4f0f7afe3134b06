#include "phase_type.hpp"

#include <algorithm>
#include <cmath>

#include "fluctuate/parallel.hpp"

namespace fluctuate::detail {
namespace {

constexpr std::size_t kLanes = 128;

// Structure-of-arrays state for one batch: phase i occupies
// re[i * kLanes + lane], im[i * kLanes + lane]; the integral is phase k.
struct Batch {
  explicit Batch(std::size_t phases) : re((phases + 1) * kLanes), im((phases + 1) * kLanes) {}
  std::vector<double> re, im;
};

class Rhs {
 public:
  Rhs(std::span<const double> rates, const std::vector<double>& tails, double beta)
      : rates_(rates), tails_(tails), beta_(beta) {}

  // out = f(u, in) for all lanes
  void operator()(double u, const Batch& in, Batch& out, std::size_t lanes) const {
    const std::size_t k = rates_.size();
    for (std::size_t i = 0; i + 1 < k; ++i) {
      const double r = rates_[i];
      const double* ar = &in.re[i * kLanes];
      const double* ai = &in.im[i * kLanes];
      const double* br = &in.re[(i + 1) * kLanes];
      const double* bi = &in.im[(i + 1) * kLanes];
      double* orr = &out.re[i * kLanes];
      double* oi = &out.im[i * kLanes];
      for (std::size_t l = 0; l < lanes; ++l) {
        orr[l] = r * (br[l] - ar[l]);
        oi[l] = r * (bi[l] - ai[l]);
      }
    }
    const double r = rates_[k - 1];
    const double* d1r = &in.re[0];
    const double* d1i = &in.im[0];
    const double* dkr = &in.re[(k - 1) * kLanes];
    const double* dki = &in.im[(k - 1) * kLanes];
    double* okr = &out.re[(k - 1) * kLanes];
    double* oki = &out.im[(k - 1) * kLanes];
    double* ijr = &out.re[k * kLanes];
    double* iji = &out.im[k * kLanes];
    const double disc = beta_ * std::exp(-beta_ * u);
    for (std::size_t l = 0; l < lanes; ++l) {
      // phi(d) = d h(1 - d), h by Horner in x = 1 - d
      const double xr = 1.0 - d1r[l], xi = -d1i[l];
      double hr = 0.0, hi = 0.0;
      for (auto t = tails_.rbegin(); t != tails_.rend(); ++t) {
        const double nr = hr * xr - hi * xi + *t;
        hi = hr * xi + hi * xr;
        hr = nr;
      }
      const double pr = d1r[l] * hr - d1i[l] * hi;
      const double pi = d1r[l] * hi + d1i[l] * hr;
      okr[l] = r * (pr - dkr[l]);
      oki[l] = r * (pi - dki[l]);
      ijr[l] = disc * d1r[l];
      iji[l] = disc * d1i[l];
    }
  }

 private:
  std::span<const double> rates_;
  const std::vector<double>& tails_;
  double beta_;
};

}  // namespace

std::vector<std::complex<double>> phase_type_one_minus_g(const ProliferationModel& model,
                                                         std::span<const double> rates,
                                                         std::span<const std::complex<double>> points,
                                                         double step, double horizon, unsigned threads) {
  const auto& off = model.offspring();
  std::vector<double> tails(off.probs().size() - 1, 0.0);
  {
    double tail = 0.0;
    const auto& p = off.probs();
    for (std::size_t k = p.size() - 1; k-- > 0;) {
      tail += p[k + 1];
      tails[k] = tail;
    }
  }
  const double beta = model.beta();
  const double q = off.extinction_prob();
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  const double h = horizon / static_cast<double>(steps);
  const std::size_t phases = rates.size();
  const Rhs rhs(rates, tails, beta);

  std::vector<std::complex<double>> result(points.size());
  const std::size_t batches = (points.size() + kLanes - 1) / kLanes;

  parallel_for(batches, threads, [&](std::size_t b) {
    const std::size_t first = b * kLanes;
    const std::size_t lanes = std::min(kLanes, points.size() - first);
    const std::size_t width = (phases + 1) * kLanes;
    Batch y(phases), k1(phases), k2(phases), k3(phases), k4(phases), tmp(phases);
    for (std::size_t i = 0; i < phases; ++i) {
      for (std::size_t l = 0; l < lanes; ++l) {
        y.re[i * kLanes + l] = 1.0 - points[first + l].real();
        y.im[i * kLanes + l] = -points[first + l].imag();
      }
    }
    auto axpy = [&](const Batch& base, const Batch& slope, double a, Batch& out) {
      for (std::size_t j = 0; j < width; ++j) {
        out.re[j] = base.re[j] + a * slope.re[j];
        out.im[j] = base.im[j] + a * slope.im[j];
      }
    };
    for (std::size_t n = 0; n < steps; ++n) {
      const double u = h * static_cast<double>(n);
      rhs(u, y, k1, lanes);
      axpy(y, k1, 0.5 * h, tmp);
      rhs(u + 0.5 * h, tmp, k2, lanes);
      axpy(y, k2, 0.5 * h, tmp);
      rhs(u + 0.5 * h, tmp, k3, lanes);
      axpy(y, k3, h, tmp);
      rhs(u + h, tmp, k4, lanes);
      for (std::size_t j = 0; j < width; ++j) {
        y.re[j] += h / 6.0 * (k1.re[j] + 2.0 * (k2.re[j] + k3.re[j]) + k4.re[j]);
        y.im[j] += h / 6.0 * (k1.im[j] + 2.0 * (k2.im[j] + k3.im[j]) + k4.im[j]);
      }
    }
    const double tail = std::exp(-beta * horizon);
    for (std::size_t l = 0; l < lanes; ++l) {
      const auto s = points[first + l];
      const double tail_complement = (s == 1.0) ? 0.0 : (1.0 - q) * tail;
      result[first + l] = {y.re[phases * kLanes + l] + tail_complement, y.im[phases * kLanes + l]};
    }
  });
  return result;
}

}  // namespace fluctuate::detail

#include "fluctuate/stable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fluctuate/error.hpp"

namespace fluctuate {

namespace {

using boost::math::quadrature::gauss_kronrod;
constexpr double kPi = std::numbers::pi;
constexpr double kThetaMax = 200.0;
// Beyond this |psi| < e^{-pi 25} ~ 1e-34 and the integrand is negligible.
constexpr double kThetaEffective = 25.0;

// Integrates body(theta) over (0, kThetaEffective]; near 0 in theta = e^v,
// elsewhere in chunks shorter than one oscillation period of e^{-i theta x}.
template <typename F>
double integrate_theta(F body, double x, double& error) {
  const double split = std::min(1.0, 1.0 / std::max(1.0, std::abs(x)));
  double err = 0.0;
  auto in_v = [&](double v) {
    const double th = std::exp(v);
    return body(th) * th;
  };
  double total = gauss_kronrod<double, 61>::integrate(in_v, -50.0, std::log(split), 10, 1e-11, &err);
  error = err;
  const double width = std::min(1.0, 2.0 * kPi / std::max(1.0, std::abs(x)));
  for (double a = split; a < kThetaEffective; a += width) {
    const double b = std::min(a + width, kThetaEffective);
    total += gauss_kronrod<double, 61>::integrate(body, a, b, 8, 1e-11, &err);
    error += err;
  }
  return total;
}

}  // namespace

std::complex<double> stable_cf(double theta) {
  if (theta == 0.0) return 1.0;
  const double a = std::abs(theta);
  return std::exp(std::complex<double>(-kPi / 2.0 * a, -theta * std::log(a)));
}

StableCdfValue stable_cdf_detail(double x) {
  if (!(std::abs(x) <= kThetaMax)) throw std::domain_error("stable_cdf needs |x| <= 200");
  // Im(e^{-i theta x} psi(theta)) / theta = -e^{-pi theta / 2} sin(theta (x + ln theta)) / theta
  auto body = [x](double th) {
    return -std::exp(-kPi / 2.0 * th) * std::sin(th * (x + std::log(th))) / th;
  };
  double err = 0.0;
  const double integral = integrate_theta(body, x, err);
  const double value = 0.5 - integral / kPi;
  if (err / kPi > 1e-8) {
    throw NumericalError("stable_cdf quadrature failed at x = " + std::to_string(x) +
                         ", residual " + std::to_string(err / kPi));
  }
  return {std::clamp(value, 0.0, 1.0), err / kPi};
}

double stable_cdf(double x) { return stable_cdf_detail(x).value; }

double stable_pdf(double x) {
  auto body = [x](double th) { return std::exp(-kPi / 2.0 * th) * std::cos(th * (x + std::log(th))); };
  double err = 0.0;
  return std::max(0.0, integrate_theta(body, x, err) / kPi);
}

StableTable::StableTable() {
  // Dense where the law has its mass, geometric in the long right tail.
  for (double x = -12.0; x < 20.0; x += 0.05) x_.push_back(x);
  for (double x = 20.0; x < 200.0; x *= 1.02) x_.push_back(x);
  x_.push_back(200.0);
  f_.resize(x_.size());
  d_.resize(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) {
    f_[i] = stable_cdf(x_[i]);
    d_[i] = stable_pdf(x_[i]);
  }
  for (std::size_t i = 1; i < f_.size(); ++i) f_[i] = std::max(f_[i], f_[i - 1]);
}

const StableTable& StableTable::instance() {
  static const StableTable table;
  return table;
}

double StableTable::cdf(double x) const {
  if (x <= x_.front()) return 0.0;
  if (x >= x_.back()) return 1.0 - 1.0 / x;
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const auto i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double v = (2 * t3 - 3 * t2 + 1) * f_[i] + (t3 - 2 * t2 + t) * h * d_[i] + (-2 * t3 + 3 * t2) * f_[i + 1] +
                   (t3 - t2) * h * d_[i + 1];
  return std::clamp(v, f_[i], f_[i + 1]);
}

}  // namespace fluctuate

#include "fluctuate/lifetime.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace fluctuate {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Five-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 5> kGlNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                         0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGlWeights{0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};

double rahn_density(const Rahn& r, double t) {
  const double e = std::exp(-r.rate * t);
  return r.rate * r.stages * e * std::pow(-std::expm1(-r.rate * t), r.stages - 1);
}

bool is_jump(const TabulatedCdf& tab, std::size_t i) {
  return tab.t[i + 1] - tab.t[i] <= 1e-9 * tab.t.back();
}

// Integral of phi(t) dG(t) over a piecewise-linear CDF with jumps.
double tabulated_stieltjes(const TabulatedCdf& tab, const std::function<double(double)>& phi) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < tab.t.size(); ++i) {
    const double dg = tab.cdf[i + 1] - tab.cdf[i];
    if (dg == 0.0) continue;
    if (is_jump(tab, i)) {
      acc += dg * phi(tab.t[i + 1]);
      continue;
    }
    const double half = 0.5 * (tab.t[i + 1] - tab.t[i]);
    const double mid = 0.5 * (tab.t[i + 1] + tab.t[i]);
    double seg = 0.0;
    for (std::size_t k = 0; k < kGlNodes.size(); ++k) seg += kGlWeights[k] * phi(mid + half * kGlNodes[k]);
    acc += dg * 0.5 * seg;  // density dg/(2 half) times half (Jacobian)
  }
  return acc;
}

void validate(const LifetimeDistribution::Variant& v) {
  std::visit(Overloaded{
                 [](const Exponential& e) {
                   if (!(e.rate > 0.0)) throw std::invalid_argument("exponential rate must be > 0");
                 },
                 [](const KendallGamma& k) {
                   if (k.stages < 1 || !(k.rate > 0.0)) {
                     throw std::invalid_argument("kendall needs stages >= 1 and rate > 0");
                   }
                 },
                 [](const Rahn& r) {
                   if (r.stages < 1 || !(r.rate > 0.0)) {
                     throw std::invalid_argument("rahn needs rate > 0 and stages >= 1");
                   }
                 },
                 [](const TabulatedCdf& tab) {
                   if (tab.t.size() != tab.cdf.size() || tab.t.size() < 2) {
                     throw std::invalid_argument("table needs at least two (t, G) knots");
                   }
                   if (tab.t.front() != 0.0 || tab.cdf.front() != 0.0) {
                     throw std::invalid_argument("table must start at (0, 0)");
                   }
                   for (std::size_t i = 1; i < tab.t.size(); ++i) {
                     if (tab.t[i] < tab.t[i - 1] || tab.cdf[i] < tab.cdf[i - 1]) {
                       throw std::invalid_argument("table knots must be nondecreasing in t and G");
                     }
                   }
                   if (std::abs(tab.cdf.back() - 1.0) > 1e-12) {
                     throw std::invalid_argument("table must end at G = 1");
                   }
                   if (!(tab.t.back() > 0.0)) throw std::invalid_argument("table has no extent");
                 },
             },
             v);
}

bool detect_lattice(const TabulatedCdf& tab) {
  std::vector<double> jumps;
  for (std::size_t i = 0; i + 1 < tab.t.size(); ++i) {
    if (is_jump(tab, i) && tab.cdf[i + 1] > tab.cdf[i]) jumps.push_back(tab.cdf[i + 1] - tab.cdf[i]);
  }
  std::sort(jumps.begin(), jumps.end(), std::greater<>());
  double top = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(9, jumps.size()); ++i) top += jumps[i];
  return top > 0.99;
}

double tabulated_inverse(const TabulatedCdf& tab, double u) {
  const auto it = std::lower_bound(tab.cdf.begin(), tab.cdf.end(), u);
  if (it == tab.cdf.begin()) return 0.0;
  if (it == tab.cdf.end()) return tab.t.back();
  const auto i = static_cast<std::size_t>(it - tab.cdf.begin());
  const double g0 = tab.cdf[i - 1], g1 = tab.cdf[i];
  if (is_jump(tab, i - 1) || g1 == g0) return tab.t[i];
  return tab.t[i - 1] + (u - g0) / (g1 - g0) * (tab.t[i] - tab.t[i - 1]);
}

}  // namespace

LifetimeDistribution::LifetimeDistribution(Variant v) : v_(std::move(v)) {
  validate(v_);
  if (const auto* tab = std::get_if<TabulatedCdf>(&v_)) lattice_ = detect_lattice(*tab);
}

std::string LifetimeDistribution::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const Exponential& e) { os << "exponential(" << e.rate << ")"; },
                 [&](const KendallGamma& k) { os << "kendall(" << k.stages << ", " << k.rate << ")"; },
                 [&](const Rahn& r) { os << "rahn(" << r.rate << ", " << r.stages << ")"; },
                 [&](const TabulatedCdf& tab) { os << "table[" << tab.t.size() << " knots]"; },
             },
             v_);
  return os.str();
}

double LifetimeDistribution::cdf(double t) const {
  if (t < 0.0) throw std::domain_error("lifetime cdf needs t >= 0");
  return std::visit(Overloaded{
                        [&](const Exponential& e) { return -std::expm1(-e.rate * t); },
                        [&](const KendallGamma& k) {
                          return boost::math::gamma_p(static_cast<double>(k.stages), k.stages * k.rate * t);
                        },
                        [&](const Rahn& r) {
                          return std::pow(-std::expm1(-r.rate * t), static_cast<double>(r.stages));
                        },
                        [&](const TabulatedCdf& tab) {
                          const auto it = std::upper_bound(tab.t.begin(), tab.t.end(), t);
                          if (it == tab.t.end()) return 1.0;
                          const auto i = static_cast<std::size_t>(it - tab.t.begin());
                          const double w = (t - tab.t[i - 1]) / (tab.t[i] - tab.t[i - 1]);
                          return tab.cdf[i - 1] + w * (tab.cdf[i] - tab.cdf[i - 1]);
                        },
                    },
                    v_);
}

double LifetimeDistribution::survival(double t) const {
  if (t < 0.0) throw std::domain_error("lifetime survival needs t >= 0");
  return std::visit(Overloaded{
                        [&](const Exponential& e) { return std::exp(-e.rate * t); },
                        [&](const KendallGamma& k) {
                          return boost::math::gamma_q(static_cast<double>(k.stages), k.stages * k.rate * t);
                        },
                        [&](const Rahn& r) {
                          return -std::expm1(r.stages * std::log1p(-std::exp(-r.rate * t)));
                        },
                        [&](const TabulatedCdf&) { return 1.0 - cdf(t); },
                    },
                    v_);
}

double LifetimeDistribution::laplace_stieltjes(double beta) const {
  if (beta < 0.0) throw std::domain_error("laplace_stieltjes needs beta >= 0");
  return std::visit(Overloaded{
                        [&](const Exponential& e) { return e.rate / (e.rate + beta); },
                        [&](const KendallGamma& k) {
                          const double r = k.stages * k.rate;
                          return std::pow(r / (r + beta), static_cast<double>(k.stages));
                        },
                        [&](const Rahn& r) {
                          double prod = 1.0;
                          for (int i = 1; i <= r.stages; ++i) prod *= i / (beta / r.rate + i);
                          return prod;
                        },
                        [&](const TabulatedCdf& tab) {
                          return tabulated_stieltjes(tab, [beta](double t) { return std::exp(-beta * t); });
                        },
                    },
                    v_);
}

double LifetimeDistribution::discounted_mean(double beta) const {
  if (beta < 0.0) throw std::domain_error("discounted_mean needs beta >= 0");
  return std::visit(
      Overloaded{
          [&](const Exponential& e) { return e.rate / ((e.rate + beta) * (e.rate + beta)); },
          [&](const KendallGamma& k) {
            const double r = k.stages * k.rate;
            return k.stages * std::pow(r / (r + beta), static_cast<double>(k.stages)) / (r + beta);
          },
          [&](const Rahn& r) {
            boost::math::quadrature::exp_sinh<double> integrator;
            auto f = [&](double t) { return t * std::exp(-beta * t) * rahn_density(r, t); };
            return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-15);
          },
          [&](const TabulatedCdf& tab) {
            return tabulated_stieltjes(tab, [beta](double t) { return t * std::exp(-beta * t); });
          },
      },
      v_);
}

double LifetimeDistribution::median() const {
  return std::visit(Overloaded{
                        [](const Exponential& e) { return std::log(2.0) / e.rate; },
                        [](const KendallGamma& k) {
                          return boost::math::gamma_p_inv(static_cast<double>(k.stages), 0.5) /
                                 (k.stages * k.rate);
                        },
                        [](const Rahn& r) {
                          return -std::log1p(-std::pow(0.5, 1.0 / r.stages)) / r.rate;
                        },
                        [](const TabulatedCdf& tab) { return tabulated_inverse(tab, 0.5); },
                    },
                    v_);
}

double LifetimeDistribution::sample(Rng& rng) const {
  return std::visit(Overloaded{
                        [&](const Exponential& e) { return exponential(rng, e.rate); },
                        [&](const KendallGamma& k) {
                          double t = 0.0;
                          for (int i = 0; i < k.stages; ++i) t += exponential(rng, k.stages * k.rate);
                          return t;
                        },
                        [&](const Rahn& r) {
                          double t = 0.0;
                          for (int i = 0; i < r.stages; ++i) t = std::max(t, exponential(rng, r.rate));
                          return t;
                        },
                        [&](const TabulatedCdf& tab) { return tabulated_inverse(tab, uniform_open(rng)); },
                    },
                    v_);
}

std::optional<std::vector<double>> LifetimeDistribution::phase_rates() const {
  return std::visit(
      Overloaded{
          [](const Exponential& e) -> std::optional<std::vector<double>> { return std::vector{e.rate}; },
          [](const KendallGamma& k) -> std::optional<std::vector<double>> {
            return std::vector<double>(static_cast<std::size_t>(k.stages), k.stages * k.rate);
          },
          [](const Rahn& r) -> std::optional<std::vector<double>> {
            // max of k exponentials = sum of spacings with rates k a, (k-1) a, ..., a
            std::vector<double> rates;
            for (int i = r.stages; i >= 1; --i) rates.push_back(i * r.rate);
            return rates;
          },
          [](const TabulatedCdf&) -> std::optional<std::vector<double>> { return std::nullopt; },
      },
      v_);
}

}  // namespace fluctuate

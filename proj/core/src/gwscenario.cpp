#include "fluctuate/gwscenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fluctuate {

namespace {

int default_terms(double mu) {
  // mu^{-N} / (1 - 1/mu) < 1e-12
  return static_cast<int>(std::ceil((std::log(1e12) - std::log1p(-1.0 / mu)) / std::log(mu)));
}

int detect_power(const OffspringDistribution& f) {
  const auto& p = f.probs();
  if (p.back() == 1.0) return static_cast<int>(p.size() - 1);
  return 0;
}

constexpr double kNegligible = 1e-17;

}  // namespace

GwSeries::GwSeries(OffspringDistribution f, int terms)
    : f_(std::move(f)), kind_(Kind::Generic), mu_(f_.mean()) {
  power_ = detect_power(f_);
  if (power_ > 0) kind_ = Kind::Power;
  kappa_ = (mu_ - 1.0) / (mu_ * std::log(mu_));
  if (terms < 0) throw std::invalid_argument("terms must be nonnegative");
  terms_ = terms > 0 ? terms : default_terms(mu_);
}

GwSeries GwSeries::power(int mu, int terms) {
  if (mu < 2) throw std::invalid_argument("power law needs an integer mean >= 2");
  std::vector<double> p(static_cast<std::size_t>(mu) + 1, 0.0);
  p.back() = 1.0;
  return GwSeries(OffspringDistribution(std::move(p)), terms);
}

GwSeries GwSeries::fractional_linear(double mu, int terms) {
  GwSeries out(OffspringDistribution::fractional_linear(mu), terms);
  out.kind_ = Kind::FractionalLinear;
  out.mu_ = mu;
  out.kappa_ = (mu - 1.0) / (mu * std::log(mu));
  if (terms == 0) out.terms_ = default_terms(mu);
  return out;
}

double GwSeries::remainder_bound() const noexcept {
  return std::pow(mu_, -terms_) / (1.0 - 1.0 / mu_);
}

double GwSeries::complement_iterate(double d, int i) const {
  switch (kind_) {
    case Kind::Power:
      return -std::expm1(std::pow(static_cast<double>(power_), i) * std::log1p(-d));
    case Kind::FractionalLinear: {
      const double mi = std::pow(mu_, i);
      return mi * d / (1.0 + (mi - 1.0) * d);
    }
    case Kind::Generic:
      break;
  }
  for (int k = 0; k < i; ++k) d = f_.complement_map(d);
  return d;
}

double GwSeries::g_f(double s) const {
  if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("g_f needs s in [0, 1]");
  if (kind_ == Kind::Generic) return g_f_iterated(s);
  const double d = 1.0 - s;
  double acc = 0.0, weight = 1.0;
  for (int i = 0; i < terms_; ++i) {
    acc += weight * (1.0 - complement_iterate(d, i));
    weight /= mu_;
  }
  // The iterates have settled by the cut; carry the last one into the tail.
  return (mu_ - 1.0) / mu_ * acc + weight * (1.0 - complement_iterate(d, terms_));
}

double GwSeries::g_f_iterated(double s) const {
  if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("g_f needs s in [0, 1]");
  double fi = s, acc = 0.0, comp = 0.0, weight = 1.0;
  for (int i = 0; i < terms_; ++i) {
    // Kahan-compensated accumulation of f_i / mu^i.
    const double y = weight * fi - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
    fi = f_.pgf(fi);
    weight /= mu_;
  }
  return (mu_ - 1.0) / mu_ * acc + weight * fi;
}

double GwSeries::gamma_at(double d) const {
  if (!(d > 0.0 && d <= 1.0)) throw std::domain_error("gamma_f needs 1 - s in (0, 1]");
  double acc = 0.0, weight = 1.0, di = d;
  for (int i = 0; weight > kNegligible * d; ++i) {
    if (kind_ != Kind::Generic) di = complement_iterate(d, i);
    acc += weight * di;
    if (kind_ == Kind::Generic) di = f_.complement_map(di);
    weight /= mu_;
  }
  return (mu_ - 1.0) / mu_ * acc / d;
}

double GwSeries::delta_at(double d) const { return gamma_at(d) + kappa_ * std::log(d); }

double delta_gw(const GwSeries& series, double s) {
  const double q = series.offspring().extinction_prob();
  if (!(s > q && s < 1.0)) throw std::domain_error("delta_gw needs s in (q, 1)");
  return series.delta_at(1.0 - s);
}

std::vector<double> gamma_coefficients(const GwSeries& series, int max_degree) {
  if (max_degree < 0) throw std::invalid_argument("max_degree must be nonnegative");
  const auto K = static_cast<std::size_t>(max_degree);
  const double mu = series.mean();
  std::vector<double> acc(K + 1, 0.0);
  double weight = 1.0;

  if (series.kind() == GwSeries::Kind::FractionalLinear) {
    // (1 - f_i(s)) / (mu^i (1 - s)) = mu^{-i} sum_k (1 - mu^{-i})^k s^k
    for (; weight > kNegligible; weight /= mu) {
      double pk = weight;
      for (std::size_t k = 0; k <= K; ++k) {
        acc[k] += pk;
        pk *= 1.0 - weight;
      }
    }
  } else {
    const auto& pi = series.offspring().probs();
    std::vector<double> fi(K + 1, 0.0);  // coefficients of f_i, truncated at degree K
    if (K >= 1) fi[1] = 1.0;
    if (K == 0) fi[0] = 0.0;
    std::vector<double> next(K + 1), prod(K + 1);
    for (; weight > kNegligible; weight /= mu) {
      // (1 - f_i) / (1 - s) has coefficients 1 - (partial sums of f_i).
      double partial = 0.0;
      for (std::size_t k = 0; k <= K; ++k) {
        partial += fi[k];
        acc[k] += weight * (1.0 - partial);
      }
      // f_{i+1} = f(f_i) by Horner on truncated series.
      std::fill(next.begin(), next.end(), 0.0);
      next[0] = pi.back();
      for (std::size_t j = pi.size() - 1; j-- > 0;) {
        std::fill(prod.begin(), prod.end(), 0.0);
        for (std::size_t a = 0; a <= K; ++a) {
          if (next[a] == 0.0) continue;
          for (std::size_t b = 0; a + b <= K; ++b) prod[a + b] += next[a] * fi[b];
        }
        prod[0] += pi[j];
        next.swap(prod);
      }
      fi.swap(next);
    }
  }
  for (auto& c : acc) c *= (mu - 1.0) / mu;
  return acc;
}

namespace {

double harmonic(long n) {
  double h = 0.0;
  for (long k = n; k >= 1; --k) h += 1.0 / static_cast<double>(k);
  return h;
}

}  // namespace

double harmonic_identity_check(int mu, int n) {
  if (mu < 2) throw std::invalid_argument("harmonic identity needs integer mu >= 2");
  if (n < 1 || n > 1'000'000) throw std::invalid_argument("harmonic identity needs 1 <= n <= 10^6");
  const double lmu = std::log(static_cast<double>(mu));
  const double nd = static_cast<double>(n);
  auto integrand = [&](double u) { return -std::expm1(nd * std::log1p(-std::exp(-u * lmu))); };
  using boost::math::quadrature::gauss_kronrod;
  const double centre = std::log(nd) / lmu;
  const double knots[] = {0.0, std::max(0.0, centre - 4.0 / lmu), centre + 8.0 / lmu, centre + 60.0 / lmu};
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (knots[k + 1] > knots[k]) {
      total += gauss_kronrod<double, 61>::integrate(integrand, knots[k], knots[k + 1], 15, 1e-15);
    }
  }
  total += gauss_kronrod<double, 61>::integrate(integrand, knots[3], std::numeric_limits<double>::infinity(), 15,
                                                1e-15);
  return std::abs(total - harmonic(n) / lmu);
}

double fraclin_discounted_partial_sum(double mu, long n) {
  if (!(mu > 1.0) || n < 1) throw std::invalid_argument("need mu > 1 and n >= 1");
  const double nd = static_cast<double>(n);
  double acc = 0.0;
  for (double x = 1.0; nd * x > kNegligible; x /= mu) {
    acc += x == 1.0 ? 1.0 : -std::expm1(nd * std::log1p(-x));
  }
  return acc - harmonic(n) / std::log(mu);
}

SubsequenceGap subsequence_gap(const GwSeries& series, int n_first, int n_last, double c_a, double c_b) {
  if (n_last < n_first) throw std::invalid_argument("need n_first <= n_last");
  SubsequenceGap out;
  out.min_gap = std::numeric_limits<double>::infinity();
  for (int n = n_first; n <= n_last; ++n) {
    const double a = series.delta_at(std::ldexp(c_a, -n));
    const double b = series.delta_at(std::ldexp(c_b, -n));
    out.n.push_back(n);
    out.delta_a.push_back(a);
    out.delta_b.push_back(b);
    out.gap.push_back(std::abs(a - b));
    out.min_gap = std::min(out.min_gap, out.gap.back());
  }
  return out;
}

IncrementReport cauchy_increments(const GwSeries& series, int n_first, int n_last) {
  if (n_last <= n_first) throw std::invalid_argument("need n_first < n_last");
  IncrementReport out;
  for (int n = n_first; n <= n_last; ++n) {
    out.n.push_back(n);
    out.delta.push_back(series.delta_at(std::ldexp(1.0, -n)));
  }
  for (std::size_t i = 1; i < out.delta.size(); ++i) {
    out.increments.push_back(std::abs(out.delta[i] - out.delta[i - 1]));
    if (i > 1 && !(out.increments.back() < out.increments[out.increments.size() - 2])) out.monotone = false;
  }
  return out;
}

PeriodReport oscillation_period(const GwSeries& series, double t_min, double t_max, int samples) {
  if (!(t_max > t_min) || samples < 3) throw std::invalid_argument("need t_min < t_max and samples >= 3");
  std::vector<double> t(static_cast<std::size_t>(samples)), v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = t_min + (t_max - t_min) * static_cast<double>(i) / static_cast<double>(samples - 1);
    v[i] = series.delta_at(std::exp(-t[i]));
  }
  PeriodReport out;
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) {
      // Parabolic refinement of the peak location.
      const double denom = v[i - 1] - 2.0 * v[i] + v[i + 1];
      const double shift = denom != 0.0 ? 0.5 * (v[i - 1] - v[i + 1]) / denom : 0.0;
      out.peak_t.push_back(t[i] + shift * (t[1] - t[0]));
    }
  }
  if (out.peak_t.size() >= 2) {
    out.period = (out.peak_t.back() - out.peak_t.front()) / static_cast<double>(out.peak_t.size() - 1);
  }
  return out;
}

}  // namespace fluctuate

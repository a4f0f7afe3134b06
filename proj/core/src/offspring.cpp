#include "fluctuate/offspring.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fluctuate/error.hpp"

namespace fluctuate {
namespace {

constexpr double kNormTol = 1e-12;
constexpr double kDomainTol = 1e-12;

template <typename T>
T horner(const std::vector<double>& c, T x) {
  T acc{0.0};
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

void check_domain(double modulus) {
  if (modulus > 1.0 + kDomainTol) {
    throw std::domain_error("offspring pgf evaluated outside the unit disk: |s| = " +
                            std::to_string(modulus));
  }
}

}  // namespace

OffspringDistribution::OffspringDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("offspring law needs at least one probability");
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("offspring probabilities must be finite and nonnegative");
    }
  }
  while (probs_.size() > 1 && probs_.back() == 0.0) probs_.pop_back();

  const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::abs(total - 1.0) > kNormTol) {
    throw std::invalid_argument("offspring probabilities sum to " + std::to_string(total) +
                                ", expected 1");
  }
  mean_ = 0.0;
  for (std::size_t k = 1; k < probs_.size(); ++k) mean_ += static_cast<double>(k) * probs_[k];
  if (!(mean_ > 1.0)) {
    throw std::invalid_argument("offspring law must be supercritical (mean " +
                                std::to_string(mean_) + " <= 1)");
  }

  tails_.assign(probs_.size() - 1, 0.0);
  double tail = 0.0;
  for (std::size_t k = probs_.size() - 1; k-- > 0;) {
    tail += probs_[k + 1];
    tails_[k] = tail;
  }

  q_ = fluctuate::extinction_prob(*this);
}

OffspringDistribution OffspringDistribution::binary_split() { return OffspringDistribution({0.0, 0.0, 1.0}); }

OffspringDistribution OffspringDistribution::fractional_linear(double mean, double tail_tol) {
  if (!(mean > 1.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("fractional_linear needs a finite mean > 1");
  }
  // pi_k = (1/mean) r^{k-1}, k >= 1, r = (mean-1)/mean; tail beyond K is r^K.
  const double r = (mean - 1.0) / mean;
  const auto terms = static_cast<std::size_t>(std::ceil(std::log(tail_tol) / std::log(r)));
  std::vector<double> probs(terms + 1, 0.0);
  double p = 1.0 / mean;
  for (std::size_t k = 1; k <= terms; ++k, p *= r) probs[k] = p;
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& x : probs) x /= total;
  return OffspringDistribution(std::move(probs));
}

double OffspringDistribution::second_factorial_moment() const noexcept {
  double acc = 0.0;
  for (std::size_t k = 2; k < probs_.size(); ++k) {
    acc += static_cast<double>(k) * static_cast<double>(k - 1) * probs_[k];
  }
  return acc;
}

std::complex<double> OffspringDistribution::pgf(std::complex<double> s) const {
  check_domain(std::abs(s));
  return horner(probs_, s);
}

double OffspringDistribution::pgf(double s) const {
  check_domain(std::abs(s));
  return horner(probs_, s);
}

std::complex<double> OffspringDistribution::h(std::complex<double> s) const {
  check_domain(std::abs(s));
  if (s == 1.0) return mean_;
  return horner(tails_, s);
}

double OffspringDistribution::h(double s) const {
  check_domain(std::abs(s));
  if (s == 1.0) return mean_;
  return horner(tails_, s);
}

std::complex<double> OffspringDistribution::complement_map(std::complex<double> d) const noexcept {
  return d * horner(tails_, 1.0 - d);
}

double OffspringDistribution::complement_map(double d) const noexcept {
  return d * horner(tails_, 1.0 - d);
}

double OffspringDistribution::h_defect(double s) const noexcept {
  const double log1m = std::log1p(-s);
  double acc = 0.0;
  for (std::size_t k = 1; k < tails_.size(); ++k) {
    acc += tails_[k] * -std::expm1(static_cast<double>(k) * log1m);
  }
  return acc;
}

double extinction_prob(const OffspringDistribution& dist) {
  constexpr int kMaxSteps = 1'000'000;
  double q = 0.0;
  for (int n = 0; n < kMaxSteps; ++n) {
    const double next = dist.pgf(q);
    if (std::abs(next - q) < 1e-14) return next;
    q = next;
  }
  throw NumericalError("extinction probability iteration did not converge in 10^6 steps");
}

StarProbeReport star_probe(const OffspringDistribution& dist, std::span<const double> s_grid) {
  if (s_grid.empty()) throw std::invalid_argument("star_probe needs a nonempty grid");
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (!(s_grid[i] > 0.0 && s_grid[i] <= 0.5)) {
      throw std::invalid_argument("star_probe grid must lie in (0, 0.5]");
    }
    if (i > 0 && !(s_grid[i] < s_grid[i - 1])) {
      throw std::invalid_argument("star_probe grid must be strictly decreasing");
    }
  }

  StarProbeReport report{};
  for (double s : s_grid) {
    const double d = dist.h_defect(s);
    if (!(d > 0.0) || !std::isnormal(d)) {
      report.truncated = true;
      break;
    }
    double slope = std::nan("");
    if (!report.rows.empty()) {
      const auto& prev = report.rows.back();
      slope = std::log(prev.defect / d) / std::log(prev.s / s);
    }
    report.rows.push_back({s, d, slope});
  }

  const auto n = report.rows.size();
  report.omega_estimate = n >= 2 ? report.rows.back().local_slope : std::nan("");
  if (n >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& row : report.rows) {
      const double x = std::log(row.s), y = std::log(row.defect);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double nn = static_cast<double>(n);
    report.fitted_slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  } else {
    report.fitted_slope = std::nan("");
  }
  return report;
}

}  // namespace fluctuate

#include "fluctuate/estimate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "fluctuate/error.hpp"
#include "fluctuate/parallel.hpp"
#include "fluctuate/random.hpp"

namespace fluctuate {

namespace {

constexpr double kHalfChi2 = 1.92;  // 3.84 / 2

using Histogram = std::map<std::uint64_t, std::uint64_t>;

double loglik_histogram(const Histogram& hist, const LddFamily& family, double a, std::uint64_t cutoff,
                        bool* tail_flag) {
  const auto p = family.pmf_recursion(a / family.n1(), static_cast<std::size_t>(cutoff));
  double mass = 0.0;
  for (double v : p) mass += v;
  constexpr double kFloor = std::numeric_limits<double>::min();
  double ll = 0.0;
  for (const auto& [value, mult] : hist) {
    double pr;
    if (value <= cutoff) {
      pr = p[value];
    } else {
      pr = 1.0 - mass;
      if (pr <= 0.0 && tail_flag) *tail_flag = true;
    }
    ll += static_cast<double>(mult) * std::log(std::max(pr, kFloor));
  }
  return ll;
}

Histogram histogram(const ExperimentData& data) {
  Histogram h;
  for (auto c : data.counts) ++h[c];
  return h;
}

std::uint64_t resolve_cutoff(const ExperimentData& data, const MleOptions& options) {
  if (options.jackpot_cutoff) return *options.jackpot_cutoff;
  if (data.jackpot_cutoff) return *data.jackpot_cutoff;
  return default_jackpot_cutoff(data);
}

}  // namespace

void validate(const ExperimentData& data) {
  if (data.counts.empty()) throw DataError("experiment has no cultures");
  if (data.n_final && !(*data.n_final > 0.0)) throw DataError("final population size must be positive");
}

std::uint64_t default_jackpot_cutoff(const ExperimentData& data) {
  validate(data);
  auto sorted = data.counts;
  std::sort(sorted.begin(), sorted.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(sorted.size()))) - 1;
  return std::max<std::uint64_t>(50, sorted[std::min(idx, sorted.size() - 1)]);
}

P0Estimate p0_estimate(const ExperimentData& data, double n) {
  validate(data);
  if (!(n > 0.0)) throw std::invalid_argument("p0 method needs a positive final population size");
  P0Estimate out;
  out.cultures = data.counts.size();
  out.zeros = static_cast<std::size_t>(std::count(data.counts.begin(), data.counts.end(), 0));
  if (out.zeros == 0) throw DataError("p0-method inapplicable: no culture is free of mutants");
  const double c = static_cast<double>(out.cultures);
  out.p0_hat = static_cast<double>(out.zeros) / c;
  if (out.zeros == out.cultures) {
    out.rho_hat = 0.0;
    out.se_rho = 0.0;
    out.upper_bound = std::log(20.0) / (c * n);  // p0 >= 0.05^{1/C} at 95%
    return out;
  }
  out.rho_hat = -std::log(out.p0_hat) / n;
  out.se_rho = std::sqrt(out.p0_hat * (1.0 - out.p0_hat) / c) / (out.p0_hat * n);
  return out;
}

double log_likelihood(const ExperimentData& data, const LddFamily& family, double a, std::uint64_t cutoff,
                      bool* tail_flag) {
  validate(data);
  if (cutoff > family.rmax()) throw std::invalid_argument("jackpot cutoff exceeds the PMF family length");
  return loglik_histogram(histogram(data), family, a, cutoff, tail_flag);
}

FitResult mle_fit(const ExperimentData& data, const LddFamily& family, const MleOptions& options) {
  validate(data);
  if (!(options.a_min > 0.0 && options.a_max > options.a_min) || options.grid_points < 3) {
    throw std::invalid_argument("MLE search interval or grid is invalid");
  }
  const auto cutoff = resolve_cutoff(data, options);
  if (cutoff > family.rmax()) throw std::invalid_argument("jackpot cutoff exceeds the PMF family length");
  // The likelihood only needs multiplicities.
  const auto hist = histogram(data);

  std::atomic<bool> tail_seen{false};
  auto loglik = [&](double a) {
    bool flag = false;
    const double ll = loglik_histogram(hist, family, a, cutoff, &flag);
    if (flag) tail_seen = true;
    return ll;
  };

  const double la = std::log(options.a_min), lb = std::log(options.a_max);
  const std::size_t n = options.grid_points;
  const double step = (lb - la) / static_cast<double>(n - 1);
  std::vector<double> grid(n), values(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = std::clamp(la + (static_cast<double>(i) + options.grid_offset) * step, la, lb);
  }
  parallel_for(n, options.threads, [&](std::size_t i) { values[i] = loglik(std::exp(grid[i])); });
  const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());

  // Golden-section refinement in log A between the neighbours of the best node.
  double lo = grid[best > 0 ? best - 1 : 0];
  double hi = grid[best + 1 < n ? best + 1 : n - 1];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = loglik(std::exp(x1)), f2 = loglik(std::exp(x2));
  while (hi - lo > options.rel_tol) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = loglik(std::exp(x1));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = loglik(std::exp(x2));
    }
  }
  double lbest = 0.5 * (lo + hi);
  double fbest = loglik(std::exp(lbest));
  if (values[best] > fbest) {
    lbest = grid[best];
    fbest = values[best];
  }

  FitResult fit;
  fit.A_hat = std::exp(lbest);
  fit.m_hat = fit.A_hat / family.n1();
  fit.loglik = fbest;
  fit.jackpot_cutoff = cutoff;
  fit.boundary = lbest - la < 2.0 * options.rel_tol || lb - lbest < 2.0 * options.rel_tol;
  if (!std::isfinite(fbest)) throw NumericalError("log-likelihood is not finite at the maximum");

  // Profile interval: bracket the crossing of loglik_max - 1.92 with grid nodes, then bisect.
  const double target = fbest - kHalfChi2;
  auto crossing = [&](double inside, double outside) {
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (inside + outside);
      (loglik(std::exp(mid)) >= target ? inside : outside) = mid;
    }
    return std::exp(0.5 * (inside + outside));
  };
  std::optional<double> out_lo, out_hi;
  for (std::size_t i = best + 1; i-- > 0;) {
    if (grid[i] < lbest && values[i] < target) {
      out_lo = grid[i];
      break;
    }
  }
  for (std::size_t i = best; i < n; ++i) {
    if (grid[i] > lbest && values[i] < target) {
      out_hi = grid[i];
      break;
    }
  }
  fit.ci_low = out_lo ? crossing(lbest, *out_lo) : options.a_min;
  fit.ci_high = out_hi ? crossing(lbest, *out_hi) : options.a_max;
  fit.ci_low = std::min(fit.ci_low, fit.A_hat);
  fit.ci_high = std::max(fit.ci_high, fit.A_hat);
  fit.tail_flag = tail_seen;
  fit.B_hat = options.delta ? *options.delta / family.n1() : std::numeric_limits<double>::quiet_NaN();
  if (data.n_final) fit.rho_hat = fit.m_hat / *data.n_final;
  return fit;
}

FitResult mle_fit(const ExperimentData& data, const PgfEvaluator& evaluator, const MleOptions& options) {
  validate(data);
  const auto cutoff = resolve_cutoff(data, options);
  const LddFamily family(evaluator, static_cast<std::size_t>(std::max<std::uint64_t>(cutoff, 1)));
  MleOptions opts = options;
  if (!opts.delta) opts.delta = delta_probe(evaluator, default_delta_sequence()).limit;
  opts.jackpot_cutoff = cutoff;
  return mle_fit(data, family, opts);
}

RhoEstimate rho_from_fit(const FitResult& fit, double n1, std::optional<double> n_final) {
  if (!(n1 > 0.0)) throw std::invalid_argument("n1 must be positive");
  RhoEstimate out{fit.A_hat / n1, std::nullopt};
  if (n_final) {
    if (!(*n_final > 0.0)) throw std::invalid_argument("n_final must be positive");
    out.rho_hat = out.m_hat / *n_final;
  }
  return out;
}

BootstrapInterval bootstrap_ci(const ExperimentData& data, const LddFamily& family, const MleOptions& options,
                               std::size_t replicates, std::uint64_t seed) {
  validate(data);
  if (replicates < 2) throw std::invalid_argument("bootstrap needs at least two replicates");
  MleOptions opts = options;
  opts.jackpot_cutoff = resolve_cutoff(data, options);
  opts.threads = 1;
  BootstrapInterval out;
  out.replicates.resize(replicates);
  parallel_for(replicates, options.threads, [&](std::size_t b) {
    Rng rng = substream(seed, b);
    ExperimentData resample;
    resample.counts.resize(data.counts.size());
    std::uniform_int_distribution<std::size_t> pick(0, data.counts.size() - 1);
    for (auto& c : resample.counts) c = data.counts[pick(rng)];
    out.replicates[b] = mle_fit(resample, family, opts).A_hat;
  });
  auto sorted = out.replicates;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < sorted.size() ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac : sorted[i];
  };
  out.low = quantile(0.025);
  out.high = quantile(0.975);
  return out;
}

}  // namespace fluctuate

#pragma once

#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "fluctuate/random.hpp"

namespace fluctuate {

struct Exponential {
  double rate;
};

/// Sum of `stages` exponential phases of rate stages*rate (mean 1/rate).
struct KendallGamma {
  int stages;
  double rate;
};

/// Maximum of `stages` independent exponentials of rate `rate`;
/// CDF (1 - e^{-rate t})^stages.
struct Rahn {
  double rate;
  int stages;
};

/// Piecewise-linear CDF through the knots (t_i, G_i). Repeated t values
/// encode jumps; the first knot must be (0, 0) and the last G must be 1.
struct TabulatedCdf {
  std::vector<double> t;
  std::vector<double> cdf;
};

/// Cell life-time law G(t) with G(0) = 0 and G(inf) = 1.
class LifetimeDistribution {
 public:
  using Variant = std::variant<Exponential, KendallGamma, Rahn, TabulatedCdf>;

  LifetimeDistribution(Variant v);  // NOLINT(google-explicit-constructor)

  /// Direct conversion from any single law, e.g. `LifetimeDistribution d = Exponential{1.0};`.
  template <class Law>
    requires(!std::is_same_v<std::remove_cvref_t<Law>, Variant> &&
             !std::is_same_v<std::remove_cvref_t<Law>, LifetimeDistribution> &&
             std::is_constructible_v<Variant, Law>)
  LifetimeDistribution(Law&& law)  // NOLINT(google-explicit-constructor)
      : LifetimeDistribution(Variant(std::forward<Law>(law))) {}

  const Variant& variant() const noexcept { return v_; }
  std::string describe() const;

  double cdf(double t) const;
  double survival(double t) const;
  /// int_0^inf e^{-beta t} dG(t).
  double laplace_stieltjes(double beta) const;
  /// int_0^inf t e^{-beta t} dG(t).
  double discounted_mean(double beta) const;
  double mean() const { return discounted_mean(0.0); }
  double median() const;
  double sample(Rng& rng) const;

  /// True for tabulated step functions carrying > 99% of their mass in
  /// fewer than 10 jumps.
  bool is_lattice() const noexcept { return lattice_; }

  /// Rates of sequential exponential phases whose total duration has law G,
  /// when such a representation exists (all built-in families).
  std::optional<std::vector<double>> phase_rates() const;

 private:
  Variant v_;
  bool lattice_ = false;
};

}  // namespace fluctuate

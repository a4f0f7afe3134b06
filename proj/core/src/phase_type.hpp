#pragma once

#include <complex>
#include <span>
#include <vector>

#include "fluctuate/malthus.hpp"

namespace fluctuate::detail {

/// 1 - g(s) for a life-time law made of sequential exponential phases with
/// the given rates. Complement variables d_i = 1 - F^{(i)}_u(s) obey
///   d_i' = r_i (d_{i+1} - d_i),  d_k' = r_k (1 - f(1 - d_1) - d_k),
/// integrated by classical RK4 on a uniform grid shared by all points.
std::vector<std::complex<double>> phase_type_one_minus_g(const ProliferationModel& model,
                                                         std::span<const double> rates,
                                                         std::span<const std::complex<double>> points,
                                                         double step, double horizon, unsigned threads);

}  // namespace fluctuate::detail

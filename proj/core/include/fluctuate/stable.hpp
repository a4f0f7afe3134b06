#pragma once

#include <complex>
#include <vector>

namespace fluctuate {

/// psi(theta) = (-i theta)^{-i theta} = exp(-i theta ln|theta| - (pi/2)|theta|),
/// the characteristic function of the totally skewed index-1 stable limit.
std::complex<double> stable_cf(double theta);

struct StableCdfValue {
  double value;
  double error_estimate;
};

/// Gil-Pelaez inversion 1/2 - (1/pi) int_0^200 Im(e^{-i theta x} psi(theta)) / theta dtheta
/// by adaptive Gauss-Kronrod quadrature, clamped to [0, 1]. |x| <= 200.
/// Throws NumericalError when the quadrature error estimate exceeds 1e-8.
StableCdfValue stable_cdf_detail(double x);
double stable_cdf(double x);
/// (1/pi) int_0^inf Re(e^{-i theta x} psi(theta)) dtheta.
double stable_pdf(double x);

/// Precomputed CDF on a nonuniform grid of [-12, 200] with cubic Hermite
/// interpolation (node slopes are the density). Outside the grid the CDF is
/// 0 on the left and 1 - 1/x on the right.
class StableTable {
 public:
  StableTable();
  static const StableTable& instance();

  double cdf(double x) const;
  const std::vector<double>& nodes() const noexcept { return x_; }

 private:
  std::vector<double> x_, f_, d_;
};

}  // namespace fluctuate

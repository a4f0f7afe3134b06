#include <doctest.h>

#include <gsl/gsl_integration.h>
#include <gsl/gsl_randist.h>

#include <cmath>
#include <complex>

#include "fluctuate/stable.hpp"

using namespace fluctuate;

namespace {

// CDF of the Landau law from GSL's density by adaptive quadrature; the left
// tail below -8 is smaller than 1e-300.
double landau_cdf(double x) {
  gsl_integration_workspace* w = gsl_integration_workspace_alloc(2000);
  gsl_function f;
  f.function = [](double t, void*) { return gsl_ran_landau_pdf(t); };
  f.params = nullptr;
  double result = 0.0, err = 0.0;
  gsl_integration_qags(&f, -8.0, x, 0.0, 1e-11, 2000, w, &result, &err);
  gsl_integration_workspace_free(w);
  return result;
}

}  // namespace

TEST_CASE("characteristic function") {
  CHECK(stable_cf(0.0) == std::complex<double>(1.0, 0.0));
  for (double th : {0.3, 1.0, 4.0}) {
    const auto expect = std::exp(std::complex<double>(-M_PI * th / 2.0, -th * std::log(th)));
    CHECK(std::abs(stable_cf(th) - expect) < 1e-14);
    CHECK(std::abs(stable_cf(-th) - std::conj(expect)) < 1e-14);
  }
}

TEST_CASE("density matches the Landau density") {
  for (double x : {-3.0, -1.5, -0.2, 0.0, 0.7, 2.0, 5.0, 20.0, 80.0}) {
    CHECK(stable_pdf(x) == doctest::Approx(gsl_ran_landau_pdf(x)).epsilon(1e-6));
  }
}

TEST_CASE("distribution function matches integrated Landau density") {
  for (double x : {-3.0, -2.0, -1.0, 0.0, 0.5, 1.0, 3.0, 10.0}) {
    CHECK(std::abs(stable_cdf(x) - landau_cdf(x)) < 1e-7);
  }
}

TEST_CASE("distribution function regression values") {
  CHECK(stable_cdf(0.0) == doctest::Approx(0.286832880125).epsilon(1e-10));
  CHECK(stable_cdf(-2.0) == doctest::Approx(0.014094357934).epsilon(1e-9));
  CHECK(stable_cdf(1.0) == doctest::Approx(0.451018092820).epsilon(1e-10));
  CHECK(stable_cdf(10.0) == doctest::Approx(0.882938865914).epsilon(1e-10));
  CHECK(stable_cdf(50.0) == doctest::Approx(0.978556991345).epsilon(1e-10));
  CHECK(stable_cdf(150.0) == doctest::Approx(0.993125298340).epsilon(1e-10));
  const auto detail = stable_cdf_detail(3.0);
  CHECK(detail.error_estimate < 1e-8);
  CHECK_THROWS(stable_cdf_detail(500.0));
}

TEST_CASE("right tail behaves like 1 - 1/x") {
  for (double x : {100.0, 150.0, 200.0}) CHECK((1.0 - stable_cdf(x)) * x == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("table interpolation") {
  const auto& table = StableTable::instance();
  CHECK(table.nodes().front() <= -12.0);
  CHECK(table.nodes().back() >= 200.0);
  double prev = 0.0;
  for (double x = -12.0; x <= 199.0; x += 0.37) {
    const double v = table.cdf(x);
    CHECK(std::abs(v - stable_cdf(x)) < 1e-8);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(table.cdf(-50.0) == 0.0);
  CHECK(table.cdf(1e6) == doctest::Approx(1.0 - 1e-6).epsilon(1e-9));
  CHECK(&StableTable::instance() == &table);
}

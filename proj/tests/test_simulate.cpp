#include <doctest.h>

#include <cmath>
#include <vector>

#include "fluctuate/simulate.hpp"

using namespace fluctuate;

namespace {

CellType yule_cell(double rate = 1.0) { return {OffspringDistribution::binary_split(), Exponential{rate}}; }

SimConfig yule_config() {
  SimConfig c{yule_cell(), yule_cell()};
  c.rho = 1e-3;
  c.max_cells = 2000;
  c.cultures = 64;
  c.threads = 1;
  return c;
}

struct Moments {
  double mean = 0.0, var = 0.0;
};

Moments total_cell_moments(const SimulationRun& run) {
  Moments m;
  for (const auto& c : run.cultures) m.mean += static_cast<double>(c.total_cells);
  m.mean /= static_cast<double>(run.cultures.size());
  for (const auto& c : run.cultures) m.var += std::pow(static_cast<double>(c.total_cells) - m.mean, 2);
  m.var /= static_cast<double>(run.cultures.size() - 1);
  return m;
}

}  // namespace

TEST_CASE("configuration checks") {
  auto c = yule_config();
  c.rho = 1.5;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = yule_config();
  c.max_cells = 0;
  c.max_time = 0.0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = yule_config();
  c.cultures = 0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("results do not depend on the thread count") {
  for (bool queue : {false, true}) {
    auto c = yule_config();
    c.force_event_queue = queue;
    c.threads = 1;
    const auto a = run_experiment(c);
    c.threads = 4;
    const auto b = run_experiment(c);
    REQUIRE(a.cultures.size() == b.cultures.size());
    for (std::size_t i = 0; i < a.cultures.size(); ++i) {
      CHECK(a.cultures[i].mutant_cells == b.cultures[i].mutant_cells);
      CHECK(a.cultures[i].births_total == b.cultures[i].births_total);
      CHECK(a.cultures[i].stop_time == b.cultures[i].stop_time);
    }
    c.seed = 43;
    const auto other = run_experiment(c);
    bool differs = false;
    for (std::size_t i = 0; i < a.cultures.size(); ++i) differs |= a.cultures[i].stop_time != other.cultures[i].stop_time;
    CHECK(differs);
  }
}

TEST_CASE("cell-count stop and bookkeeping") {
  const auto run = run_experiment(yule_config());
  double trials = 0.0;
  for (const auto& c : run.cultures) {
    CHECK(c.total_cells == 2000);
    CHECK(c.births_total == 2 * (c.total_cells - 1));  // every division adds one net cell
    CHECK(c.mutation_trials <= c.births_total);
    CHECK(c.mutant_cells <= c.total_cells);
    CHECK_FALSE(c.extinct);
    trials += static_cast<double>(c.mutation_trials);
  }
  CHECK(run.m_hat == doctest::Approx(1e-3 * trials / 64.0));
  CHECK(run.neutrality_residual < 1e-12);
  const auto data = run.data();
  REQUIRE(data.counts.size() == 64);
  CHECK(data.counts[5] == run.cultures[5].mutant_cells);
}

TEST_CASE("Yule population mean at a fixed time") {
  // E N(t) = e^t and Var N(t) = e^{2t} - e^t for unit rate.
  for (bool queue : {false, true}) {
    auto c = yule_config();
    c.max_cells = 0;
    c.max_time = 4.0;
    c.cultures = 2000;
    c.rho = 0.0;
    c.force_event_queue = queue;
    const auto m = total_cell_moments(run_experiment(c));
    const double mean = std::exp(4.0);
    const double se = std::sqrt((std::exp(8.0) - mean) / 2000.0);
    CHECK(std::abs(m.mean - mean) < 4.0 * se);
    CHECK(m.var == doctest::Approx(std::exp(8.0) - mean).epsilon(0.2));
  }
}

TEST_CASE("two-stage life times grow at the Malthusian rate") {
  SimConfig c{{OffspringDistribution::binary_split(), KendallGamma{2, 1.0}},
              {OffspringDistribution::binary_split(), KendallGamma{2, 1.0}}};
  c.cultures = 1500;
  c.threads = 1;
  // log of the mean population grows by beta per unit time once the age structure settles.
  auto mean_at = [&](double t) {
    c.max_time = t;
    return total_cell_moments(run_experiment(c)).mean;
  };
  const double slope = (std::log(mean_at(10.0)) - std::log(mean_at(6.0))) / 4.0;
  CHECK(slope == doctest::Approx(2.0 * (std::sqrt(2.0) - 1.0)).epsilon(0.03));
}

TEST_CASE("extinction frequency matches q") {
  // pi = (0.3, 0, 0.7) has q = 3/7.
  const OffspringDistribution f({0.3, 0.0, 0.7});
  SimConfig c{{f, Exponential{1.0}}, {f, Exponential{1.0}}};
  c.max_cells = 60;
  c.cultures = 4000;
  c.threads = 1;
  const auto run = run_experiment(c);
  double extinct = 0.0;
  for (const auto& r : run.cultures) {
    extinct += r.extinct ? 1.0 : 0.0;
    if (r.extinct) CHECK(r.total_cells == 0);
  }
  const double q = 3.0 / 7.0;
  CHECK(std::abs(extinct / 4000.0 - q) < 4.0 * std::sqrt(q * (1.0 - q) / 4000.0));
}

TEST_CASE("certain mutation converts every daughter") {
  auto c = yule_config();
  c.rho = 1.0;
  c.max_cells = 500;
  c.cultures = 4;
  for (const auto& r : run_experiment(c).cultures) {
    CHECK(r.mutant_cells == r.total_cells);
    CHECK(r.mutation_trials == 2);
  }
}

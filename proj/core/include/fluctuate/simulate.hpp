#pragma once

#include <cstdint>
#include <vector>

#include "fluctuate/estimate.hpp"
#include "fluctuate/lifetime.hpp"
#include "fluctuate/offspring.hpp"
#include "fluctuate/random.hpp"

namespace fluctuate {

struct CellType {
  OffspringDistribution offspring;
  LifetimeDistribution lifetime;
};

struct SimConfig {
  CellType nonmutant;
  CellType mutant;
  double rho = 0.0;             // mutation probability per daughter of a non-mutant
  std::uint64_t max_cells = 0;  // stop once this many cells are alive; 0 disables
  double max_time = 0.0;        // stop at this time; 0 disables
  std::uint64_t seed = 42;
  std::size_t cultures = 1;
  unsigned threads = 0;  // 0 = hardware concurrency
  /// Use the event queue even when both life-times are exponential.
  bool force_event_queue = false;
};

/// Throws std::invalid_argument for rho outside [0,1], no stop rule, or C = 0.
void validate(const SimConfig& config);

struct CultureResult {
  std::uint64_t total_cells = 0;
  std::uint64_t mutant_cells = 0;
  std::uint64_t births_total = 0;     // daughters produced by all divisions
  std::uint64_t mutation_trials = 0;  // daughters of non-mutant cells
  double stop_time = 0.0;
  bool extinct = false;
};

inline constexpr std::uint64_t kMaxLivingCells = 100'000'000;

/// Event-driven simulation of one culture from a single non-mutant founder.
/// When both life-times are exponential the process is Markov in the cell
/// counts and is simulated exactly by competing exponential clocks;
/// otherwise a priority queue of division times is used.
/// Throws std::length_error past kMaxLivingCells living cells.
CultureResult grow_culture(const SimConfig& config, Rng& rng);

struct SimulationRun {
  std::vector<CultureResult> cultures;
  double neutrality_residual = 0.0;
  /// rho times the mean number of mutation trials per culture.
  double m_hat = 0.0;

  ExperimentData data() const;
};

/// C cultures, culture i driven by substream(seed, i); identical results for
/// any thread count.
SimulationRun run_experiment(const SimConfig& config);

}  // namespace fluctuate

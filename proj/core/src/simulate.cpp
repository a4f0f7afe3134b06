#include "fluctuate/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "fluctuate/malthus.hpp"
#include "fluctuate/parallel.hpp"

namespace fluctuate {

namespace {

class OffspringSampler {
 public:
  explicit OffspringSampler(const OffspringDistribution& dist) {
    double acc = 0.0;
    for (double p : dist.probs()) {
      acc += p;
      cumulative_.push_back(acc);
    }
    cumulative_.back() = 1.0;
  }

  unsigned operator()(Rng& rng) const {
    const double u = uniform_open(rng);
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    return static_cast<unsigned>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

struct Event {
  double time;
  std::uint64_t seq;
  bool mutant;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return a.time > b.time || (a.time == b.time && a.seq > b.seq);
  }
};

CultureResult grow_markov(const SimConfig& config, double rate_normal, double rate_mutant,
                          const OffspringSampler& draw_normal, const OffspringSampler& draw_mutant, Rng& rng) {
  const double horizon = config.max_time > 0.0 ? config.max_time : HUGE_VAL;
  const std::uint64_t target = config.max_cells > 0 ? config.max_cells : UINT64_MAX;
  CultureResult out;
  std::uint64_t normal = 1;
  double clock = 0.0;
  while (normal + out.mutant_cells < target) {
    if (normal + out.mutant_cells == 0) {
      out.extinct = true;
      break;
    }
    const double w_normal = rate_normal * static_cast<double>(normal);
    const double total = w_normal + rate_mutant * static_cast<double>(out.mutant_cells);
    const double next = clock + exponential(rng, total);
    if (next > horizon) {
      clock = horizon;
      break;
    }
    clock = next;
    const bool mutant_parent = uniform_open(rng) * total >= w_normal;
    const unsigned k = mutant_parent ? draw_mutant(rng) : draw_normal(rng);
    out.births_total += k;
    if (mutant_parent) {
      out.mutant_cells += k;
      --out.mutant_cells;
    } else {
      --normal;
      for (unsigned d = 0; d < k; ++d) {
        ++out.mutation_trials;
        if (uniform_open(rng) < config.rho) {
          ++out.mutant_cells;
        } else {
          ++normal;
        }
      }
    }
    if (normal + out.mutant_cells > kMaxLivingCells) {
      throw std::length_error("culture exceeded the 10^8-cell memory guard");
    }
  }
  out.total_cells = normal + out.mutant_cells;
  out.stop_time = clock;
  return out;
}

}  // namespace

void validate(const SimConfig& config) {
  if (!(config.rho >= 0.0 && config.rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
  if (config.max_cells == 0 && !(config.max_time > 0.0)) {
    throw std::invalid_argument("simulation needs max_cells >= 1 or max_time > 0");
  }
  if (config.max_time < 0.0) throw std::invalid_argument("max_time must be >= 0");
  if (config.cultures == 0) throw std::invalid_argument("simulation needs at least one culture");
}

CultureResult grow_culture(const SimConfig& config, Rng& rng) {
  validate(config);
  const OffspringSampler draw_normal(config.nonmutant.offspring);
  const OffspringSampler draw_mutant(config.mutant.offspring);
  const auto* exp_normal = std::get_if<Exponential>(&config.nonmutant.lifetime.variant());
  const auto* exp_mutant = std::get_if<Exponential>(&config.mutant.lifetime.variant());
  if (exp_normal && exp_mutant && !config.force_event_queue) {
    return grow_markov(config, exp_normal->rate, exp_mutant->rate, draw_normal, draw_mutant, rng);
  }
  const double horizon = config.max_time > 0.0 ? config.max_time : HUGE_VAL;
  const std::uint64_t target = config.max_cells > 0 ? config.max_cells : UINT64_MAX;

  std::vector<Event> storage;
  storage.reserve(std::min<std::uint64_t>(target, 1u << 20) + 16);
  std::priority_queue<Event, std::vector<Event>, Later> queue(Later{}, std::move(storage));
  std::uint64_t seq = 0;

  CultureResult out;
  std::uint64_t living = 1;
  queue.push({config.nonmutant.lifetime.sample(rng), seq++, false});
  double clock = 0.0;

  while (living < target) {
    if (queue.empty()) {
      out.extinct = true;
      break;
    }
    const Event ev = queue.top();
    if (ev.time > horizon) {
      clock = horizon;
      break;
    }
    queue.pop();
    clock = ev.time;
    --living;
    if (ev.mutant) --out.mutant_cells;
    const unsigned k = ev.mutant ? draw_mutant(rng) : draw_normal(rng);
    out.births_total += k;
    for (unsigned d = 0; d < k; ++d) {
      bool mutant = ev.mutant;
      if (!mutant) {
        ++out.mutation_trials;
        mutant = uniform_open(rng) < config.rho;
      }
      const CellType& type = mutant ? config.mutant : config.nonmutant;
      queue.push({clock + type.lifetime.sample(rng), seq++, mutant});
      if (mutant) ++out.mutant_cells;
    }
    living += k;
    if (living > kMaxLivingCells) throw std::length_error("culture exceeded the 10^8-cell memory guard");
  }
  out.total_cells = living;
  out.stop_time = clock;
  return out;
}

ExperimentData SimulationRun::data() const {
  ExperimentData d;
  d.counts.reserve(cultures.size());
  double total = 0.0;
  for (const auto& c : cultures) {
    d.counts.push_back(c.mutant_cells);
    total += static_cast<double>(c.total_cells);
  }
  if (!cultures.empty()) d.n_final = total / static_cast<double>(cultures.size());
  return d;
}

SimulationRun run_experiment(const SimConfig& config) {
  validate(config);
  SimulationRun run;
  run.neutrality_residual = check_neutrality(config.mutant.offspring, config.mutant.lifetime,
                                             config.nonmutant.offspring, config.nonmutant.lifetime);
  run.cultures.resize(config.cultures);
  parallel_for(config.cultures, config.threads, [&](std::size_t i) {
    Rng rng = substream(config.seed, i);
    run.cultures[i] = grow_culture(config, rng);
  });
  double trials = 0.0;
  for (const auto& c : run.cultures) trials += static_cast<double>(c.mutation_trials);
  run.m_hat = config.rho * trials / static_cast<double>(config.cultures);
  return run;
}

}  // namespace fluctuate

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fluctuate/bhpgf.hpp"
#include "fluctuate/estimate.hpp"
#include "fluctuate/simulate.hpp"

namespace fluctuate::cli {

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kData = 3 };

/// Flat key = value model description. Keys `offspring` / `lifetime` set both
/// cell types; `mutant.*` and `nonmutant.*` set one. Numerical overrides:
/// h, horizon, rmax, points, method.
struct ModelConfig {
  std::string mutant_offspring = "[0, 0, 1]";
  std::string mutant_lifetime = "exponential(1)";
  std::string nonmutant_offspring = "[0, 0, 1]";
  std::string nonmutant_lifetime = "exponential(1)";
  std::optional<double> h;
  std::optional<double> horizon;
  std::optional<std::size_t> rmax;
  std::optional<std::size_t> points;
  std::string method = "auto";
  // Simulation keys (ignored by the analytic commands).
  std::optional<double> rho;
  std::optional<std::uint64_t> max_cells;
  std::optional<double> max_time;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cultures;
};

ModelConfig parse_config(const std::string& text);
ModelConfig load_config(const std::string& path);
/// Canonical form: every key, fixed order, constructors normalized.
std::string emit_config(const ModelConfig& config);

OffspringDistribution parse_offspring(const std::string& spec);
/// Canonical spelling of an offspring spec.
std::string canonical_offspring(const std::string& spec);
/// `base_dir` resolves relative table paths.
LifetimeDistribution parse_lifetime(const std::string& spec, const std::string& base_dir = ".");
std::string canonical_lifetime(const std::string& spec);
/// Two-point law on {floor(mu), floor(mu) + 1} with mean mu.
OffspringDistribution offspring_with_mean(double mu);

ProliferationModel mutant_model(const ModelConfig& config, const std::string& base_dir = ".");
PgfNumerics numerics(const ModelConfig& config, unsigned threads);
SimConfig sim_config(const ModelConfig& config, const std::string& base_dir = ".");

/// counts.csv: one integer per line, `culture_id,count` pairs, or a file with
/// a header naming a `mutants` column. Throws DataError on malformed input.
ExperimentData read_counts(std::istream& in);
ExperimentData load_counts(const std::string& path);

/// Runs the command line; returns the process exit code.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fluctuate::cli

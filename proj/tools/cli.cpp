#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <locale>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fluctuate/error.hpp"
#include "fluctuate/gwscenario.hpp"
#include "fluctuate/lddist.hpp"
#include "fluctuate/malthus.hpp"
#include "fluctuate/parallel.hpp"

namespace fluctuate::cli {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& what) {
  const auto t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw DataError("cannot parse " + what + " from '" + t + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view text, const std::string& what) {
  const auto t = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec == std::errc() && res.ptr == t.data() + t.size() && !t.empty()) return v;
  // Accept integral values written in floating notation such as 1e5.
  const double d = parse_double(t, what);
  if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19) throw DataError("expected a nonnegative integer " + what);
  return static_cast<std::uint64_t>(d);
}

std::vector<double> parse_list(std::string_view text, const std::string& what) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    if (!trim(item).empty()) out.push_back(parse_double(item, what));
  }
  return out;
}

// "name(a, b)" -> {name, [a, b]}
std::pair<std::string, std::vector<std::string>> split_call(const std::string& spec) {
  const auto s = trim(spec);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') return {lower(s), {}};
  std::vector<std::string> args;
  std::istringstream in(s.substr(open + 1, s.size() - open - 2));
  std::string item;
  while (std::getline(in, item, ',')) args.push_back(trim(item));
  return {lower(trim(s.substr(0, open))), args};
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path);
  out.imbue(std::locale::classic());
  return out;
}

std::string directory_of(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  return parent.empty() ? "." : parent.string();
}

LifetimeDistribution read_table(const std::string& path) {
  std::istringstream in(read_file(path));
  TabulatedCdf tab;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError("table row without comma in " + path + ": " + line);
    const auto first = trim(line.substr(0, comma));
    if (tab.t.empty() && !first.empty() && std::isalpha(static_cast<unsigned char>(first[0]))) continue;  // header
    tab.t.push_back(parse_double(first, "t in " + path));
    tab.cdf.push_back(parse_double(line.substr(comma + 1), "G in " + path));
  }
  try {
    return LifetimeDistribution(std::move(tab));
  } catch (const std::invalid_argument& e) {
    throw DataError(path + ": " + e.what());
  }
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

void write_json(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

}  // namespace

OffspringDistribution offspring_with_mean(double mu) {
  if (!(mu > 1.0) || !std::isfinite(mu)) throw std::invalid_argument("offspring mean must exceed 1");
  const double base = std::floor(mu);
  const double frac = mu - base;
  std::vector<double> p(static_cast<std::size_t>(base) + 2, 0.0);
  p[static_cast<std::size_t>(base)] = 1.0 - frac;
  p[static_cast<std::size_t>(base) + 1] = frac;
  return OffspringDistribution(std::move(p));
}

OffspringDistribution parse_offspring(const std::string& spec) {
  const auto s = trim(spec);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw DataError("offspring list must end with ']': " + s);
    return OffspringDistribution(parse_list(s.substr(1, s.size() - 2), "offspring probability"));
  }
  const auto [name, args] = split_call(s);
  if ((name == "fractional_linear" || name == "fraclin") && args.size() == 1) {
    return OffspringDistribution::fractional_linear(parse_double(args[0], "fractional_linear mean"));
  }
  if (name == "binary") return OffspringDistribution::binary_split();
  throw DataError("unknown offspring law: " + s);
}

std::string canonical_offspring(const std::string& spec) {
  const auto s = trim(spec);
  if (!s.empty() && s.front() == '[') {
    const auto p = parse_list(s.substr(1, s.size() - 2), "offspring probability");
    std::string out = "[";
    for (std::size_t i = 0; i < p.size(); ++i) out += (i ? ", " : "") + fmt(p[i]);
    return out + "]";
  }
  const auto [name, args] = split_call(s);
  if ((name == "fractional_linear" || name == "fraclin") && args.size() == 1) {
    return "fractional_linear(" + fmt(parse_double(args[0], "fractional_linear mean")) + ")";
  }
  if (name == "binary") return "[0, 0, 1]";
  throw DataError("unknown offspring law: " + s);
}

LifetimeDistribution parse_lifetime(const std::string& spec, const std::string& base_dir) {
  const auto [name, args] = split_call(spec);
  auto stages = [](const std::string& a) {
    const auto k = parse_uint(a, "stage count");
    if (k < 1 || k > 10000) throw DataError("stage count must lie in [1, 10000]");
    return static_cast<int>(k);
  };
  auto rate = [](const std::string& a) {
    const double r = parse_double(a, "rate");
    if (!(r > 0.0) || !std::isfinite(r)) throw DataError("rates must be positive");
    return r;
  };
  if (name == "exponential" && args.size() == 1) return LifetimeDistribution(Exponential{rate(args[0])});
  if (name == "kendall" && args.size() == 2) return LifetimeDistribution(KendallGamma{stages(args[0]), rate(args[1])});
  if (name == "rahn" && args.size() == 2) return LifetimeDistribution(Rahn{rate(args[0]), stages(args[1])});
  if (name == "table" && args.size() == 1) {
    const std::filesystem::path p(unquote(args[0]));
    return read_table(p.is_absolute() ? p.string() : (std::filesystem::path(base_dir) / p).string());
  }
  throw DataError("unknown life-time law: " + trim(spec));
}

std::string canonical_lifetime(const std::string& spec) {
  const auto [name, args] = split_call(spec);
  if (name == "exponential" && args.size() == 1) return "exponential(" + fmt(parse_double(args[0], "rate")) + ")";
  if (name == "kendall" && args.size() == 2) {
    return "kendall(" + std::to_string(parse_uint(args[0], "stage count")) + ", " +
           fmt(parse_double(args[1], "rate")) + ")";
  }
  if (name == "rahn" && args.size() == 2) {
    return "rahn(" + fmt(parse_double(args[0], "rate")) + ", " + std::to_string(parse_uint(args[1], "stage count")) +
           ")";
  }
  if (name == "table" && args.size() == 1) return "table(" + unquote(args[0]) + ")";
  throw DataError("unknown life-time law: " + trim(spec));
}

ModelConfig parse_config(const std::string& text) {
  ModelConfig c;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;  // blank, comment, or section header
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("config line " + std::to_string(number) + " has no '='");
    auto key = lower(trim(line.substr(0, eq)));
    std::replace(key.begin(), key.end(), '_', '.');
    const auto value = unquote(trim(line.substr(eq + 1)));
    if (key == "offspring") {
      c.mutant_offspring = c.nonmutant_offspring = canonical_offspring(value);
    } else if (key == "lifetime") {
      c.mutant_lifetime = c.nonmutant_lifetime = canonical_lifetime(value);
    } else if (key == "mutant.offspring") {
      c.mutant_offspring = canonical_offspring(value);
    } else if (key == "mutant.lifetime") {
      c.mutant_lifetime = canonical_lifetime(value);
    } else if (key == "nonmutant.offspring") {
      c.nonmutant_offspring = canonical_offspring(value);
    } else if (key == "nonmutant.lifetime") {
      c.nonmutant_lifetime = canonical_lifetime(value);
    } else if (key == "h") {
      c.h = parse_double(value, "h");
    } else if (key == "horizon") {
      if (lower(value) != "auto") c.horizon = parse_double(value, "horizon");
    } else if (key == "rmax") {
      c.rmax = parse_uint(value, "rmax");
    } else if (key == "points") {
      c.points = parse_uint(value, "points");
    } else if (key == "method") {
      c.method = lower(value);
      if (c.method != "auto" && c.method != "volterra" && c.method != "phase") {
        throw DataError("method must be auto, volterra or phase");
      }
    } else if (key == "rho") {
      c.rho = parse_double(value, "rho");
    } else if (key == "max.cells" || key == "nmax") {
      c.max_cells = parse_uint(value, "max_cells");
    } else if (key == "max.time") {
      c.max_time = parse_double(value, "max_time");
    } else if (key == "seed") {
      c.seed = parse_uint(value, "seed");
    } else if (key == "cultures") {
      c.cultures = parse_uint(value, "cultures");
    } else {
      throw DataError("unknown config key '" + trim(line.substr(0, eq)) + "' on line " + std::to_string(number));
    }
  }
  return c;
}

ModelConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string emit_config(const ModelConfig& c) {
  std::ostringstream os;
  os << "mutant_offspring = " << c.mutant_offspring << '\n'
     << "mutant_lifetime = " << c.mutant_lifetime << '\n'
     << "nonmutant_offspring = " << c.nonmutant_offspring << '\n'
     << "nonmutant_lifetime = " << c.nonmutant_lifetime << '\n'
     << "method = " << c.method << '\n';
  if (c.h) os << "h = " << fmt(*c.h) << '\n';
  if (c.horizon) os << "horizon = " << fmt(*c.horizon) << '\n';
  if (c.rmax) os << "rmax = " << *c.rmax << '\n';
  if (c.points) os << "points = " << *c.points << '\n';
  if (c.rho) os << "rho = " << fmt(*c.rho) << '\n';
  if (c.max_cells) os << "max_cells = " << *c.max_cells << '\n';
  if (c.max_time) os << "max_time = " << fmt(*c.max_time) << '\n';
  if (c.seed) os << "seed = " << *c.seed << '\n';
  if (c.cultures) os << "cultures = " << *c.cultures << '\n';
  return os.str();
}

ProliferationModel mutant_model(const ModelConfig& config, const std::string& base_dir) {
  return {parse_offspring(config.mutant_offspring), parse_lifetime(config.mutant_lifetime, base_dir)};
}

PgfNumerics numerics(const ModelConfig& config, unsigned threads) {
  PgfNumerics n;
  n.method = config.method == "volterra" ? PgfMethod::Volterra
             : config.method == "phase"  ? PgfMethod::PhaseType
                                         : PgfMethod::Auto;
  n.step = config.h.value_or(0.0);
  n.horizon = config.horizon.value_or(0.0);
  n.threads = resolve_threads(threads);
  return n;
}

SimConfig sim_config(const ModelConfig& config, const std::string& base_dir) {
  SimConfig s{
      {parse_offspring(config.nonmutant_offspring), parse_lifetime(config.nonmutant_lifetime, base_dir)},
      {parse_offspring(config.mutant_offspring), parse_lifetime(config.mutant_lifetime, base_dir)},
  };
  s.rho = config.rho.value_or(0.0);
  s.max_cells = config.max_cells.value_or(0);
  s.max_time = config.max_time.value_or(0.0);
  s.seed = config.seed.value_or(42);
  s.cultures = config.cultures.value_or(1);
  return s;
}

ExperimentData read_counts(std::istream& in) {
  ExperimentData data;
  std::string line;
  int column = -1;  // -1: decide from the first data row
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(trim(cell));
    if (data.counts.empty() && column < 0 && !cells.empty() && !cells[0].empty() &&
        std::isalpha(static_cast<unsigned char>(cells[0][0]))) {
      // Header: prefer a `mutants` column, then `count`, then the last column.
      column = static_cast<int>(cells.size()) - 1;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto name = lower(cells[i]);
        if (name == "mutants" || name == "count" || name == "counts") {
          column = static_cast<int>(i);
          break;
        }
      }
      continue;
    }
    const int col = column >= 0 ? column : (cells.size() >= 2 ? 1 : 0);
    if (col >= static_cast<int>(cells.size())) {
      throw DataError("counts line " + std::to_string(number) + " has too few columns");
    }
    data.counts.push_back(parse_uint(cells[static_cast<std::size_t>(col)], "count on line " + std::to_string(number)));
  }
  if (data.counts.empty()) throw DataError("counts file holds no cultures");
  return data;
}

ExperimentData load_counts(const std::string& path) {
  std::istringstream in(read_file(path));
  return read_counts(in);
}

namespace {

struct Globals {
  unsigned threads = 0;
  std::uint64_t seed = 42;
  bool seed_given = false;
};

ModelConfig config_or_default(const std::string& path) { return path.empty() ? ModelConfig{} : load_config(path); }

std::string base_of(const std::string& path) { return path.empty() ? "." : directory_of(path); }

json model_json(const ProliferationModel& model) {
  return {{"beta", model.beta()}, {"n1", model.n1()}, {"mu", model.offspring().mean()},
          {"q", model.offspring().extinction_prob()}, {"model", model_tag(model)}};
}

json neutrality_json(const ModelConfig& cfg, const std::string& base) {
  const double r = check_neutrality(parse_offspring(cfg.mutant_offspring), parse_lifetime(cfg.mutant_lifetime, base),
                                    parse_offspring(cfg.nonmutant_offspring),
                                    parse_lifetime(cfg.nonmutant_lifetime, base));
  return {{"residual", r}, {"neutral", r < kNeutralityTolerance}};
}

int run_selftest(std::ostream& out) {
  json report = json::array();
  bool ok = true;
  auto record = [&](const std::string& name, double error, double tolerance) {
    const bool pass = error < tolerance;
    ok = ok && pass;
    report.push_back({{"check", name}, {"error", error}, {"tolerance", tolerance}, {"pass", pass}});
  };
  const ProliferationModel yule(OffspringDistribution::binary_split(), LifetimeDistribution(Exponential{1.0}));

  {
    std::vector<cplx> pts{0.1, 0.5, 0.9, cplx(0.3, 0.4)};
    const auto grid = solve_renewal(yule, pts, 1e-3, 5.0);
    double err = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      for (std::size_t i = 0; i < grid.rows(); i += 250) {
        const double e = std::exp(-grid.time(i));
        const cplx exact = pts[j] * e / (1.0 - pts[j] * (1.0 - e));
        err = std::max(err, std::abs(exact - grid.value(i, j)));
      }
    }
    record("yule_closed_form", err, 1e-6);
  }
  {
    const PgfEvaluator ev(yule);
    double err = 0.0;
    for (double s : {0.1, 0.5, 0.9}) {
      const double exact = 1.0 + (1.0 - s) / s * std::log1p(-s);
      err = std::max(err, std::abs(ev.g(s) - exact));
    }
    record("lea_coulson_g", err, 1e-6);
    double perr = 0.0;
    for (double m : {0.5, 1.0, 4.0}) {
      const auto pmf = ldd_pmf(ev, m, default_pmf_rmax(1.0, m));
      const auto ref = lea_coulson_recursion(m, 100);
      for (std::size_t r = 0; r <= 100; ++r) perr = std::max(perr, std::abs(pmf.probs[r] - ref[r]));
    }
    record("lea_coulson_recursion", perr, 1e-8);
  }
  double herr = 0.0;
  for (auto [mu, n] : {std::pair{2, 1}, std::pair{2, 100}, std::pair{3, 10}}) {
    herr = std::max(herr, harmonic_identity_check(mu, n));
  }
  record("harmonic_identity", herr, 1e-8);
  write_json(out, {{"checks", report}, {"pass", ok}});
  return ok ? kOk : kNumerical;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  out.imbue(std::locale::classic());
  CLI::App app{"Luria-Delbrueck distributions under Bellman-Harris proliferation models", "fluctuate"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
  app.add_option("--seed", g.seed, "Random seed")->each([&](const std::string&) { g.seed_given = true; });

  std::function<int()> action;

  // beta / n1
  double mu = 0.0;
  std::string offspring_spec, lifetime_spec = "exponential(1)";
  auto model_from_flags = [&] {
    if (mu == 0.0 && offspring_spec.empty()) throw std::invalid_argument("pass --mu or --offspring");
    auto off = offspring_spec.empty() ? offspring_with_mean(mu) : parse_offspring(offspring_spec);
    return ProliferationModel(std::move(off), parse_lifetime(lifetime_spec));
  };
  auto* beta_cmd = app.add_subcommand("beta", "Malthusian parameter and n1 of one cell type");
  beta_cmd->add_option("--mu", mu, "Mean offspring number");
  beta_cmd->add_option("--offspring", offspring_spec, "Offspring law, [p0, p1, ...] or fractional_linear(mu)");
  beta_cmd->add_option("--lifetime", lifetime_spec, "exponential(l) | kendall(k, l) | rahn(a, k) | table(path)");
  beta_cmd->callback([&] {
    action = [&] {
      const auto model = model_from_flags();
      write_json(out, {{"beta", model.beta()}, {"n1", model.n1()}});
      return kOk;
    };
  });
  auto* n1_cmd = app.add_subcommand("n1", "Correction factor n1 with its lower bound and closed forms");
  n1_cmd->add_option("--mu", mu, "Mean offspring number");
  n1_cmd->add_option("--offspring", offspring_spec, "Offspring law");
  n1_cmd->add_option("--lifetime", lifetime_spec, "Life-time law");
  n1_cmd->callback([&] {
    action = [&] {
      const auto model = model_from_flags();
      const double m = model.offspring().mean();
      json j{{"n1", model.n1()}, {"beta", model.beta()}, {"n1_lower_bound", n1_lower_bound(m)}};
      if (const auto* k = std::get_if<KendallGamma>(&model.lifetime().variant())) {
        j["n1_closed_form"] = kendall_n1(k->stages, m);
        j["beta_closed_form"] = kendall_beta(k->stages, k->rate, m);
      } else if (const auto* r = std::get_if<Rahn>(&model.lifetime().variant())) {
        j["n1_closed_form"] = rahn_n1(r->rate, r->stages, model.beta(), m);
        j["beta_heuristic"] = rahn_beta_heuristic(r->rate, r->stages, m);
      }
      write_json(out, j);
      return kOk;
    };
  });

  // pgf
  std::string model_path, out_path, s_points = "0.1,0.5,0.9", horizon_text = "auto";
  double h = 0.0;
  std::size_t stride = 1;
  auto* pgf_cmd = app.add_subcommand("pgf", "Solve the renewal equation and report g, gamma, delta");
  pgf_cmd->add_option("--model", model_path, "Model config file");
  pgf_cmd->add_option("--s-points", s_points, "Comma-separated real points in [0, 1]");
  pgf_cmd->set_help_flag("--help", "Print this help message and exit");
  pgf_cmd->add_option("--h", h, "Time step (default from the model)");
  pgf_cmd->add_option("--horizon", horizon_text, "Time horizon or 'auto'");
  pgf_cmd->add_option("--stride", stride, "Write every n-th time row to the CSV")->check(CLI::PositiveNumber);
  pgf_cmd->add_option("--out", out_path, "CSV of (point, s, u, re F, im F)");
  pgf_cmd->callback([&] {
    action = [&] {
      const auto cfg = config_or_default(model_path);
      const auto model = mutant_model(cfg, base_of(model_path));
      const auto reals = parse_list(s_points, "s point");
      if (reals.empty()) throw std::invalid_argument("--s-points is empty");
      for (double s : reals) {
        if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("--s-points must lie in [0, 1]");
      }
      const double step = h > 0.0 ? h : cfg.h.value_or(default_renewal_step(model));
      const double horizon = lower(horizon_text) == "auto"
                                 ? cfg.horizon.value_or(default_horizon(model))
                                 : parse_double(horizon_text, "horizon");
      const std::vector<cplx> pts(reals.begin(), reals.end());
      const auto grid = solve_renewal(model, pts, step, horizon, resolve_threads(g.threads));
      if (!out_path.empty()) {
        auto csv = open_output(out_path);
        csv.precision(17);
        csv << "point,s,u,re,im\n";
        for (std::size_t j = 0; j < pts.size(); ++j) {
          for (std::size_t i = 0; i < grid.rows(); i += stride) {
            const auto v = grid.value(i, j);
            csv << j << ',' << reals[j] << ',' << grid.time(i) << ',' << v.real() << ',' << v.imag() << '\n';
          }
        }
      }
      json rows = json::array();
      for (std::size_t j = 0; j < pts.size(); ++j) {
        const auto gv = compute_g(model, grid, j);
        json row{{"s", reals[j]}, {"g", gv.value.real()}, {"tail_warning", gv.tail_warning}};
        if (reals[j] < 1.0) {
          const double gamma = gv.one_minus.real() / (1.0 - reals[j]);
          row["gamma"] = gamma;
          row["delta"] = gamma + model.n1() * std::log1p(-reals[j]);
        }
        rows.push_back(row);
      }
      write_json(out, {{"model", model_json(model)}, {"h", step}, {"horizon", grid.horizon()}, {"points", rows}});
      return kOk;
    };
  });

  // pmf
  double m_value = 0.0;
  std::size_t rmax = 0, points = 0;
  auto* pmf_cmd = app.add_subcommand("pmf", "Mutant-count distribution for a given m");
  pmf_cmd->add_option("--model", model_path, "Model config file");
  pmf_cmd->add_option("--m", m_value, "Expected number of mutations")->required();
  pmf_cmd->add_option("--rmax", rmax, "Largest count R");
  pmf_cmd->add_option("--points", points, "Number of circle points M (>= 4R)");
  pmf_cmd->add_option("--out", out_path, "CSV of (r, p_r)");
  pmf_cmd->callback([&] {
    action = [&] {
      const auto cfg = config_or_default(model_path);
      const auto base = base_of(model_path);
      const PgfEvaluator ev(mutant_model(cfg, base), numerics(cfg, g.threads));
      if (!(m_value > 0.0)) throw std::invalid_argument("--m must be positive");
      const std::size_t r = rmax ? rmax : cfg.rmax.value_or(default_pmf_rmax(ev.model().n1(), m_value));
      const auto pmf = ldd_pmf(ev, m_value, r, points ? points : cfg.points.value_or(0));
      json j{{"m", pmf.m},
             {"rmax", r},
             {"captured_mass", pmf.captured_mass},
             {"inversion_radius", pmf.inversion_radius},
             {"clamped", pmf.clamped},
             {"aliasing_alarm", pmf.aliasing_alarm},
             {"p0", pmf.probs[0]},
             {"model", model_json(ev.model())},
             {"neutrality", neutrality_json(cfg, base)}};
      if (out_path.empty()) {
        j["probs"] = pmf.probs;
      } else {
        auto csv = open_output(out_path);
        csv.precision(17);
        csv << "r,p_r\n";
        for (std::size_t k = 0; k < pmf.probs.size(); ++k) csv << k << ',' << pmf.probs[k] << '\n';
      }
      write_json(out, j);
      return kOk;
    };
  });

  // gw-demo
  std::string law = "s^2";
  int n_first = 10, n_last = 24;
  auto* gw_cmd = app.add_subcommand("gw-demo", "Galton-Watson delta for s^mu or fractional-linear laws");
  gw_cmd->add_option("--f", law, "s^mu, fraclin(mu), or an offspring list");
  gw_cmd->add_option("--n-first", n_first, "First n of s = 1 - c 2^-n");
  gw_cmd->add_option("--n-last", n_last, "Last n");
  gw_cmd->add_option("--out", out_path, "CSV of (s, delta, one_minus_s)");
  gw_cmd->callback([&] {
    action = [&] {
      const auto spec = lower(trim(law));
      std::optional<GwSeries> series;
      if (spec.rfind("s^", 0) == 0) {
        series = GwSeries::power(static_cast<int>(parse_uint(spec.substr(2), "power")));
      } else if (spec.rfind("fraclin", 0) == 0 || spec.rfind("fractional_linear", 0) == 0) {
        const auto [name, args] = split_call(spec);
        if (args.size() != 1) throw std::invalid_argument("fraclin needs one argument");
        series = GwSeries::fractional_linear(parse_double(args[0], "mean"));
      } else {
        series = GwSeries(parse_offspring(law));
      }
      if (n_first < 1 || n_last <= n_first || n_last > 50) throw std::invalid_argument("need 1 <= n-first < n-last <= 50");
      const auto gap = subsequence_gap(*series, n_first, n_last);
      const auto inc = cauchy_increments(*series, n_first, n_last);
      const auto period = oscillation_period(*series, 20.0, 40.0, 2001);
      if (!out_path.empty()) {
        auto csv = open_output(out_path);
        csv.precision(17);
        csv << "s,delta,one_minus_s\n";
        for (std::size_t i = 0; i < gap.n.size(); ++i) {
          for (double c : {1.0, 1.4}) {
            const double d = std::ldexp(c, -gap.n[i]);
            csv << 1.0 - d << ',' << (c == 1.0 ? gap.delta_a[i] : gap.delta_b[i]) << ',' << d << '\n';
          }
        }
      }
      json j{{"kappa", series->kappa()},
             {"terms", series->terms()},
             {"min_gap", gap.min_gap},
             {"final_gap", gap.gap.back()},
             {"increments_monotone", inc.monotone},
             {"final_increment", inc.increments.back()}};
      j["period"] = period.period ? json(*period.period) : json(nullptr);
      write_json(out, j);
      return kOk;
    };
  });

  // limit-check
  std::string m_list = "4,16,64,256";
  auto* lc_cmd = app.add_subcommand("limit-check", "KS distance to the stable limit along a list of m");
  lc_cmd->add_option("--model", model_path, "Model config file");
  lc_cmd->add_option("--m", m_list, "Comma-separated m values");
  lc_cmd->add_option("--out", out_path, "CSV of (m, KS, ...)");
  lc_cmd->callback([&] {
    action = [&] {
      const auto cfg = config_or_default(model_path);
      const PgfEvaluator ev(mutant_model(cfg, base_of(model_path)), numerics(cfg, g.threads));
      const auto ms = parse_list(m_list, "m");
      if (ms.empty()) throw std::invalid_argument("--m is empty");
      const auto report = limit_check(ev, ms);
      json rows = json::array();
      for (const auto& r : report.rows) {
        if (r.rmax_warning) err << "warning: R(m = " << r.m << ") = " << r.rmax << " exceeds 10^6 points\n";
        rows.push_back({{"m", r.m},
                        {"ks", r.ks},
                        {"ks_delta_minus", r.ks_delta_minus},
                        {"ks_delta_plus", r.ks_delta_plus},
                        {"ks_misscaled", r.ks_misscaled},
                        {"rmax", r.rmax},
                        {"captured_mass", r.captured_mass},
                        {"aliasing_alarm", r.aliasing_alarm}});
      }
      if (!out_path.empty()) {
        auto csv = open_output(out_path);
        csv.precision(17);
        csv << "m,KS,ks_delta_minus,ks_delta_plus,ks_misscaled,rmax,captured_mass\n";
        for (const auto& r : report.rows) {
          csv << r.m << ',' << r.ks << ',' << r.ks_delta_minus << ',' << r.ks_delta_plus << ',' << r.ks_misscaled
              << ',' << r.rmax << ',' << r.captured_mass << '\n';
        }
      }
      write_json(out, {{"n1", report.n1},
                       {"delta", report.delta},
                       {"delta_uncertainty", report.delta_uncertainty},
                       {"rows", rows}});
      return kOk;
    };
  });

  // simulate
  std::string config_path;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo fluctuation experiment");
  sim_cmd->add_option("--config", config_path, "Simulation config file")->required();
  sim_cmd->add_option("--out", out_path, "CSV of per-culture results");
  sim_cmd->callback([&] {
    action = [&] {
      const auto cfg = load_config(config_path);
      auto sc = sim_config(cfg, base_of(config_path));
      if (g.seed_given) sc.seed = g.seed;
      sc.threads = g.threads;
      const auto run = run_experiment(sc);
      auto emit = [&](std::ostream& csv) {
        csv.precision(17);
        csv << "culture_id,mutants,total_cells,births,stop_time,extinct\n";
        for (std::size_t i = 0; i < run.cultures.size(); ++i) {
          const auto& c = run.cultures[i];
          csv << i << ',' << c.mutant_cells << ',' << c.total_cells << ',' << c.births_total << ',' << c.stop_time
              << ',' << (c.extinct ? 1 : 0) << '\n';
        }
      };
      std::size_t extinct = 0;
      double mutants = 0.0;
      for (const auto& c : run.cultures) {
        extinct += c.extinct ? 1 : 0;
        mutants += static_cast<double>(c.mutant_cells);
      }
      json summary{{"cultures", run.cultures.size()},
                   {"seed", sc.seed},
                   {"m_hat", run.m_hat},
                   {"mean_mutants", mutants / static_cast<double>(run.cultures.size())},
                   {"extinct", extinct},
                   {"neutrality_residual", run.neutrality_residual},
                   {"neutral", run.neutrality_residual < kNeutralityTolerance}};
      if (out_path.empty()) {
        emit(out);
        err << summary.dump() << '\n';
      } else {
        auto csv = open_output(out_path);
        emit(csv);
        write_json(out, summary);
      }
      return kOk;
    };
  });

  // estimate
  std::string counts_path;
  std::optional<std::uint64_t> jackpot;
  std::optional<double> nfinal;
  std::size_t bootstrap = 0;
  auto* est_cmd = app.add_subcommand("estimate", "Fit A = n1 m (and rho) to mutant counts");
  est_cmd->add_option("--counts", counts_path, "Counts file")->required();
  est_cmd->add_option("--model", model_path, "Model config file");
  est_cmd->add_option("--jackpot", jackpot, "Lump counts above this value");
  est_cmd->add_option("--nfinal", nfinal, "Final population size");
  est_cmd->add_option("--bootstrap", bootstrap, "Bootstrap replicates for a percentile interval");
  est_cmd->callback([&] {
    action = [&] {
      auto data = load_counts(counts_path);
      if (nfinal) data.n_final = *nfinal;
      const auto cfg = config_or_default(model_path);
      const auto base = base_of(model_path);
      const PgfEvaluator ev(mutant_model(cfg, base), numerics(cfg, g.threads));
      MleOptions opts;
      opts.jackpot_cutoff = jackpot;
      opts.threads = resolve_threads(g.threads);
      const auto fit = mle_fit(data, ev, opts);
      const double n1 = ev.model().n1();
      const auto rho = rho_from_fit(fit, n1, data.n_final);
      json j{{"A_hat", fit.A_hat},
             {"m_hat", rho.m_hat},
             {"B_hat", fit.B_hat},
             {"loglik", fit.loglik},
             {"ci_A", {fit.ci_low, fit.ci_high}},
             {"jackpot_cutoff", fit.jackpot_cutoff},
             {"boundary", fit.boundary},
             {"tail_flag", fit.tail_flag},
             {"n1", n1},
             {"cultures", data.counts.size()},
             {"neutrality", neutrality_json(cfg, base)}};
      j["rho_hat"] = rho.rho_hat ? json(*rho.rho_hat) : json(nullptr);
      if (data.n_final && std::count(data.counts.begin(), data.counts.end(), 0) > 0) {
        const auto p0 = p0_estimate(data, *data.n_final);
        j["p0_method"] = {{"rho_hat", p0.rho_hat}, {"se", p0.se_rho}, {"p0_hat", p0.p0_hat}};
        if (p0.upper_bound) j["p0_method"]["upper_bound"] = *p0.upper_bound;
      }
      if (bootstrap > 0) {
        const LddFamily family(ev, static_cast<std::size_t>(std::max<std::uint64_t>(fit.jackpot_cutoff, 1)));
        opts.jackpot_cutoff = fit.jackpot_cutoff;
        opts.delta = fit.B_hat * n1;
        const auto bs = bootstrap_ci(data, family, opts, bootstrap, g.seed);
        j["bootstrap_A"] = {bs.low, bs.high};
      }
      write_json(out, j);
      return kOk;
    };
  });

  auto* self_cmd = app.add_subcommand("selftest", "Run the built-in oracle checks");
  self_cmd->callback([&] { action = [&] { return run_selftest(out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  try {
    return action();
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace fluctuate::cli

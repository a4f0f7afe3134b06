#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "fluctuate/error.hpp"

using namespace fluctuate;
using namespace fluctuate::cli;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "fluctuate");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "fluctuate_cli_test";
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("config parse and emit round trip") {
  const std::string text = R"cfg(# model
offspring = [0.1, 0.2, 0.7]
mutant.lifetime = "kendall(2,  1.5)"
nonmutant_lifetime = rahn(2, 3)
h = 0.005
rmax = 400
method = Volterra
)cfg";
  const auto c = parse_config(text);
  CHECK(c.mutant_offspring == "[0.1, 0.2, 0.7]");
  CHECK(c.nonmutant_offspring == c.mutant_offspring);
  CHECK(c.mutant_lifetime == "kendall(2, 1.5)");
  CHECK(c.nonmutant_lifetime == "rahn(2, 3)");
  CHECK(*c.h == 0.005);
  CHECK(*c.rmax == 400);
  CHECK(c.method == "volterra");
  const auto once = emit_config(c);
  CHECK(emit_config(parse_config(once)) == once);
  CHECK(emit_config(parse_config(emit_config(ModelConfig{}))) == emit_config(ModelConfig{}));

  CHECK_THROWS_AS(parse_config("colour = blue\n"), DataError);
  CHECK_THROWS_AS(parse_config("lifetime = weibull(2)\n"), DataError);
  CHECK_THROWS_AS(parse_config("just words\n"), DataError);
}

TEST_CASE("law specifications") {
  CHECK(parse_offspring("[0, 0, 1]").mean() == doctest::Approx(2.0));
  CHECK(parse_offspring("fractional_linear(3)").mean() == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(canonical_offspring("fraclin( 2.50 )") == "fractional_linear(2.5)");
  CHECK(canonical_lifetime("Exponential(2.0)") == "exponential(2)");
  CHECK(std::holds_alternative<Rahn>(parse_lifetime("rahn(1, 4)").variant()));
  CHECK_THROWS_AS(parse_lifetime("kendall(0, 1)"), DataError);
  CHECK_THROWS_AS(parse_lifetime("exponential(-1)"), DataError);
  CHECK(offspring_with_mean(2.25).mean() == doctest::Approx(2.25));

  const auto dir = scratch_dir();
  write_file(dir / "g.csv", "t,G\n0,0\n1,0.5\n2,1\n");
  const auto table = parse_lifetime("table(g.csv)", dir.string());
  CHECK(table.cdf(1.5) == doctest::Approx(0.75));
  CHECK_THROWS_AS(parse_lifetime("table(missing.csv)", dir.string()), DataError);
}

TEST_CASE("counts files") {
  std::istringstream plain("3\n0\n\n12\n");
  CHECK(read_counts(plain).counts == std::vector<std::uint64_t>{3, 0, 12});
  std::istringstream pairs("1,4\n2,0\n");
  CHECK(read_counts(pairs).counts == std::vector<std::uint64_t>{4, 0});
  std::istringstream header("culture_id,mutants,total_cells\n0,7,100\n1,2,100\n");
  CHECK(read_counts(header).counts == std::vector<std::uint64_t>{7, 2});
  std::istringstream bad("1\nx\n");
  CHECK_THROWS_AS(read_counts(bad), DataError);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(read_counts(empty), DataError);
}

TEST_CASE("beta and n1 commands") {
  const auto r = run({"beta", "--mu", "2", "--lifetime", "exponential(1)"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["beta"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j["n1"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));

  const auto k = json::parse(run({"n1", "--mu", "2", "--lifetime", "kendall(2,1)"}).out);
  CHECK(k["n1"].get<double>() == doctest::Approx(k["n1_closed_form"].get<double>()).epsilon(1e-10));
  CHECK(k["n1"].get<double>() >= k["n1_lower_bound"].get<double>());
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == kUsage);
  CHECK(run({"frobnicate"}).code == kUsage);
  CHECK(run({"beta", "--mu", "2", "--bogus"}).code == kUsage);
  CHECK(run({"beta", "--mu", "0.5"}).code == kUsage);
  const auto missing = run({"estimate", "--counts", "/nonexistent/counts.csv"});
  CHECK(missing.code == kData);
  CHECK(missing.err.find("/nonexistent/counts.csv") != std::string::npos);
  CHECK(run({"pmf", "--model", "/nonexistent/model.toml", "--m", "1"}).code == kData);
  CHECK(run({"--help"}).code == kOk);
}

TEST_CASE("pmf and pgf commands write CSV files") {
  const auto dir = scratch_dir();
  const auto pmf_csv = (dir / "pmf.csv").string();
  const auto r = run({"pmf", "--m", "1", "--rmax", "200", "--out", pmf_csv});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["p0"].get<double>() == doctest::Approx(std::exp(-1.0)));
  CHECK(j["neutrality"]["neutral"].get<bool>());
  std::ifstream in(pmf_csv);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "r,p_r");
  CHECK(first.rfind("0,0.367879", 0) == 0);

  const auto pgf_csv = (dir / "pgf.csv").string();
  const auto g = run({"pgf", "--s-points", "0.5", "--h", "0.01", "--horizon", "5", "--stride", "100", "--out", pgf_csv});
  REQUIRE(g.code == 0);
  const auto gj = json::parse(g.out);
  const double exact = 1.0 + std::log(0.5);
  CHECK(gj["points"][0]["g"].get<double>() == doctest::Approx(exact).epsilon(1e-4));
}

TEST_CASE("simulate is reproducible and honours --seed") {
  const auto dir = scratch_dir();
  write_file(dir / "sim.toml", "rho = 1e-3\nmax_cells = 500\ncultures = 20\n");
  const auto cfg = (dir / "sim.toml").string();
  const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string(), c = (dir / "c.csv").string();
  REQUIRE(run({"--threads", "1", "simulate", "--config", cfg, "--out", a}).code == 0);
  REQUIRE(run({"--threads", "3", "simulate", "--config", cfg, "--out", b}).code == 0);
  REQUIRE(run({"--seed", "7", "simulate", "--config", cfg, "--out", c}).code == 0);
  auto slurp = [](const std::string& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));
  CHECK(slurp(a).rfind("culture_id,mutants,total_cells,births,stop_time,extinct\n", 0) == 0);

  const auto est = run({"estimate", "--counts", a, "--nfinal", "500"});
  REQUIRE(est.code == 0);
  const auto j = json::parse(est.out);
  CHECK(j["A_hat"].get<double>() > 0.0);
  CHECK(j["rho_hat"].get<double>() == doctest::Approx(j["m_hat"].get<double>() / 500.0));
}

TEST_CASE("gw-demo and selftest") {
  const auto r = run({"gw-demo", "--f", "fraclin(2)", "--n-first", "10", "--n-last", "20"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["increments_monotone"].get<bool>());
  const auto s = run({"selftest"});
  CHECK(s.code == 0);
  CHECK(json::parse(s.out)["pass"].get<bool>());
}

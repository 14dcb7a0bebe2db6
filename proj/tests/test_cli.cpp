#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "zetalab/experiments.hpp"

using namespace zetalab;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string &name) {
  const auto p = fs::temp_directory_path() / ("zetalab_test_" + name);
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string &args) {
  const std::string cmd = std::string(ZETALAB_CLI) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST_CASE("Paley-Zygmund examples") {
  CHECK(paley_zygmund_bound(1, 4, 0.5) == Approx(1.0 / 16));
  CHECK(paley_zygmund_bound(3, 9, 0.25) == Approx(0.5625));
  CHECK(paley_zygmund_bound(1, 2, 1 - 1e-9) < 1e-17);
  CHECK_THROWS_AS(paley_zygmund_bound(1, 2, 1), domain_error);
  CHECK_THROWS_AS(paley_zygmund_bound(1, 0.5, 0.5), domain_error);
}

TEST_CASE("conditional moments and the PZ factor") {
  const std::vector<double> Z(50, 2.0);
  const auto m = conditional_moments(Z);
  CHECK(m.m1 == 2);
  CHECK(m.m4 == 16);
  const auto f = pz_factor(m, 0.5); // delta = 1/4
  CHECK(f.value == Approx(0.5625));
  CHECK(f.stderr == Approx(0).margin(1e-12));
  CHECK(pz_factor(m, 3.0).value == 0);
}

TEST_CASE("config parsing") {
  ExperimentConfig c;
  c.set("k-max", "5");
  c.set("samples", "1e6");
  c.set("n", "-100, 1.0 1.6,2.1");
  CHECK(c.has("k_max"));
  CHECK(c.integer("k_max", 0) == 5);
  CHECK(c.count("samples", 0) == 1'000'000);
  CHECK(c.list("n", {}) == std::vector<double>{-100, 1.0, 1.6, 2.1});
  CHECK(c.real("missing", 2.5) == 2.5);
  c.set("bad", "1.5x");
  CHECK_THROWS_AS(c.real("bad", 0), validation_error);
  c.set("frac", "2.5");
  CHECK_THROWS_AS(c.count("frac", 0), validation_error);

  const auto p = scratch("cfg");
  fs::create_directories(p);
  std::ofstream(p / "a.cfg") << "# comment\nT = 1e5\n\nseed=4 # trailing\n";
  ExperimentConfig d;
  d.load_file((p / "a.cfg").string());
  CHECK(d.real("T", 0) == 1e5);
  CHECK(d.count("seed", 0) == 4);
  std::ofstream(p / "b.cfg") << "no equals sign\n";
  CHECK_THROWS_AS(d.load_file((p / "b.cfg").string()), validation_error);
}

TEST_CASE("report exit codes") {
  Report r;
  r.check("a", 1.0, "", nullptr, true);
  CHECK(r.exit_code() == 0);
  r.check("b", 1.0, "", nullptr, false).inconclusive = true;
  CHECK(r.exit_code() == 3);
  r.check("c", 1.0, "", nullptr, false);
  CHECK(r.exit_code() == 1);
  const auto j = r.to_json();
  CHECK(j["pass"] == false);
  CHECK(j["checks"].size() == 3);
  CHECK(num(INFINITY) == "inf");
  CHECK(num(NAN) == "nan");
}

TEST_CASE("unknown experiment") {
  ExperimentConfig c;
  c.experiment = "nope";
  CHECK_THROWS_AS(run_experiment(c, scratch("nope").string()), validation_error);
  CHECK(experiment_names().size() >= 9);
}

TEST_CASE("reports are byte-identical for a repeated seed") {
  ExperimentConfig c;
  c.experiment = "barrier";
  c.set("samples", "4096");
  c.set("perturbations", "200");
  c.set("seed", "7");
  const auto a = scratch("det_a"), b = scratch("det_b");
  run_experiment(c, a.string());
  set_worker_count(2);
  run_experiment(c, b.string());
  set_worker_count(0);
  const auto ra = slurp(a / "report.json");
  CHECK_FALSE(ra.empty());
  CHECK(ra == slurp(b / "report.json"));
  CHECK(nlohmann::json::parse(ra)["experiment"] == "barrier");
}

TEST_CASE("every report number carries a tag") {
  ExperimentConfig c;
  c.experiment = "indicator";
  const auto p = scratch("tags");
  const auto r = run_experiment(c, p.string());
  CHECK(r.exit_code() == 0);
  const auto j = nlohmann::json::parse(slurp(p / "report.json"));
  for (const auto &chk : j["checks"])
    CHECK(chk["estimate"].contains("tag"));
  for (const auto &k : j["constants"])
    CHECK((k["value"].is_string() || k["value"].contains("tag")));
  for (const auto &a : j["artifacts"])
    CHECK(fs::exists(p / a.get<std::string>()));
}

TEST_CASE("command line exit status") {
  CHECK(run_cli("indicator --out " + scratch("cli_ok").string()) == 0);
  CHECK(run_cli("no-such-experiment --out " + scratch("cli_bad").string()) == 2);
  CHECK(run_cli("levelset --T banana --out " + scratch("cli_nan").string()) == 2);
  CHECK(run_cli("levelset --samples 10 --out " + scratch("cli_small").string()) == 2);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("pipeline --V -inf --out " + scratch("cli_vinf").string()) == 2);
  CHECK(run_cli("pipeline --samples 20000 --t-samples 20000 --direct-samples 2000 --out " +
                scratch("cli_inc").string()) == 3);
  CHECK(run_cli("sepcheck --polys 20 --mvt-polys 5 --twist-samples 2000 --out " + scratch("cli_fail").string()) == 1);
}

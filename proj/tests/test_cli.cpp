#include "doctest.h"

#include "bmt/config.hpp"
#include "bmt/csv.hpp"
#include "bmt/experiments.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bmt;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(-2.5e-300) == "-2.5e-300");
  CHECK(format_number(1.0 / 3.0) == "0.33333333333333331");
  CHECK(format_number(std::nan("")) == "nan");
  CsvTable t({"a", "b"});
  t.add(1, std::string("x,y"));
  CHECK(t.str() == "a,b\n1,\"x,y\"\n");
  CHECK_THROWS_AS(t.add(1), InvalidInput);
}

TEST_CASE("config parsing") {
  const auto c = Config::parse(
      "# comment\nexperiment = stein\nmeasure.kind = truncated_gaussian  # trailing\nmeasure.sigma=2.0\n\n"
      "eps_list = 0.01, 0.001\n");
  CHECK(c.raw("measure.sigma") == "2.0");
  const auto e = ExperimentConfig::from(c);
  CHECK(e.experiment == "stein");
  CHECK(e.measure.sigma == 2.0);
  CHECK(e.eps_list == std::vector<double>{0.01, 0.001});
  CHECK(e.n_paths == 1000);
}

TEST_CASE("config errors carry line and key") {
  try {
    Config::parse("experiment = simulate\nbogus = 1\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
    CHECK(e.key() == "bogus");
  }
  try {
    Config::parse("experiment = simulate\n\ngrid.rho = 1.5\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
    CHECK(e.key() == "grid.rho");
  }
  CHECK_THROWS_AS(Config::parse("experiment = simulate\nexperiment = stein\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("experiment simulate\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("experiment = nope\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("experiment = counterexample\neps_list = 0.001, 0.01\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from(Config::parse("n_paths = 3\n")), ConfigError);
}

TEST_CASE("config round trip") {
  const auto c = Config::parse("experiment = wiener_ot\nmeasure.var = 0.3\nclt.n = 4,9\nseed = 77\n");
  CHECK(Config::parse(c.serialize()) == c);
  ExperimentConfig e = ExperimentConfig::from(c);
  e.measure.mean = 0.1;
  e.tube_delta = 1.0 / 3.0;
  const Config full = e.to_config();
  CHECK(Config::parse(full.serialize()) == full);
  CHECK(ExperimentConfig::from(Config::parse(full.serialize())) == e);
}

TEST_CASE("experiment catalog") {
  const auto& cat = experiment_catalog();
  REQUIRE(cat.size() == 8);
  const char* names[] = {"simulate", "contraction", "localization", "inequalities",
                         "stein", "counterexample", "wiener_ot", "entropy"};
  for (int i = 0; i < 8; ++i) {
    CHECK(cat[i].name == names[i]);
    CHECK_FALSE(cat[i].exercises.empty());
  }
}

TEST_CASE("contraction run on the standard gaussian") {
  ExperimentConfig e;
  e.experiment = "contraction";
  e.n_paths = 50;
  const fs::path out = fs::temp_directory_path() / "bmt_test_contraction";
  fs::remove_all(out);
  CHECK(run_and_write(e, out) == 0);
  CHECK(fs::exists(out / "summary.json"));
  CHECK(fs::exists(out / "run.log"));
  CHECK(slurp(out / "malliavin_norms.csv").rfind("path_id,t,malliavin_norm\n", 0) == 0);
}

TEST_CASE("exit codes") {
  ExperimentConfig bad;
  bad.experiment = "stein";
  bad.measure.dim = 2;
  const fs::path out = fs::temp_directory_path() / "bmt_test_error";
  CHECK(run_and_write(bad, out) == 1);
  ExperimentConfig fails;
  fails.experiment = "simulate";
  fails.n_paths = 30;
  fails.ks_threshold = 1e-6;
  CHECK(run_and_write(fails, fs::temp_directory_path() / "bmt_test_fail") == 2);
}

TEST_CASE("cli binary") {
  const fs::path dir = fs::temp_directory_path() / "bmt_test_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "a.cfg") << "experiment = wiener_ot\nmeasure.kind = truncated_gaussian\not.pairs = 300\n";
  const std::string bin = BMT_CLI_PATH;
  const std::string cmd = bin + " run --config " + (dir / "a.cfg").string() + " --seed 4 --out " + (dir / "o1").string() +
                          " > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(slurp(dir / "o1" / "summary.json").find("\"seed\": 4") != std::string::npos);
  std::ofstream(dir / "b.cfg") << "experiment = wiener_ot\nmeasure.sigma = 0.2\n";
  CHECK(std::system((bin + " run --config " + (dir / "b.cfg").string() + " 2> /dev/null").c_str()) != 0);
  CHECK(std::system((bin + " list > " + (dir / "list.txt").string()).c_str()) == 0);
  CHECK(slurp(dir / "list.txt").find("counterexample") != std::string::npos);
}

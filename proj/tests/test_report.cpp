#include "hypolab/cli.hpp"
#include "hypolab/report.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hypolab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("hypolab_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("CSV fields are escaped per RFC 4180") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
  }

  TEST_CASE("numbers round-trip through their text form") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, kPi, 0.62387, 5e-324}) CHECK(std::strtod(format_number(x).c_str(), nullptr) == x);
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-INFINITY) == "-inf");
  }

  TEST_CASE("CSV tables carry the metadata line and CRLF endings") {
    CsvTable t({"m", "label"});
    t.add({"0.5", "x,y"});
    CHECK_THROWS_AS(t.add({"1"}), ConfigError);
    ArtifactMeta meta = ArtifactMeta::for_spec("density", make_preset(PresetName::gradient_drift), 40, 16, 7);
    const std::string text = t.render(meta);
    CHECK(text.rfind("# {\"tool\":\"hypolab\"", 0) == 0);
    CHECK(text.find("m,label\r\n0.5,\"x,y\"\r\n") != std::string::npos);
    CHECK(meta.config_hash.size() == 16);
    CHECK(meta.config_hash != config_hash(make_preset(PresetName::constant_coeff)));
  }

  TEST_CASE("reruns write byte-identical artifacts") {
    const auto a = scratch("rerun_a"), b = scratch("rerun_b");
    for (const auto& dir : {a, b}) {
      ExperimentPlan p;
      p.command = "homogenize";
      p.preset = "gradient_drift";
      p.hermite_N = 24;
      p.fourier_K = 12;
      p.out = dir.string();
      run_plan(p);
    }
    for (const char* f : {"homogenize.json", "homogenize.csv"}) {
      const std::string x = slurp(a / f);
      CHECK(!x.empty());
      CHECK(x == slurp(b / f));
    }
    CHECK(std::filesystem::exists(a / "homogenize.run.json"));
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
  }

  TEST_CASE("simulation artifacts are reproducible from the seed") {
    ExperimentPlan p;
    p.command = "simulate";
    p.preset = "gradient_drift";
    p.paths = 64;
    p.T = 0.2;
    p.write = false;
    const Json x = run_plan(p), y = run_plan(p);
    CHECK(x.dump() == y.dump());
    p.seed = 8;
    CHECK(run_plan(p).dump() != x.dump());
  }

  TEST_CASE("command-line errors give a nonzero status") {
    std::vector<std::string> args{"hypolab", "frobnicate"};
    std::vector<char*> argv;
    for (auto& s : args) argv.push_back(s.data());
    CHECK(run_cli(int(argv.size()), argv.data()) != 0);

    ExperimentPlan p;
    p.command = "frobnicate";
    p.write = false;
    CHECK_THROWS_AS(run_plan(p), ConfigError);
    p.command = "density";
    p.m_list = {0.1, -0.1};
    CHECK_THROWS_AS(run_plan(p), ParameterError);
  }

  TEST_CASE("an unknown preset is a configuration error") {
    ExperimentPlan p;
    p.command = "check";
    p.preset = "no_such_preset";
    p.write = false;
    CHECK_THROWS_AS(run_plan(p), ConfigError);
  }
}

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "recursep/cli.hpp"
#include "recursep/csv_io.hpp"
#include "recursep/discretize.hpp"
#include "recursep/errors.hpp"
#include "recursep/simulate.hpp"

using namespace recursep;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("recursep_test_" + std::to_string(std::rand()) +
            std::to_string(reinterpret_cast<std::uintptr_t>(this) % 100000));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("csv round-trip reproduces a simulated dataset") {
  DiscreteDGPConfig config;
  config.intervals = 25;
  config.subjects = 60;
  config.beta_d_0 = 0.04;
  config.beta_d_a = -0.01;
  config.beta_y_d = 0.01;
  config.seed = 8;
  const Dataset data = generate_discrete(config);

  TempDir dir;
  const std::string path = dir.file("data.csv");
  export_csv(data, path);
  GridSpec spec;
  spec.explicit_grid = data.grid();
  const Dataset again = ingest_csv(path, spec);
  CHECK(again == data);
}

TEST_CASE("csv round-trip keeps mid-grid censoring") {
  const TimeGrid grid = TimeGrid::uniform(6, 6.0);
  std::vector<SubjectHistory> subjects;
  SubjectHistory a;
  a.id = "a";
  a.arm = 1;
  a.event_counts = {1, 0, 2, 0, 0, 0};
  a.censor_interval = 5;
  subjects.push_back(a);
  SubjectHistory b;
  b.id = "b";
  b.arm = 0;
  b.event_counts = {0, 1, 0, 0, 0, 0};
  b.death_interval = 4;
  subjects.push_back(b);
  const Dataset data(grid, subjects);

  TempDir dir;
  const std::string path = dir.file("cens.csv");
  export_csv(data, path);
  GridSpec spec;
  spec.explicit_grid = grid;
  CHECK(ingest_csv(path, spec) == data);
}

TEST_CASE("csv ingestion reports schema violations with line numbers") {
  TempDir dir;
  {
    const std::string path = dir.file("badtype.csv");
    write_file(path,
               "id,arm,type,time\n"
               "a,1,event,0.5\n"
               "a,1,eventt,0.7\n");
    try {
      ingest_csv(path);
      FAIL("expected a schema error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  {
    const std::string path = dir.file("badarm.csv");
    write_file(path, "id,arm,type,time\na,2,censor,1.0\n");
    CHECK_THROWS_WITH_AS(ingest_csv(path), doctest::Contains("line 2"),
                         DataError);
  }
  {
    const std::string path = dir.file("badtime.csv");
    write_file(path, "id,arm,type,time\na,1,censor,abc\n");
    CHECK_THROWS_WITH_AS(ingest_csv(path), doctest::Contains("line 2"),
                         DataError);
  }
  {
    const std::string path = dir.file("badheader.csv");
    write_file(path, "id,arm,kind,time\na,1,censor,1.0\n");
    CHECK_THROWS_AS(ingest_csv(path), DataError);
  }
  {
    const std::string path = dir.file("noexit.csv");
    write_file(path, "id,arm,type,time\na,1,event,0.5\n");
    CHECK_THROWS_WITH_AS(ingest_csv(path), doctest::Contains("a"), DataError);
  }
  {
    const std::string path = dir.file("afterdeath.csv");
    write_file(path,
               "id,arm,type,time\n"
               "a,1,death,1.0\n"
               "a,1,event,1.5\n"
               "b,0,censor,2.0\n");
    CHECK_THROWS_WITH_AS(ingest_csv(path), doctest::Contains("a"), DataError);
  }
}

TEST_CASE("csv ingestion handles subjects without events") {
  TempDir dir;
  const std::string path = dir.file("empty.csv");
  write_file(path,
             "id,arm,type,time\n"
             "a,1,censor,4.0\n"
             "b,0,censor,4.0\n");
  GridSpec spec;
  spec.default_intervals = 8;
  const Dataset data = ingest_csv(path, spec);
  CHECK(data.size() == 2);
  CHECK(data.intervals() == 8);
  for (const SubjectHistory& s : data.subjects()) CHECK(s.total_events() == 0);
}

TEST_CASE("cli exits with code 2 on input errors") {
  CHECK(run_cli({"--mode", "test", "--input", "/nonexistent/file.csv"}) == 2);
  CHECK(run_cli({"--mode", "bogus"}) == 2);
  CHECK(run_cli({"--made-up-flag"}) == 2);
}

TEST_CASE("cli test mode writes results and a manifest") {
  TempDir dir;
  ContinuousDGPConfig dgp;
  dgp.subjects = 150;
  dgp.rate_ratio = 0.8;
  dgp.hazard_ratio = 0.7;
  dgp.seed = 3;
  const Dataset data = discretize(generate_continuous(dgp),
                                  TimeGrid::uniform(20, 5.0),
                                  DeathIntervalEvents::drop);
  const std::string input = dir.file("trial.csv");
  export_csv(data, input);

  const int code = run_cli({"--mode", "test", "--input", input, "--grid-k",
                            "20", "--horizons", "2.5,5", "--method",
                            "PR-MSMaT,WA,GL", "--link", "identity", "--bins",
                            "2", "--bootstrap-b", "40", "--out",
                            dir.file("out")});
  CHECK(code == 0);
  CHECK(fs::exists(dir.file("out/manifest.json")));
  const std::string manifest = read_file(dir.file("out/manifest.json"));
  const auto parsed = nlohmann::json::parse(manifest);
  CHECK(parsed["outputs"].size() == 6);  // 3 methods x 2 horizons
  const auto result =
      nlohmann::json::parse(read_file(dir.file("out/test_PR-MSMaT_tau5.json")));
  CHECK(result["method"] == "PR-MSMaT");
  CHECK(result["a_d"] == 0);
  CHECK(result["p_two"].get<double>() >= 0.0);
  CHECK(result["p_two"].get<double>() <= 1.0);
}

TEST_CASE("cli estimate mode emits curve files") {
  TempDir dir;
  DiscreteDGPConfig config;
  config.intervals = 30;
  config.subjects = 80;
  config.beta_d_0 = 0.03;
  config.beta_d_a = -0.01;
  config.beta_y_d = 0.01;
  config.seed = 12;
  const Dataset data = generate_discrete(config);
  const std::string input = dir.file("sim.csv");
  export_csv(data, input);

  const int code = run_cli({"--mode", "estimate", "--input", input,
                            "--grid-k", "30", "--link", "identity", "--bins",
                            "2", "--out", dir.file("est")});
  CHECK(code == 0);
  for (const std::string name :
       {"km_arm0", "km_arm1", "gl_arm0", "gl_arm1", "wa_arm0", "wa_arm1",
        "cf_ay0_ad0", "cf_ay1_ad0"}) {
    CHECK(fs::exists(dir.file("est/" + name + ".csv")));
  }
  const std::string km = read_file(dir.file("est/km_arm0.csv"));
  CHECK(km.rfind("time,value\n", 0) == 0);
}

TEST_CASE("cli simulate mode is byte-identical across parallelism") {
  TempDir dir;
  const std::string config_path = dir.file("campaign.json");
  write_file(config_path, R"({
    "seed": 7, "replications": 10,
    "methods": ["PR-MSMaT", "WA"],
    "scenarios": [
      {"name": "toy",
       "dgp": {"type": "discrete", "intervals": 40, "subjects": 100,
               "pattern": "constant", "beta_y_a": 0.0,
               "beta_d_0": 0.05, "beta_d_a": -0.0125, "beta_y_d": 0.0125},
       "analysis": {"link": "identity", "bins": 2}}
    ]
  })");

  setenv("RECURSEP_THREADS", "1", 1);
  CHECK(run_cli({"--mode", "simulate", "--config", config_path, "--out",
                 dir.file("run1")}) == 0);
  setenv("RECURSEP_THREADS", "2", 1);
  CHECK(run_cli({"--mode", "simulate", "--config", config_path, "--out",
                 dir.file("run2")}) == 0);
  unsetenv("RECURSEP_THREADS");

  CHECK(read_file(dir.file("run1/results.csv")) ==
        read_file(dir.file("run2/results.csv")));
  CHECK(read_file(dir.file("run1/curves_toy_arm0.csv")) ==
        read_file(dir.file("run2/curves_toy_arm0.csv")));
  CHECK(read_file(dir.file("run1/summary.json")) ==
        read_file(dir.file("run2/summary.json")));

  // Same seed twice in the same environment: byte-identical as well.
  setenv("RECURSEP_THREADS", "2", 1);
  CHECK(run_cli({"--mode", "simulate", "--config", config_path, "--seed", "7",
                 "--out", dir.file("run3")}) == 0);
  unsetenv("RECURSEP_THREADS");
  CHECK(read_file(dir.file("run1/results.csv")) ==
        read_file(dir.file("run3/results.csv")));
}

TEST_CASE("cli config file fills unset flags and flags win") {
  TempDir dir;
  DiscreteDGPConfig config;
  config.intervals = 20;
  config.subjects = 60;
  config.beta_d_0 = 0.05;
  config.beta_d_a = -0.02;
  config.beta_y_d = 0.0;
  config.seed = 21;
  const Dataset data = generate_discrete(config);
  const std::string input = dir.file("in.csv");
  export_csv(data, input);

  const std::string cfg = dir.file("run.json");
  write_file(cfg, R"({"input": ")" + input + R"(", "grid_k": 20,
                      "methods": ["GL"], "link": "identity", "bins": 2,
                      "out": ")" + dir.file("cfg_out") + R"("})");
  CHECK(run_cli({"--mode", "test", "--config", cfg}) == 0);
  CHECK(fs::exists(dir.file("cfg_out/test_GL_tau20.json")));

  // A flag overrides the config file value.
  CHECK(run_cli({"--mode", "test", "--config", cfg, "--method", "WA"}) == 0);
  CHECK(fs::exists(dir.file("cfg_out/test_WA_tau20.json")));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "grpde/dataset.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* cli_path() {
  const char* p = std::getenv("GRPDE_CLI");
  REQUIRE_MESSAGE(p != nullptr, "GRPDE_CLI must point at the executable");
  return p;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "grpde_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the CLI, returns its exit status; stdout+stderr go to `log`.
int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + cli_path() + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json tiny_config() {
  return json::parse(R"({
    "equation": "poisson",
    "dim": 1,
    "n": 16,
    "seed": 4,
    "T": 12,
    "trace_instances": 2,
    "modes": [1, 3],
    "data": {
      "train": {"count": 24},
      "val": {"count": 8},
      "test": {"count": 6},
      "router_train": {"count": 4},
      "router_val": {"count": 2}
    },
    "deeponet": {"branch_hidden": [8], "trunk_hidden": [8], "width": 4, "batch": 8, "epochs": 2},
    "router": {"encoder": 4, "hidden": 4, "layers": 1, "batch": 2, "epochs": 2, "horizon": 12},
    "ensemble": [{"kind": "jacobi", "omega": 0.67}, {"kind": "gauss_seidel"}, {"kind": "multigrid"}],
    "policy": {"kind": "greedy"},
    "compare": [
      {"name": "jacobi", "policy": {"kind": "single", "id": 1}},
      {"name": "greedy", "policy": {"kind": "greedy"}},
      {"name": "gs-only", "T": 5, "ensemble": [{"kind": "gauss_seidel"}], "policy": {"kind": "single", "id": 1}}
    ],
    "theory": {"n": 8, "bound_trials": 20, "max_k": 2, "max_T": 3, "spectral_trials": 10,
               "supermodular_T": 2, "loss_trials": 200}
  })");
}

fs::path write_config(const fs::path& dir, const json& j) {
  json c = j;
  c["output_dir"] = (dir / "out").string();
  const fs::path p = dir / "config.json";
  std::ofstream(p) << c.dump(2);
  return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("configuration errors exit with code 2") {
  const fs::path dir = scratch("config");
  CHECK(run("run --config \"" + (dir / "missing.json").string() + "\"", dir / "log1") == 2);
  CHECK(run("--bogus", dir / "log2") == 2);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(run("run --config \"" + (dir / "broken.json").string() + "\"", dir / "log3") == 2);

  json bad = tiny_config();
  bad["n"] = 2;
  CHECK(run("generate-data --config \"" + write_config(dir, bad).string() + "\"", dir / "log4") == 2);
  CHECK(slurp(dir / "log4").find("n") != std::string::npos);

  bad = tiny_config();
  bad["policy"] = json{{"kind", "single"}, {"id", 9}};
  CHECK(run("run --config \"" + write_config(dir, bad).string() + "\"", dir / "log5") == 2);
}

TEST_CASE("missing artifacts") {
  const fs::path dir = scratch("missing");
  json c = tiny_config();
  const fs::path cfg = write_config(dir, c);
  // No dataset yet.
  CHECK(run("compare --config \"" + cfg.string() + "\"", dir / "log1") == 1);
  CHECK(slurp(dir / "log1").find("generate-data") != std::string::npos);

  REQUIRE(run("generate-data --config \"" + cfg.string() + "\"", dir / "log2") == 0);
  c["ensemble"] = json::array({json{{"kind", "jacobi"}, {"omega", 0.67}}, json{{"kind", "deeponet"}}});
  const fs::path cfg2 = write_config(dir, c);
  CHECK(run("run --config \"" + cfg2.string() + "\"", dir / "log3") == 2);
  CHECK(slurp(dir / "log3").find("train-deeponet") != std::string::npos);
}

TEST_CASE("pipeline is reproducible and tables match per-instance data") {
  const fs::path a = scratch("a");
  const fs::path b = scratch("b");
  const fs::path ca = write_config(a, tiny_config());
  const fs::path cb = write_config(b, tiny_config());
  for (const fs::path& cfg : {ca, cb}) {
    const fs::path dir = cfg.parent_path();
    REQUIRE(run("generate-data --config \"" + cfg.string() + "\"", dir / "gen.log") == 0);
    REQUIRE(run("run --config \"" + cfg.string() + "\"", dir / "run.log") == 0);
    REQUIRE(run("compare --config \"" + cfg.string() + "\"", dir / "compare.log") == 0);
    REQUIRE(run("verify-theory --config \"" + cfg.string() + "\"", dir / "theory.log") == 0);
  }
  for (const char* f : {"train.grds", "val.grds", "test.grds", "router_train.grds", "router_val.grds", "run_metrics.csv",
                        "trace_0.csv", "trace_1.csv", "compare.csv", "compare_instances.csv", "theory_report.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / "out" / f));
    CHECK(slurp(a / "out" / f) == slurp(b / "out" / f));
  }
  CHECK(slurp(a / "compare.log") == slurp(b / "compare.log"));

  const grpde::Dataset test = grpde::load_dataset(a / "out" / "test.grds");
  CHECK(test.size() == 6);
  CHECK(test.grid == grpde::GridSpec{1, 16});

  const auto trace = read_csv(a / "out" / "trace_0.csv");
  CHECK(trace.size() == 1 + 13);
  CHECK_FALSE(fs::exists(a / "out" / "trace_2.csv"));

  const auto metrics = read_csv(a / "out" / "run_metrics.csv");
  REQUIRE(metrics.size() == 7);
  CHECK(metrics[0].back() == "mode_3");

  // Table means equal the mean over per-instance rows.
  const auto table = read_csv(a / "out" / "compare.csv");
  const auto inst = read_csv(a / "out" / "compare_instances.csv");
  REQUIRE(table.size() == 4);
  std::map<std::string, std::pair<double, double>> sums;
  std::map<std::string, int> counts;
  for (std::size_t r = 1; r < inst.size(); ++r) {
    sums[inst[r][0]].first += std::stod(inst[r][2]);
    sums[inst[r][0]].second += std::stod(inst[r][3]);
    ++counts[inst[r][0]];
  }
  for (std::size_t r = 1; r < table.size(); ++r) {
    const std::string& name = table[r][0];
    CAPTURE(name);
    CHECK(counts[name] == 6);
    CHECK(std::stod(table[r][2]) == doctest::Approx(sums[name].first / 6).epsilon(1e-5));
    CHECK(std::stod(table[r][4]) == doctest::Approx(sums[name].second / 6).epsilon(1e-5));
  }
  CHECK(table[3][1] == "5");
  // Greedy is never worse than the single Jacobi route on the final error.
  CHECK(std::stod(table[2][2]) <= std::stod(table[1][2]));

  const json report = json::parse(slurp(a / "out" / "theory_report.json"));
  std::vector<std::string> names;
  for (const json& chk : report.at("checks")) {
    names.push_back(chk.at("name"));
    CHECK(chk.at("trials").get<long long>() > 0);
    CHECK(chk.at("violations").get<long long>() == 0);
  }
  CHECK(names == std::vector<std::string>{"greedy_bound", "spectral_identity", "sequence_supermodularity",
                                          "weak_supermodularity_alpha1", "surrogate_upper_bound",
                                          "routing_loss_identity"});
}

TEST_CASE("seed and output overrides") {
  const fs::path dir = scratch("seed");
  const fs::path cfg = write_config(dir, tiny_config());
  REQUIRE(run("generate-data --config \"" + cfg.string() + "\" --out \"" + (dir / "s4").string() + "\"", dir / "l1") == 0);
  REQUIRE(run("generate-data --config \"" + cfg.string() + "\" --seed 5 --out \"" + (dir / "s5").string() + "\"",
              dir / "l2") == 0);
  CHECK(fs::exists(dir / "s4" / "test.grds"));
  CHECK_FALSE(fs::exists(dir / "out" / "test.grds"));
  CHECK(slurp(dir / "s4" / "test.grds") != slurp(dir / "s5" / "test.grds"));
}

TEST_CASE("training commands write checkpoints and logs") {
  const fs::path dir = scratch("train");
  json c = tiny_config();
  c["ensemble"] = json::array({json{{"kind", "jacobi"}, {"omega", 0.67}}, json{{"kind", "deeponet"}}});
  c["policy"] = json{{"kind", "hints"}, {"neural_id", 2}, {"classical_id", 1}, {"tau", 4}};
  const fs::path cfg = write_config(dir, c);
  REQUIRE(run("generate-data --config \"" + cfg.string() + "\"", dir / "gen.log") == 0);
  REQUIRE(run("train-deeponet --config \"" + cfg.string() + "\"", dir / "don.log") == 0);
  CHECK(fs::exists(dir / "out" / "deeponet.grck"));
  CHECK(read_csv(dir / "out" / "deeponet_log.csv").size() == 3);
  REQUIRE(run("train-router --config \"" + cfg.string() + "\"", dir / "router.log") == 0);
  CHECK(fs::exists(dir / "out" / "router.grck"));
  CHECK(read_csv(dir / "out" / "router_log.csv").size() == 3);
  CHECK(run("run --config \"" + cfg.string() + "\"", dir / "run.log") == 0);

  c["policy"] = json{{"kind", "learned"}};
  const fs::path cfg2 = write_config(dir, c);
  CHECK(run("run --config \"" + cfg2.string() + "\"", dir / "learned.log") == 0);
}

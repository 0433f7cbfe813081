#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "scrapnet/csv.hpp"
#include "scrapnet/pipeline.hpp"

using namespace scrapnet;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixtures = SCRAPNET_FIXTURES;

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("scrapnet_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

// Full fixture config scaled down so that the suite stays quick.
json small_config(const fs::path& out) {
  return json{{"inputs", {{"trade", "trade.csv"}, {"registry", "registry.csv"}, {"capacity", "capacity.csv"}}},
              {"topics", {{"grid", {1, 2, 3}}, {"iterations", 20}}},
              {"extrapolation", {{"coefficient_draws", 500}, {"iterations", 50}}},
              {"seed", 7},
              {"output_dir", out.string()}};
}

PipelineConfig config_from(const json& j) { return parse_config(j.dump(), kFixtures); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string status_of(const RunReport& r, const std::string& stage) {
  for (const auto& [name, st] : r.stages) {
    if (name == stage) return st;
  }
  return "";
}

std::set<std::string> files_under(const fs::path& root) {
  std::set<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.insert(fs::relative(e.path(), root).generic_string());
  }
  return out;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(SCRAPNET_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("config parsing resolves paths and rejects unknown keys") {
    const auto c = config_from(small_config("o"));
    CHECK(c.inputs.trade.value() == kFixtures / "trade.csv");
    CHECK(c.output_dir == kFixtures / "o");
    CHECK(c.topic_grid == std::vector<int>{1, 2, 3});
    CHECK(c.seed == 7);
    CHECK(c.commodity_prefix == "7204");
    CHECK(c.mc_iterations == 50);

    auto bad = small_config("o");
    bad["extrapolation"]["betta"] = 3;
    CHECK_THROWS_AS(config_from(bad), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json", kFixtures), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seed": "x"})", kFixtures), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"output_formats": ["xml"]})", kFixtures), ConfigError);
    CHECK_THROWS_AS(load_config(kFixtures / "missing.json"), ConfigError);
  }

  TEST_CASE("built-in defaults") {
    const PipelineConfig c;
    CHECK(c.commodity_prefix == "7204");
    CHECK(c.windows == TimeWindow::defaults());
    CHECK(c.mc_iterations == 1000);
    CHECK(c.holdout_fraction == 0.1);
    CHECK(c.beta_firms == 79.0);
    CHECK(c.beta_sd == 11.0);
    CHECK(c.backbone.alpha == 0.05);
  }

  TEST_CASE("validation") {
    auto j = small_config("o");
    j["inputs"]["trade"] = "nope.csv";
    CHECK_THROWS_AS(validate(config_from(j)), ConfigError);
    j = small_config("o");
    j["backbone"] = {{"alpha", 1.5}};
    CHECK_THROWS_AS(validate(config_from(j)), ConfigError);
    j = small_config("o");
    j["topics"]["grid"] = json::array();
    CHECK_THROWS_AS(validate(config_from(j)), ConfigError);
  }

  TEST_CASE("stage dependencies") {
    CHECK(stages_for(Stage::Ingest) == std::vector<Stage>{Stage::Ingest});
    CHECK(stages_for(Stage::Topics) == std::vector<Stage>{Stage::Firms, Stage::Topics});
    CHECK(stages_for(Stage::Extrapolate).back() == Stage::Extrapolate);
    CHECK(all_stages().size() == 6);
  }

  TEST_CASE("missing input fails before anything is written") {
    TempDir tmp("missing");
    auto j = small_config(tmp.path / "out");
    j["inputs"]["registry"] = "absent.csv";
    CHECK_THROWS_AS(run(config_from(j), all_stages()), ConfigError);
    CHECK_FALSE(fs::exists(tmp.path / "out"));
  }

  TEST_CASE("trade-only config runs networks and marks firm stages not run") {
    TempDir tmp("gating");
    json j{{"inputs", {{"trade", "trade.csv"}}}, {"output_dir", (tmp.path / "out").string()}};
    const auto r = run(config_from(j), all_stages());
    CHECK(r.ok());
    CHECK(status_of(r, "ingest") == "ok");
    CHECK(status_of(r, "backbone") == "ok");
    CHECK(status_of(r, "firms") == "not run");
    CHECK(status_of(r, "topics") == "not run");
    CHECK(status_of(r, "regress") == "not run");
    CHECK(status_of(r, "extrapolate") == "not run");
    CHECK(fs::exists(tmp.path / "out/trade/network_2017-2021.csv"));
    CHECK(fs::exists(tmp.path / "out/backbone/backbone_2017-2021.dot"));
    CHECK_FALSE(fs::exists(tmp.path / "out/firms"));
  }

  TEST_CASE("full run: manifest covers every file and is reproducible") {
    TempDir tmp("full");
    const auto cfg1 = config_from(small_config(tmp.path / "a"));
    const auto cfg2 = config_from(small_config(tmp.path / "b"));
    const auto r1 = run(cfg1, all_stages());
    const auto r2 = run(cfg2, all_stages());
    REQUIRE(r1.ok());
    for (const auto& [stage, st] : r1.stages) CHECK(st == "ok");

    const auto m1 = slurp(tmp.path / "a/manifest.json"), m2 = slurp(tmp.path / "b/manifest.json");
    CHECK(m1 == m2);
    CHECK(sha256_hex(m1) == sha256_hex(m2));

    const auto manifest = json::parse(m1);
    CHECK(manifest["seed"] == 7);
    std::set<std::string> listed;
    for (const auto& a : manifest["artifacts"]) {
      const std::string p = a["path"];
      listed.insert(p);
      CHECK(sha256_file(tmp.path / "a" / p) == a["sha256"]);
      CHECK(fs::file_size(tmp.path / "a" / p) == a["bytes"].get<std::uintmax_t>());
    }
    auto on_disk = files_under(tmp.path / "a");
    on_disk.erase("manifest.json");
    CHECK(listed == on_disk);

    // Conservation on every produced network.
    for (const auto& p : listed) {
      if (!p.starts_with("trade/countries_") || !p.ends_with(".csv")) continue;
      const Table t = read_table_file((tmp.path / "a" / p).string());
      double imp = 0.0, exp = 0.0;
      for (const auto& row : t.rows) {
        imp += parse_number(row[t.require("imports_t_per_year")]).value();
        exp += parse_number(row[t.require("exports_t_per_year")]).value();
      }
      CHECK(imp == doctest::Approx(exp).epsilon(1e-12));
    }
  }

  TEST_CASE("a rerun with fewer outputs leaves no orphans") {
    TempDir tmp("rerun");
    auto j = small_config(tmp.path / "out");
    REQUIRE(run(config_from(j), all_stages()).ok());
    j["output_formats"] = {"csv"};
    j["inputs"].erase("registry");
    j["inputs"].erase("capacity");
    const auto r = run(config_from(j), all_stages());
    std::set<std::string> listed;
    for (const auto& a : r.artifacts) listed.insert(a.path);
    auto on_disk = files_under(tmp.path / "out");
    on_disk.erase("manifest.json");
    CHECK(listed == on_disk);
    CHECK_FALSE(fs::exists(tmp.path / "out/trade/network_2007-2011.json"));
  }

  TEST_CASE("a failing stage skips the rest and writes a partial manifest") {
    TempDir tmp("fail");
    const fs::path bad = tmp.path / "registry.csv";
    std::ofstream(bad) << "id,country\nX,AUT\n";  // no description columns
    auto j = small_config(tmp.path / "out");
    j["inputs"]["registry"] = bad.string();
    const auto r = run(config_from(j), all_stages());
    CHECK_FALSE(r.ok());
    CHECK(status_of(r, "ingest") == "ok");
    CHECK(status_of(r, "firms") == "failed");
    CHECK(status_of(r, "topics") == "skipped");
    CHECK(status_of(r, "extrapolate") == "skipped");
    const auto m = json::parse(slurp(tmp.path / "out/manifest.json"));
    CHECK(m.contains("error"));
    CHECK_FALSE(m["artifacts"].empty());
    CHECK_FALSE(fs::exists(tmp.path / "out/topics"));
  }

  TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  }

  TEST_CASE("command-line exit codes") {
    TempDir tmp("cli");
    const fs::path cfg = tmp.path / "config.json";
    auto j = small_config(tmp.path / "out");
    for (auto key : {"trade", "registry", "capacity"}) {
      j["inputs"][key] = (kFixtures / j["inputs"][key].get<std::string>()).string();
    }
    std::ofstream(cfg) << j.dump();
    CHECK(cli("--help") == 0);
    CHECK(cli("ingest --config " + cfg.string()) == 0);
    CHECK(fs::exists(tmp.path / "out/trade/summary.json"));
    CHECK(cli("backbone --config " + cfg.string() + " --alpha 0.01 --out " + (tmp.path / "bb").string()) == 0);
    CHECK(cli("ingest --config " + (tmp.path / "absent.json").string()) == 2);
    CHECK(cli("ingest --config " + cfg.string() + " --trade " + (tmp.path / "absent.csv").string()) == 2);
    CHECK(cli("ingest --config " + cfg.string() + " --format xml") == 2);
    CHECK(cli("backbone --config " + cfg.string() + " --alpha 2") == 2);
    CHECK(cli("frobnicate") == 2);
    CHECK(cli("") == 2);

    const fs::path bad = tmp.path / "bad.csv";
    std::ofstream(bad) << "id,country\nX,AUT\n";
    CHECK(cli("firms --config " + cfg.string() + " --registry " + bad.string()) == 1);
  }
}

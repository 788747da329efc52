#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "drp/run_config.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("drp_cli_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DRP_CLI_PATH) + " " + args +
                          " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json base_config(const TempDir& dir) {
  json cfg;
  cfg["world"] = {{"users", 30},    {"queries", 15},     {"items", 120},
                  {"interactions", 1200}, {"session_size", 10}, {"seed", 5}};
  cfg["model"] = {{"embed_dim", 8}, {"hidden1", 6}, {"hidden", 4}, {"rank_d", 2}};
  cfg["train"] = {{"epochs", 1}, {"batch_size", 64}, {"seed", 5}};
  cfg["paths"] = {{"dataset", (dir.path / "data.jsonl").string()},
                  {"checkpoint", (dir.path / "ck.json").string()},
                  {"reports", (dir.path / "reports").string()}};
  return cfg;
}

fs::path write_config(const TempDir& dir, const json& cfg,
                      const std::string& name = "config.json") {
  const fs::path p = dir.path / name;
  std::ofstream out(p);
  out << cfg.dump(2);
  return p;
}

}  // namespace

TEST_CASE("generate is deterministic and echoes its effective config") {
  TempDir dir;
  const auto cfg_path = write_config(dir, base_config(dir));
  REQUIRE(run_cli("--config " + cfg_path.string() + " generate") == 0);
  CHECK(fs::exists(dir.path / "reports" / "effective_config.json"));
  CHECK(fs::exists(dir.path / "reports" / "generate_summary.json"));
  const auto first = read_all(dir.path / "data.jsonl");
  REQUIRE(run_cli("--config " + cfg_path.string() + " generate") == 0);
  CHECK(first == read_all(dir.path / "data.jsonl"));  // byte-identical

  // the echoed config materializes defaults
  const auto echoed = json::parse(read_all(dir.path / "reports" /
                                           "effective_config.json"));
  CHECK(echoed["train"]["lr"] == 1e-3);
  CHECK(echoed["world"]["gamma"] == 0.5);
}

TEST_CASE("gamma zero reports a near-zero oracle correlation") {
  TempDir dir;
  auto cfg = base_config(dir);
  cfg["world"]["gamma"] = 0.0;
  cfg["world"]["interactions"] = 20000;
  cfg["world"]["users"] = 100;
  cfg["world"]["items"] = 500;
  cfg["world"]["queries"] = 50;
  const auto cfg_path = write_config(dir, cfg);
  REQUIRE(run_cli("--config " + cfg_path.string() + " generate") == 0);
  const auto summary = json::parse(read_all(dir.path / "reports" /
                                            "generate_summary.json"));
  CHECK(std::abs(summary["pr_correlation"].get<double>()) < 0.02);
}

TEST_CASE("train, eval and heatmap produce their reports") {
  TempDir dir;
  const auto cfg_path = write_config(dir, base_config(dir));
  REQUIRE(run_cli("--config " + cfg_path.string() + " generate") == 0);
  REQUIRE(run_cli("--config " + cfg_path.string() + " train") == 0);
  CHECK(fs::exists(dir.path / "ck.json"));
  CHECK(fs::exists(dir.path / "reports" / "train_log.csv"));
  CHECK(fs::exists(dir.path / "reports" / "split_summary.csv"));

  REQUIRE(run_cli("--config " + cfg_path.string() + " eval") == 0);
  CHECK(fs::exists(dir.path / "reports" / "metrics.csv"));
  CHECK(fs::exists(dir.path / "reports" / "metrics.json"));

  REQUIRE(run_cli("--config " + cfg_path.string() + " heatmap") == 0);
  CHECK(fs::exists(dir.path / "reports" / "heatmap.csv"));

  // bit-identical metrics on repeat
  const auto metrics = read_all(dir.path / "reports" / "metrics.csv");
  REQUIRE(run_cli("--config " + cfg_path.string() + " eval") == 0);
  CHECK(metrics == read_all(dir.path / "reports" / "metrics.csv"));
}

TEST_CASE("missing checkpoint exits with code 2") {
  TempDir dir;
  const auto cfg_path = write_config(dir, base_config(dir));
  REQUIRE(run_cli("--config " + cfg_path.string() + " generate") == 0);
  CHECK(run_cli("--config " + cfg_path.string() + " eval") == 2);
}

TEST_CASE("unknown config keys exit with code 2") {
  TempDir dir;
  auto cfg = base_config(dir);
  cfg["world"]["typo_key"] = 1;
  const auto cfg_path = write_config(dir, cfg);
  CHECK(run_cli("--config " + cfg_path.string() + " generate") == 2);
}

TEST_CASE("single-class test split exits with code 3") {
  TempDir dir;
  // handcrafted dataset: labels in train/val, none in the last session
  std::ofstream out(dir.path / "data.jsonl");
  auto line = [&](int sid, int t, int label) {
    out << R"({"user_id":0,"query_id":0,"item_id":)" << (t % 3)
        << R"(,"history":[],"label":)" << label << R"(,"timestamp":)" << t
        << R"(,"session_id":)" << sid << "}\n";
  };
  int t = 0;
  for (int sid = 0; sid < 10; ++sid) {
    for (int j = 0; j < 4; ++j) line(sid, ++t, (j == 0 && sid < 9) ? 1 : 0);
  }
  out.close();

  auto cfg = base_config(dir);
  const auto cfg_path = write_config(dir, cfg);
  REQUIRE(run_cli("--config " + cfg_path.string() + " train") == 0);
  CHECK(run_cli("--config " + cfg_path.string() + " eval") == 3);
}

TEST_CASE("gradcheck passes on a fresh model") {
  TempDir dir;
  const auto cfg_path = write_config(dir, base_config(dir));
  CHECK(run_cli("--config " + cfg_path.string() + " gradcheck") == 0);
}

TEST_CASE("flags override the config file") {
  TempDir dir;
  const auto cfg_path = write_config(dir, base_config(dir));
  REQUIRE(run_cli("--config " + cfg_path.string() + " --seed 99 generate") == 0);
  const auto echoed = json::parse(read_all(dir.path / "reports" /
                                           "effective_config.json"));
  CHECK(echoed["world"]["seed"] == 99);
  CHECK(echoed["train"]["seed"] == 99);
}

TEST_CASE("ablate emits a seven-row comparison table") {
  TempDir dir;
  auto cfg = base_config(dir);
  cfg["ablate_seeds"] = 1;
  const auto cfg_path = write_config(dir, cfg);
  REQUIRE(run_cli("--config " + cfg_path.string() + " generate") == 0);
  REQUIRE(run_cli("--config " + cfg_path.string() + " ablate") == 0);
  const auto csv = read_all(dir.path / "reports" / "ablation.csv");
  std::istringstream is(csv);
  std::string header;
  std::getline(is, header);
  CHECK(header ==
        "variant,auc_mean,auc_std,logloss_mean,logloss_std,ndcg_mean,"
        "ndcg_std,hr_mean,hr_std");
  std::size_t rows = 0;
  for (std::string row; std::getline(is, row);) rows += !row.empty();
  CHECK(rows == 7);
  CHECK(csv.find("FULL,") != std::string::npos);
  CHECK(csv.find("BASE_FIXED,") != std::string::npos);
}

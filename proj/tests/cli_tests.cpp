// End-to-end tests that drive the molpack binary the way a user would.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef MOLPACK_CLI_BIN
#error "MOLPACK_CLI_BIN must point at the molpack executable"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() / "molpack_cli_io";
  fs::create_directories(dir);
  const fs::path out = dir / ("out" + std::to_string(counter));
  const fs::path err = dir / ("err" + std::to_string(counter));
  ++counter;
  const std::string cmd = std::string(MOLPACK_CLI_BIN) + " " + args + " >" + out.string() +
                          " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = raw < 0 ? raw : WEXITSTATUS(raw);
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path scratch_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("molpack_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const char* kTinyXyz =
    "3\n"
    "E=-1.25\n"
    "O 0.0 0.0 0.0\n"
    "H 0.95 0.0 0.0\n"
    "H -0.24 0.92 0.0\n"
    "2\n"
    "c\n"
    "N 0.0 0.0 0.0\n"
    "N 1.1 0.0 0.0\n"
    "4\n"
    "E=-3.5\n"
    "C 0.0 0.0 0.0\n"
    "O 1.2 0.0 0.0\n"
    "H -0.5 0.9 0.0\n"
    "H -0.5 -0.9 0.0\n";

}  // namespace

TEST_CASE("pack reproduces the worked example from a histogram CSV") {
  const auto dir = scratch_dir("pack");
  write_text(dir / "h.csv", "size,count\n10,1\n7,1\n3,2\n");
  const auto r = run_cli("pack --hist " + (dir / "h.csv").string() + " --s-max 10 --out " +
                         (dir / "o").string());
  REQUIRE(r.exit_code == 0);
  const json summary = json::parse(r.out);
  CHECK(summary.at("pack_count") == 3);
  CHECK(summary.at("padding_fraction").get<double>() == doctest::Approx(7.0 / 30.0));
  CHECK(summary.at("config_hash").get<std::string>().size() == 16);

  const std::string sweep = slurp(dir / "o" / "sweep.csv");
  CHECK(sweep.find("# config_hash=") == 0);
  CHECK(sweep.find("s_m,naive_padding_fraction,lpfhp_padding_fraction") != std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical artifacts") {
  const auto dir = scratch_dir("det");
  write_text(dir / "h.csv", "size,count\n5,9\n7,4\n9,2\n12,1\n");
  const std::string args = "pack --hist " + (dir / "h.csv").string() + " --sweep 12:40 --out ";
  const auto r1 = run_cli(args + (dir / "a").string());
  const auto r2 = run_cli(args + (dir / "b").string());
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  CHECK(r1.out == r2.out);
  CHECK(slurp(dir / "a" / "sweep.csv") == slurp(dir / "b" / "sweep.csv"));
  CHECK(slurp(dir / "a" / "pack_summary.json") == slurp(dir / "b" / "pack_summary.json"));
}

TEST_CASE("stats summarizes a dataset and its artifacts carry the config hash") {
  const auto dir = scratch_dir("stats");
  write_text(dir / "d.xyz", kTinyXyz);
  const auto r = run_cli("stats --dataset " + (dir / "d.xyz").string() + " --r-cut 2.0 --out " +
                         (dir / "o").string());
  REQUIRE(r.exit_code == 0);
  const json summary = json::parse(r.out);
  CHECK(summary.at("graphs") == 3);
  CHECK(summary.at("max_nodes") == 4);
  const std::string hash = summary.at("config_hash");
  for (const char* name : {"node_hist.csv", "edge_hist.csv", "sparsity.csv"}) {
    const std::string text = slurp(dir / "o" / name);
    CHECK(text.find("# config_hash=" + hash) == 0);
  }
}

TEST_CASE("plan emits a full report and honors a profile file") {
  const auto dir = scratch_dir("plan");
  write_text(dir / "hw.json",
             R"({"num_tiles": 64, "worker_threads": 6, "bytes_per_data": 4,
                 "bytes_per_index": 4, "vector_width_bytes": 8,
                 "exchange_bytes_per_cycle": 4.0, "sram_bytes_per_tile": 640000})");
  const auto r = run_cli("plan --kind scatter -I 1024 -M 512 -N 32 --profile " +
                         (dir / "hw.json").string() + " --verify --out " +
                         (dir / "report.json").string());
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report.at("kind") == "scatter");
  CHECK(report.at("shape").at("I") == 1024);
  CHECK(report.at("plan").at("P_I").get<int>() >= 1);
  CHECK(report.at("profile").at("num_tiles") == 64);
  CHECK(report.at("cost").at("total").get<double>() > 0.0);
  CHECK(report.at("verify").at("equivalent") == true);
  CHECK(report.at("verify").at("plans_checked").get<int>() > 0);
}

TEST_CASE("forward writes per-graph predictions that match unbatched evaluation") {
  const auto dir = scratch_dir("fwd");
  write_text(dir / "d.xyz", kTinyXyz);
  const auto r = run_cli("forward --dataset " + (dir / "d.xyz").string() +
                         " --s-max 5 --precision f64 --workers 2 --verify --out " +
                         (dir / "o").string());
  REQUIRE(r.exit_code == 0);
  const json summary = json::parse(r.out);
  CHECK(summary.at("graphs") == 3);
  CHECK(summary.at("max_rel_dev").get<double>() == 0.0);
  const std::string preds = slurp(dir / "o" / "predictions.csv");
  CHECK(preds.find("graph_id,prediction") != std::string::npos);
  CHECK(preds.find("m0,") != std::string::npos);
  CHECK(preds.find("m2,") != std::string::npos);
}

TEST_CASE("a config file supplies defaults and explicit flags beat it") {
  const auto dir = scratch_dir("cfg");
  write_text(dir / "h.csv", "size,count\n4,4\n");
  write_text(dir / "cfg.json", R"({"s_max": 8, "out": ")" + (dir / "fromcfg").string() + "\"}");
  const auto r1 = run_cli("pack --hist " + (dir / "h.csv").string() + " --config " +
                          (dir / "cfg.json").string());
  REQUIRE(r1.exit_code == 0);
  CHECK(json::parse(r1.out).at("s_m") == 8);
  CHECK(fs::exists(dir / "fromcfg" / "sweep.csv"));
  const auto r2 = run_cli("pack --hist " + (dir / "h.csv").string() + " --config " +
                          (dir / "cfg.json").string() + " --s-max 4 --out " +
                          (dir / "flag").string());
  REQUIRE(r2.exit_code == 0);
  CHECK(json::parse(r2.out).at("s_m") == 4);
  CHECK(fs::exists(dir / "flag" / "sweep.csv"));
}

TEST_CASE("failures surface as JSON lines on stderr with a nonzero exit") {
  const auto dir = scratch_dir("err");
  write_text(dir / "empty.xyz", "");
  const auto r = run_cli("stats --dataset " + (dir / "empty.xyz").string());
  CHECK(r.exit_code == 1);
  const json err = json::parse(r.err);
  CHECK(err.at("error") == "parse");
  CHECK(err.at("message").get<std::string>().find("no molecules") != std::string::npos);

  const auto missing = run_cli("stats --dataset /does/not/exist.xyz");
  CHECK(missing.exit_code == 1);
  CHECK(json::parse(missing.err).at("error") == "not_found");

  const auto infeasible = run_cli("plan -I 4096 -M 4096 -N 256 --profile " +
                                  (dir / "tiny.json").string());
  CHECK(infeasible.exit_code == 1);  // profile file missing

  const auto usage = run_cli("plan --kind gather");  // required -I/-M/-N absent
  CHECK(usage.exit_code == 2);
  CHECK(json::parse(usage.err).at("error") == "usage");

  const auto unknown = run_cli("frobnicate");
  CHECK(unknown.exit_code == 2);
}

TEST_CASE("model round-trips through save and load across runs") {
  const auto dir = scratch_dir("model");
  write_text(dir / "d.xyz", kTinyXyz);
  const auto r1 = run_cli("forward --dataset " + (dir / "d.xyz").string() +
                          " --precision f32 --seed 99 --save-model " + (dir / "m").string() +
                          " --out " + (dir / "a").string());
  REQUIRE(r1.exit_code == 0);
  REQUIRE(fs::exists(dir / "m" / "model.bin"));
  REQUIRE(fs::exists(dir / "m" / "model.json"));
  const auto r2 = run_cli("forward --dataset " + (dir / "d.xyz").string() +
                          " --precision f32 --model-blob " + (dir / "m" / "model.bin").string() +
                          " --model-sidecar " + (dir / "m" / "model.json").string() + " --out " +
                          (dir / "b").string());
  REQUIRE(r2.exit_code == 0);
  // same weights, same data: identical prediction rows
  auto strip_header = [](std::string text) {
    return text.substr(text.find('\n') + 1);
  };
  CHECK(strip_header(slurp(dir / "a" / "predictions.csv")) ==
        strip_header(slurp(dir / "b" / "predictions.csv")));
}

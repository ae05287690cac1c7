// molpack command-line tool: dataset statistics, histogram packing, execution
// planning, batched model evaluation and a packing benchmark.
//
// Every report embeds a hash of the fully resolved configuration, so outputs
// can be traced back to the exact settings that produced them.  All commands
// are deterministic for fixed inputs and flags (bench timings excepted).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "molpack/batch.hpp"
#include "molpack/error.hpp"
#include "molpack/graph_build.hpp"
#include "molpack/graph_store.hpp"
#include "molpack/hardware.hpp"
#include "molpack/model.hpp"
#include "molpack/packing.hpp"
#include "molpack/plan_search.hpp"
#include "molpack/rng.hpp"
#include "molpack/simulate.hpp"
#include "molpack/xyz.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace molpack;

namespace {

// --- small utilities -------------------------------------------------------

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw Error("short write to '" + path.string() + "'");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// FNV-1a 64-bit over the canonical (sorted-key) dump of the resolved config.
std::string config_hash(const json& resolved) {
  const std::string text = resolved.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const CapacityError*>(&e)) return "capacity";
  if (dynamic_cast<const BoundsError*>(&e)) return "bounds";
  if (dynamic_cast<const NotFoundError*>(&e)) return "not_found";
  if (dynamic_cast<const IntegrityError*>(&e)) return "integrity";
  if (dynamic_cast<const ConsistencyError*>(&e)) return "consistency";
  if (dynamic_cast<const ShapeError*>(&e)) return "shape";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const InfeasibleError*>(&e)) return "infeasible";
  if (dynamic_cast<const SizeError*>(&e)) return "size";
  return "error";
}

void emit_error(const std::exception& e) {
  const json line = {{"error", error_kind(e)}, {"message", e.what()}};
  std::cerr << line.dump() << '\n';
}

// --- config file overlay ----------------------------------------------------

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  json cfg;
  try {
    cfg = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
  if (!cfg.is_object()) throw ParseError("config '" + path + "': expected a JSON object");
  return cfg;
}

// A value explicitly given on the command line wins over the config file,
// which wins over the built-in default.
template <typename T>
void overlay(const json& cfg, const CLI::Option* opt, const char* key, T& var) {
  if (opt != nullptr && opt->count() > 0) return;
  auto it = cfg.find(key);
  if (it == cfg.end()) return;
  try {
    var = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

// --- shared pipeline pieces --------------------------------------------------

std::vector<Molecule> load_molecules(const std::string& dataset) {
  std::vector<Molecule> mols = parse_xyz(read_file(dataset));
  if (mols.empty()) throw ParseError("no molecules parsed from '" + dataset + "'");
  return mols;
}

std::vector<MolecularGraph> build_graphs(const std::vector<Molecule>& mols, double r_cut,
                                         int knn) {
  std::vector<MolecularGraph> graphs;
  graphs.reserve(mols.size());
  for (const Molecule& m : mols) {
    graphs.push_back(knn > 0 ? build_knn_graph(m, r_cut, knn) : build_radius_graph(m, r_cut));
  }
  return graphs;
}

SizeHistogram histogram_from_csv(const std::string& path) {
  SizeHistogram h;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line == "size,count") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError("histogram '" + path + "' line " + std::to_string(line_no) +
                       ": expected 'size,count'");
    }
    try {
      const int size = std::stoi(line.substr(0, comma));
      const long long count = std::stoll(line.substr(comma + 1));
      if (h.counts.count(size)) {
        throw ParseError("histogram '" + path + "' line " + std::to_string(line_no) +
                         ": duplicate size " + std::to_string(size));
      }
      h.counts[size] = count;
    } catch (const std::invalid_argument&) {
      throw ParseError("histogram '" + path + "' line " + std::to_string(line_no) +
                       ": malformed number");
    } catch (const std::out_of_range&) {
      throw ParseError("histogram '" + path + "' line " + std::to_string(line_no) +
                       ": number out of range");
    }
  }
  h.validate();
  if (h.counts.empty()) throw ParseError("histogram '" + path + "' holds no rows");
  return h;
}

std::vector<int> parse_sweep(const std::string& sweep, int fallback) {
  if (sweep.empty()) return {fallback};
  std::vector<int> values;
  const auto colon = sweep.find(':');
  try {
    if (colon != std::string::npos) {
      const int lo = std::stoi(sweep.substr(0, colon));
      const int hi = std::stoi(sweep.substr(colon + 1));
      if (lo < 1 || hi < lo) throw ConfigError("sweep range '" + sweep + "' is empty");
      for (int v = lo; v <= hi; ++v) values.push_back(v);
    } else {
      std::istringstream ss(sweep);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) values.push_back(std::stoi(item));
      }
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("cannot parse sweep '" + sweep + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("sweep '" + sweep + "' holds an out-of-range value");
  }
  if (values.empty()) throw ConfigError("sweep '" + sweep + "' holds no values");
  return values;
}

HardwareProfile resolve_profile(const std::string& profile_path) {
  if (profile_path.empty()) return HardwareProfile{};
  return load_profile(profile_path);
}

// --- stats -------------------------------------------------------------------

int run_stats(const std::string& dataset, double r_cut, int knn, const std::string& out_dir) {
  const json resolved = {{"command", "stats"}, {"dataset", dataset}, {"r_cut", r_cut},
                         {"knn", knn}};
  const std::string hash = config_hash(resolved);

  const auto mols = load_molecules(dataset);
  const auto graphs = build_graphs(mols, r_cut, knn);
  const DatasetStats stats = dataset_stats(graphs);

  const std::string header = "# config_hash=" + hash + "\n";
  {
    std::ostringstream csv;
    csv << header;
    write_histogram_csv(csv, stats.node_count_histogram);
    write_file(fs::path(out_dir) / "node_hist.csv", csv.str());
  }
  {
    std::ostringstream csv;
    csv << header;
    write_histogram_csv(csv, stats.edge_count_histogram);
    write_file(fs::path(out_dir) / "edge_hist.csv", csv.str());
  }
  {
    std::ostringstream csv;
    csv << header;
    write_sparsity_csv(csv, stats);
    write_file(fs::path(out_dir) / "sparsity.csv", csv.str());
  }

  std::int64_t total_edges = 0;
  for (const auto& g : graphs) total_edges += static_cast<std::int64_t>(g.edge_count());
  json summary = {{"config_hash", hash},
                  {"graphs", stats.graph_count()},
                  {"mean_nodes", stats.mean_node_count()},
                  {"max_nodes", stats.max_node_count()},
                  {"total_edges", total_edges}};
  write_file(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump() << '\n';
  return 0;
}

// --- pack --------------------------------------------------------------------

int run_pack(const std::string& dataset, const std::string& hist_path, int s_max,
             const std::string& sweep, double r_cut, int knn, int edge_round,
             const std::string& out_dir) {
  if (dataset.empty() == hist_path.empty()) {
    throw ConfigError("pack needs exactly one of --dataset or --hist");
  }

  std::vector<MolecularGraph> graphs;
  SizeHistogram hist;
  if (!dataset.empty()) {
    graphs = build_graphs(load_molecules(dataset), r_cut, knn);
    hist = SizeHistogram::from_graphs(graphs);
  } else {
    hist = histogram_from_csv(hist_path);
  }

  const int capacity = s_max > 0 ? s_max : hist.max_size();
  const std::vector<int> sweep_values = parse_sweep(sweep, capacity);

  const json resolved = {{"command", "pack"},
                         {"dataset", dataset},
                         {"hist", hist_path},
                         {"s_max", capacity},
                         {"sweep", sweep_values},
                         {"r_cut", r_cut},
                         {"knn", knn},
                         {"edge_round", edge_round}};
  const std::string hash = config_hash(resolved);

  std::ostringstream csv;
  csv << "# config_hash=" << hash << "\n";
  csv << "s_m,naive_padding_fraction,lpfhp_padding_fraction\n";
  for (int sm : sweep_values) {
    const double naive = padding_fraction(naive_plan(hist, sm));
    const double packed = padding_fraction(lpfhp(hist, sm));
    csv << sm << ',' << fmt_double(naive) << ',' << fmt_double(packed) << '\n';
  }
  write_file(fs::path(out_dir) / "sweep.csv", csv.str());

  const PackingStrategy strategy = lpfhp(hist, capacity);
  const double frac = padding_fraction(strategy);
  const double naive_frac = padding_fraction(naive_plan(hist, capacity));

  json summary = {{"config_hash", hash},
                  {"s_m", capacity},
                  {"pack_count", strategy.pack_count()},
                  {"padding_fraction", frac},
                  {"naive_padding_fraction", naive_frac}};

  if (!graphs.empty()) {
    EdgeCapacityRule rule;
    rule.value = edge_round;
    const std::vector<Pack> packs = materialize(strategy, graphs, rule);
    json pack_list = json::array();
    for (const Pack& p : packs) {
      pack_list.push_back({{"graphs", p.graph_ids},
                           {"real_nodes", p.real_nodes},
                           {"real_edges", p.real_edges}});
    }
    const json manifest = {{"config_hash", hash},
                           {"s_m", capacity},
                           {"edge_capacity", packs.empty() ? 0 : packs.front().edge_capacity},
                           {"packs", pack_list},
                           {"padding_fraction", frac}};
    write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
    summary["manifest"] = (fs::path(out_dir) / "manifest.json").string();
  }

  write_file(fs::path(out_dir) / "pack_summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump() << '\n';
  return 0;
}

// --- plan --------------------------------------------------------------------

int run_plan(const std::string& kind, std::int64_t index_count, std::int64_t table_rows,
             std::int64_t width, const std::string& profile_path, bool verify,
             std::uint64_t seed, const std::string& out_path) {
  OpSpec spec;
  spec.kind = op_kind_from_string(kind);
  spec.index_count = index_count;
  spec.table_rows = table_rows;
  spec.width = width;
  const HardwareProfile hw = resolve_profile(profile_path);

  const json resolved = {{"command", "plan"},
                         {"kind", kind},
                         {"I", index_count},
                         {"M", table_rows},
                         {"N", width},
                         {"profile", json::parse(profile_to_json_text(hw))},
                         {"verify", verify},
                         {"seed", seed}};
  const std::string hash = config_hash(resolved);

  const Plan plan = plan_search(spec, hw);
  json report = json::parse(plan_report_json(spec, plan, hw));
  report["config_hash"] = hash;

  if (verify) {
    // Replay the op under every divisor combination in {1,2,4,8}^3 that fits
    // the shape, on integer-valued data (exact under any regrouping), and
    // demand exact agreement with the flat reference kernel.
    const auto vi = std::min<std::int64_t>(index_count, 256);
    const auto vm = std::min<std::int64_t>(table_rows, 256);
    const auto vn = std::min<std::int64_t>(width, 64);
    UniformRng rng(seed);
    Matrix<double> table(static_cast<std::size_t>(vm), static_cast<std::size_t>(vn));
    for (std::size_t i = 0; i < table.rows(); ++i) {
      for (std::size_t j = 0; j < table.cols(); ++j) {
        table(i, j) = static_cast<double>(rng.range_int(-8, 8));
      }
    }
    Matrix<double> values(static_cast<std::size_t>(vi), static_cast<std::size_t>(vn));
    for (std::size_t i = 0; i < values.rows(); ++i) {
      for (std::size_t j = 0; j < values.cols(); ++j) {
        values(i, j) = static_cast<double>(rng.range_int(-8, 8));
      }
    }
    std::vector<std::int32_t> indices(static_cast<std::size_t>(vi));
    for (auto& v : indices) v = static_cast<std::int32_t>(rng.range_int(0, vm - 1));

    const Matrix<double> expected =
        spec.kind == OpKind::Gather
            ? gather(table, std::span<const std::int32_t>(indices))
            : scatter_add(table, std::span<const std::int32_t>(indices), values);
    int checked = 0;
    for (int pi : {1, 2, 4, 8}) {
      for (int pm : {1, 2, 4, 8}) {
        for (int pn : {1, 2, 4, 8}) {
          const Divisors d{pi, pm, pn};
          if (pi > vi || pm > vm || pn > vn || d.tiles() > hw.num_tiles) continue;
          const Matrix<double> got =
              spec.kind == OpKind::Gather
                  ? simulate_gather(table, std::span<const std::int32_t>(indices), d, hw).first
                  : simulate_scatter(table, std::span<const std::int32_t>(indices), values, d,
                                     hw)
                        .first;
          if (got != expected) {
            throw ConsistencyError("partitioned " + kind + " diverged from the reference at " +
                                   "plan (" + std::to_string(pi) + "," + std::to_string(pm) +
                                   "," + std::to_string(pn) + ")");
          }
          ++checked;
        }
      }
    }
    report["verify"] = {{"shape", {{"I", vi}, {"M", vm}, {"N", vn}}},
                        {"plans_checked", checked},
                        {"equivalent", true}};
  }

  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
    std::cout << report.dump() << '\n';
  }
  return 0;
}

// --- forward -----------------------------------------------------------------

struct ForwardResult {
  std::vector<std::pair<std::string, double>> predictions;  // id -> value
  double max_rel_dev = 0.0;
};

template <typename T>
ForwardResult run_forward_typed(const std::vector<MolecularGraph>& graphs,
                                const std::vector<Pack>& packs, const GraphStore& store,
                                const ModelParams& params, int workers, bool verify) {
  const TypedModel<T> model = typed_model<T>(params);
  std::vector<std::vector<std::pair<std::string, double>>> per_pack(packs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  const auto worker = [&]() {
    while (true) {
      const std::size_t p = next.fetch_add(1);
      if (p >= packs.size()) return;
      try {
        const PackedBatch batch = assemble(packs[p], store);
        const std::vector<T> pred = schnet_forward(batch, model);
        auto& out = per_pack[p];
        for (std::size_t g = 0; g < pred.size(); ++g) {
          out.emplace_back(batch.graph_ids[g], static_cast<double>(pred[g]));
        }
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ForwardResult result;
  for (const auto& pack_preds : per_pack) {
    result.predictions.insert(result.predictions.end(), pack_preds.begin(), pack_preds.end());
  }

  if (verify) {
    std::map<std::string, double> packed;
    for (const auto& [id, v] : result.predictions) packed[id] = v;
    for (const MolecularGraph& g : graphs) {
      const auto single = static_cast<double>(schnet_forward_single<T>(g, params));
      const double batched = packed.at(g.molecule.id);
      const double denom = std::max({std::abs(single), std::abs(batched), 1e-12});
      result.max_rel_dev = std::max(result.max_rel_dev, std::abs(single - batched) / denom);
    }
  }
  return result;
}

int run_forward(const std::string& dataset, double r_cut, int knn, int s_max, int edge_round,
                const std::string& precision, int workers, bool verify, std::uint64_t seed,
                const std::string& model_blob, const std::string& model_sidecar,
                const std::string& save_model_dir, const std::string& out_dir) {
  if (model_blob.empty() != model_sidecar.empty()) {
    throw ConfigError("--model-blob and --model-sidecar must be given together");
  }
  if (precision != "f32" && precision != "f64") {
    throw ConfigError("precision must be f32 or f64, got '" + precision + "'");
  }
  if (workers < 1) throw ConfigError("workers must be at least 1");

  ModelParams params;
  if (!model_blob.empty()) {
    params = load_model(model_blob, model_sidecar);
    if (r_cut > 0.0 && r_cut != params.config.r_cut) {
      throw ConfigError("--r-cut disagrees with the loaded model's cutoff of " +
                        std::to_string(params.config.r_cut));
    }
  } else {
    SchnetConfig config;
    if (r_cut > 0.0) config.r_cut = r_cut;
    params = random_model(config, seed);
  }
  const double effective_r_cut = params.config.r_cut;

  const auto mols = load_molecules(dataset);
  const auto graphs = build_graphs(mols, effective_r_cut, knn);

  SizeHistogram hist = SizeHistogram::from_graphs(graphs);
  const int capacity = s_max > 0 ? s_max : hist.max_size();
  const PackingStrategy strategy = lpfhp(hist, capacity);
  EdgeCapacityRule rule;
  rule.value = edge_round;
  const std::vector<Pack> packs = materialize(strategy, graphs, rule);

  const json resolved = {{"command", "forward"}, {"dataset", dataset},
                         {"r_cut", effective_r_cut}, {"knn", knn},
                         {"s_max", capacity},       {"edge_round", edge_round},
                         {"precision", precision},  {"workers", workers},
                         {"verify", verify},        {"seed", seed},
                         {"model_blob", model_blob}};
  const std::string hash = config_hash(resolved);

  GraphStore store(fs::path(out_dir) / "store");
  for (const MolecularGraph& g : graphs) store.put(g);

  const ForwardResult result =
      precision == "f32"
          ? run_forward_typed<float>(graphs, packs, store, params, workers, verify)
          : run_forward_typed<double>(graphs, packs, store, params, workers, verify);

  // Predictions in dataset order, one row per molecule.
  std::map<std::string, double> by_id;
  for (const auto& [id, v] : result.predictions) by_id[id] = v;
  std::ostringstream csv;
  csv << "# config_hash=" << hash << "\n";
  csv << "graph_id,prediction\n";
  for (const Molecule& m : mols) {
    auto it = by_id.find(m.id);
    if (it == by_id.end()) throw ConsistencyError("no prediction for graph '" + m.id + "'");
    csv << m.id << ',' << fmt_double(it->second) << '\n';
  }
  write_file(fs::path(out_dir) / "predictions.csv", csv.str());

  if (!save_model_dir.empty()) {
    save_model(params, fs::path(save_model_dir) / "model.bin",
               fs::path(save_model_dir) / "model.json");
  }

  json summary = {{"config_hash", hash},
                  {"graphs", graphs.size()},
                  {"packs", packs.size()},
                  {"padding_fraction", padding_fraction(strategy)},
                  {"precision", precision}};
  if (verify) {
    summary["max_rel_dev"] = result.max_rel_dev;
    json equivalence = {{"config_hash", hash},
                        {"precision", precision},
                        {"graphs", graphs.size()},
                        {"max_rel_dev", result.max_rel_dev}};
    write_file(fs::path(out_dir) / "equivalence.json", equivalence.dump(2) + "\n");
  }
  write_file(fs::path(out_dir) / "forward_summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump() << '\n';
  return 0;
}

// --- bench -------------------------------------------------------------------

int run_bench(const std::string& sizes, int s_max) {
  if (sizes.empty()) throw ConfigError("bench needs at least one size");
  const std::vector<int> ns = parse_sweep(sizes, 0);
  std::cout << "n_graphs,s_m,elapsed_ms,padding_fraction\n";
  for (int n : ns) {
    const SizeHistogram hist = synthetic_molecule_histogram(n);
    const int capacity = s_max > 0 ? s_max : 4 * hist.max_size();
    const auto t0 = std::chrono::steady_clock::now();
    const PackingStrategy strategy = lpfhp(hist, capacity);
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    std::cout << n << ',' << capacity << ',' << fmt_double(ms) << ','
              << fmt_double(padding_fraction(strategy)) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"molecular graph packing and partitioned execution toolkit"};
  app.require_subcommand(1);

  // stats
  auto* stats = app.add_subcommand("stats", "per-dataset shape statistics");
  std::string stats_dataset, stats_out = "out", stats_config;
  double stats_rcut = 6.0;
  int stats_knn = 0;
  stats->add_option("--dataset", stats_dataset, "XYZ dataset")->required();
  auto* stats_rcut_opt = stats->add_option("--r-cut", stats_rcut, "cutoff radius");
  auto* stats_knn_opt =
      stats->add_option("--knn", stats_knn, "keep at most k nearest neighbors (0 = radius)");
  auto* stats_out_opt = stats->add_option("--out", stats_out, "output directory");
  stats->add_option("--config", stats_config, "JSON config file");

  // pack
  auto* pack = app.add_subcommand("pack", "histogram packing and padding sweep");
  std::string pack_dataset, pack_hist, pack_sweep, pack_out = "out", pack_config;
  double pack_rcut = 6.0;
  int pack_knn = 0, pack_smax = 0, pack_edge_round = 8;
  pack->add_option("--dataset", pack_dataset, "XYZ dataset");
  pack->add_option("--hist", pack_hist, "size histogram CSV (size,count)");
  auto* pack_smax_opt = pack->add_option("--s-max", pack_smax, "pack capacity (default: max size)");
  auto* pack_sweep_opt =
      pack->add_option("--sweep", pack_sweep, "capacities to sweep, 'lo:hi' or comma list");
  auto* pack_rcut_opt = pack->add_option("--r-cut", pack_rcut, "cutoff radius");
  auto* pack_knn_opt = pack->add_option("--knn", pack_knn, "neighbor cap (0 = radius)");
  auto* pack_edge_opt =
      pack->add_option("--edge-round", pack_edge_round, "edge capacity rounding multiple");
  auto* pack_out_opt = pack->add_option("--out", pack_out, "output directory");
  pack->add_option("--config", pack_config, "JSON config file");

  // plan
  auto* plan = app.add_subcommand("plan", "tile partition search for one indexed op");
  std::string plan_kind = "gather", plan_profile, plan_out, plan_config;
  std::int64_t plan_i = 0, plan_m = 0, plan_n = 0;
  bool plan_verify = false;
  std::uint64_t plan_seed = 1234;
  auto* plan_kind_opt = plan->add_option("--kind", plan_kind, "gather or scatter");
  plan->add_option("-I,--index-count", plan_i, "index rows")->required();
  plan->add_option("-M,--table-rows", plan_m, "dense table rows")->required();
  plan->add_option("-N,--width", plan_n, "feature columns")->required();
  auto* plan_profile_opt = plan->add_option("--profile", plan_profile, "hardware profile JSON");
  plan->add_flag("--verify", plan_verify, "replay partitioned execution vs the flat kernel");
  auto* plan_seed_opt = plan->add_option("--seed", plan_seed, "verification data seed");
  plan->add_option("--out", plan_out, "report file (default: stdout)");
  plan->add_option("--config", plan_config, "JSON config file");

  // forward
  auto* fwd = app.add_subcommand("forward", "pack a dataset and run the batched model");
  std::string fwd_dataset, fwd_precision = "f32", fwd_blob, fwd_sidecar, fwd_save, fwd_out = "out",
              fwd_config;
  double fwd_rcut = 0.0;  // 0 = model default
  int fwd_knn = 0, fwd_smax = 0, fwd_edge_round = 8, fwd_workers = 1;
  bool fwd_verify = false;
  std::uint64_t fwd_seed = 1234;
  fwd->add_option("--dataset", fwd_dataset, "XYZ dataset")->required();
  auto* fwd_rcut_opt = fwd->add_option("--r-cut", fwd_rcut, "cutoff radius");
  auto* fwd_knn_opt = fwd->add_option("--knn", fwd_knn, "neighbor cap (0 = radius)");
  auto* fwd_smax_opt = fwd->add_option("--s-max", fwd_smax, "pack capacity (default: max size)");
  auto* fwd_edge_opt =
      fwd->add_option("--edge-round", fwd_edge_round, "edge capacity rounding multiple");
  auto* fwd_precision_opt = fwd->add_option("--precision", fwd_precision, "f32 or f64");
  auto* fwd_workers_opt = fwd->add_option("--workers", fwd_workers, "worker threads over packs");
  fwd->add_flag("--verify", fwd_verify, "compare against per-graph evaluation");
  auto* fwd_seed_opt = fwd->add_option("--seed", fwd_seed, "model init seed");
  fwd->add_option("--model-blob", fwd_blob, "model weight blob");
  fwd->add_option("--model-sidecar", fwd_sidecar, "model sidecar JSON");
  fwd->add_option("--save-model", fwd_save, "directory to save the model into");
  auto* fwd_out_opt = fwd->add_option("--out", fwd_out, "output directory");
  fwd->add_option("--config", fwd_config, "JSON config file");

  // bench
  auto* bench = app.add_subcommand("bench", "packing throughput benchmark");
  std::string bench_sizes = "20000,40000,80000,160000", bench_config;
  int bench_smax = 0;
  auto* bench_sizes_opt = bench->add_option("--sizes", bench_sizes, "histogram sizes to time");
  auto* bench_smax_opt = bench->add_option("--s-max", bench_smax, "pack capacity");
  bench->add_option("--config", bench_config, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help to stdout
  } catch (const CLI::ParseError& e) {
    const json line = {{"error", "usage"}, {"message", e.what()}};
    std::cerr << line.dump() << '\n';
    return 2;
  }

  try {
    if (app.got_subcommand(stats)) {
      const json cfg = load_config(stats_config);
      overlay(cfg, stats_rcut_opt, "r_cut", stats_rcut);
      overlay(cfg, stats_knn_opt, "knn", stats_knn);
      overlay(cfg, stats_out_opt, "out", stats_out);
      return run_stats(stats_dataset, stats_rcut, stats_knn, stats_out);
    }
    if (app.got_subcommand(pack)) {
      const json cfg = load_config(pack_config);
      overlay(cfg, pack_smax_opt, "s_max", pack_smax);
      overlay(cfg, pack_sweep_opt, "sweep", pack_sweep);
      overlay(cfg, pack_rcut_opt, "r_cut", pack_rcut);
      overlay(cfg, pack_knn_opt, "knn", pack_knn);
      overlay(cfg, pack_edge_opt, "edge_round", pack_edge_round);
      overlay(cfg, pack_out_opt, "out", pack_out);
      return run_pack(pack_dataset, pack_hist, pack_smax, pack_sweep, pack_rcut, pack_knn,
                      pack_edge_round, pack_out);
    }
    if (app.got_subcommand(plan)) {
      const json cfg = load_config(plan_config);
      overlay(cfg, plan_kind_opt, "kind", plan_kind);
      overlay(cfg, plan_profile_opt, "profile", plan_profile);
      overlay(cfg, plan_seed_opt, "seed", plan_seed);
      return run_plan(plan_kind, plan_i, plan_m, plan_n, plan_profile, plan_verify, plan_seed,
                      plan_out);
    }
    if (app.got_subcommand(fwd)) {
      const json cfg = load_config(fwd_config);
      overlay(cfg, fwd_rcut_opt, "r_cut", fwd_rcut);
      overlay(cfg, fwd_knn_opt, "knn", fwd_knn);
      overlay(cfg, fwd_smax_opt, "s_max", fwd_smax);
      overlay(cfg, fwd_edge_opt, "edge_round", fwd_edge_round);
      overlay(cfg, fwd_precision_opt, "precision", fwd_precision);
      overlay(cfg, fwd_workers_opt, "workers", fwd_workers);
      overlay(cfg, fwd_seed_opt, "seed", fwd_seed);
      overlay(cfg, fwd_out_opt, "out", fwd_out);
      return run_forward(fwd_dataset, fwd_rcut, fwd_knn, fwd_smax, fwd_edge_round, fwd_precision,
                         fwd_workers, fwd_verify, fwd_seed, fwd_blob, fwd_sidecar, fwd_save,
                         fwd_out);
    }
    if (app.got_subcommand(bench)) {
      const json cfg = load_config(bench_config);
      overlay(cfg, bench_sizes_opt, "sizes", bench_sizes);
      overlay(cfg, bench_smax_opt, "s_max", bench_smax);
      return run_bench(bench_sizes, bench_smax);
    }
  } catch (const std::exception& e) {
    emit_error(e);
    return 1;
  }
  return 0;
}

#include "molpack/graph_build.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "molpack/error.hpp"

namespace molpack {

MolecularGraph build_radius_graph(const Molecule& mol, double r_cut) {
  if (r_cut <= 0.0) throw ConfigError("build_radius_graph: r_cut must be positive");
  mol.validate();
  MolecularGraph graph;
  graph.molecule = mol;
  graph.r_cut = r_cut;
  const auto n = static_cast<std::int32_t>(mol.size());
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = distance_between(mol, static_cast<std::size_t>(i),
                                        static_cast<std::size_t>(j));
      if (d < r_cut) {
        graph.edges.push_back({i, j});
        graph.distances.push_back(d);
      }
    }
  }
  return graph;
}

MolecularGraph build_knn_graph(const Molecule& mol, double r_cut, int k) {
  if (r_cut <= 0.0) throw ConfigError("build_knn_graph: r_cut must be positive");
  if (k < 0) throw ConfigError("build_knn_graph: k must be non-negative");
  mol.validate();
  MolecularGraph graph;
  graph.molecule = mol;
  graph.r_cut = r_cut;
  const auto n = static_cast<std::int32_t>(mol.size());
  std::vector<std::pair<double, std::int32_t>> candidates;
  for (std::int32_t i = 0; i < n; ++i) {
    candidates.clear();
    for (std::int32_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = distance_between(mol, static_cast<std::size_t>(i),
                                        static_cast<std::size_t>(j));
      if (d < r_cut) candidates.emplace_back(d, j);
    }
    // Nearest first; equal distances keep the smaller source index.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (candidates.size() > static_cast<std::size_t>(k)) candidates.resize(static_cast<std::size_t>(k));
    // Re-emit in source order so edge order stays deterministic and matches
    // the radius graph convention.
    std::sort(candidates.begin(), candidates.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    for (const auto& [d, j] : candidates) {
      graph.edges.push_back({i, j});
      graph.distances.push_back(d);
    }
  }
  return graph;
}

DatasetStats dataset_stats(std::span<const MolecularGraph> graphs) {
  DatasetStats stats;
  for (const MolecularGraph& g : graphs) {
    stats.node_count_histogram[static_cast<int>(g.node_count())] += 1;
    stats.edge_count_histogram[static_cast<int>(g.edge_count())] += 1;
    stats.graph_ids.push_back(g.molecule.id);
    stats.sparsity_samples.push_back(edge_sparsity(g));
  }
  return stats;
}

void write_histogram_csv(std::ostream& out, const std::map<int, std::int64_t>& histogram) {
  out << "size,count\n";
  for (const auto& [size, count] : histogram) out << size << ',' << count << '\n';
}

void write_sparsity_csv(std::ostream& out, const DatasetStats& stats) {
  out << "graph_id,sparsity\n";
  char buf[64];
  for (std::size_t i = 0; i < stats.graph_ids.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", stats.sparsity_samples[i]);
    out << stats.graph_ids[i] << ',' << buf << '\n';
  }
}

}  // namespace molpack

#include "molpack/molecule.hpp"

#include <cmath>

#include "molpack/elements.hpp"

namespace molpack {

void Molecule::validate() const {
  if (atomic_numbers.size() != positions.size()) {
    throw ConsistencyError("molecule '" + id + "': " + std::to_string(atomic_numbers.size()) +
                           " atomic numbers vs " + std::to_string(positions.size()) +
                           " positions");
  }
  for (std::size_t a = 0; a < atomic_numbers.size(); ++a) {
    const auto z = atomic_numbers[a];
    if (z < 1 || z > kMaxAtomicNumber) {
      throw ConsistencyError("molecule '" + id + "': atom " + std::to_string(a) +
                             " has atomic number " + std::to_string(z));
    }
    for (double coord : positions[a]) {
      if (!std::isfinite(coord)) {
        throw ConsistencyError("molecule '" + id + "': atom " + std::to_string(a) +
                               " has a non-finite coordinate");
      }
    }
  }
}

double distance_between(const Molecule& mol, std::size_t i, std::size_t j) {
  const Vec3& p = mol.positions[i];
  const Vec3& q = mol.positions[j];
  const double dx = p[0] - q[0];
  const double dy = p[1] - q[1];
  const double dz = p[2] - q[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void MolecularGraph::validate() const {
  molecule.validate();
  if (edges.size() != distances.size()) {
    throw ConsistencyError("graph '" + molecule.id + "': " + std::to_string(edges.size()) +
                           " edges vs " + std::to_string(distances.size()) + " distances");
  }
  const auto n = static_cast<std::int32_t>(molecule.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    if (edge.target < 0 || edge.target >= n || edge.source < 0 || edge.source >= n) {
      throw ConsistencyError("graph '" + molecule.id + "': edge " + std::to_string(e) +
                             " references a node outside [0, " + std::to_string(n) + ")");
    }
    if (edge.target == edge.source) {
      throw ConsistencyError("graph '" + molecule.id + "': edge " + std::to_string(e) +
                             " is a self-loop");
    }
  }
}

double edge_sparsity(const MolecularGraph& graph) {
  const auto n = graph.node_count();
  if (n <= 1) return 0.0;
  return static_cast<double>(graph.edge_count()) /
         (static_cast<double>(n) * static_cast<double>(n - 1));
}

std::int64_t DatasetStats::graph_count() const {
  std::int64_t total = 0;
  for (const auto& [size, count] : node_count_histogram) total += count;
  return total;
}

double DatasetStats::mean_node_count() const {
  std::int64_t graphs = 0;
  std::int64_t nodes = 0;
  for (const auto& [size, count] : node_count_histogram) {
    graphs += count;
    nodes += static_cast<std::int64_t>(size) * count;
  }
  return graphs == 0 ? 0.0 : static_cast<double>(nodes) / static_cast<double>(graphs);
}

int DatasetStats::max_node_count() const {
  return node_count_histogram.empty() ? 0 : node_count_histogram.rbegin()->first;
}

}  // namespace molpack

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "molpack/error.hpp"

namespace molpack {

using Vec3 = std::array<double, 3>;

// One molecule: parallel arrays of atomic numbers and Cartesian positions
// (angstroms), an optional scalar label (e.g. an energy), and a dataset id.
struct Molecule {
  std::string id;
  std::vector<std::int32_t> atomic_numbers;
  std::vector<Vec3> positions;
  std::optional<double> label;

  std::size_t size() const { return atomic_numbers.size(); }

  // Throws ConsistencyError if the parallel arrays disagree or an atomic
  // number is outside [1, 118].
  void validate() const;
};

double distance_between(const Molecule& mol, std::size_t i, std::size_t j);

// Directed edge: a message flows from `source` into `target`.
struct Edge {
  std::int32_t target = 0;
  std::int32_t source = 0;

  bool operator==(const Edge&) const = default;
};

// A molecule together with its neighbor structure at some cutoff radius.
// `distances[e]` is the interatomic distance of `edges[e]`.
struct MolecularGraph {
  Molecule molecule;
  std::vector<Edge> edges;
  std::vector<double> distances;
  double r_cut = 0.0;

  std::size_t node_count() const { return molecule.size(); }
  std::size_t edge_count() const { return edges.size(); }

  void validate() const;
};

// Fraction of the |V|*(|V|-1) possible directed edges that are present.
// Defined as 0 for graphs with a single node (no pair exists to count).
double edge_sparsity(const MolecularGraph& graph);

// Aggregate shape statistics over a set of molecular graphs.
struct DatasetStats {
  std::map<int, std::int64_t> node_count_histogram;
  std::map<int, std::int64_t> edge_count_histogram;
  std::vector<std::string> graph_ids;
  std::vector<double> sparsity_samples;  // parallel to graph_ids

  std::int64_t graph_count() const;
  double mean_node_count() const;
  int max_node_count() const;
};

}  // namespace molpack

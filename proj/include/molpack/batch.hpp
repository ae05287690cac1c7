#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "molpack/graph_store.hpp"
#include "molpack/molecule.hpp"
#include "molpack/packing.hpp"

namespace molpack {

// A planned fixed-capacity batch: which graphs go in and how much room the
// batch reserves for nodes and edges.
struct Pack {
  std::vector<std::string> graph_ids;
  int node_capacity = 0;
  int edge_capacity = 0;
  int real_nodes = 0;
  int real_edges = 0;
};

// How materialize() picks the shared edge capacity of all packs.
struct EdgeCapacityRule {
  enum class Kind {
    MaxObservedRounded,  // max real edge count over packs, rounded up to a multiple of `value`
    Fixed,               // exactly `value`
    PerNode,             // value * node capacity
  };
  Kind kind = Kind::MaxObservedRounded;
  int value = 8;
};

// Turns a histogram-level strategy into concrete packs over `graphs`, which
// must have exactly the size multiset the strategy was computed from.  Graphs
// of equal size are consumed in input order.  A pack that is full of real
// nodes but still has spare edge slots gets one extra (padding) node so the
// spare edge slots have a padding node to point at.
std::vector<Pack> materialize(const PackingStrategy& strategy,
                              std::span<const MolecularGraph> graphs,
                              const EdgeCapacityRule& rule = {});

// A pack realized as fixed-size arrays, ready for batched model evaluation.
// Real nodes come first (grouped per graph, in pack order), padding nodes
// after; padding entries carry node_graph_ids == -1.  Padding edges are
// self-loops on the last (padding) node slot with distance 0.
struct PackedBatch {
  int node_capacity = 0;
  int edge_capacity = 0;
  int real_nodes = 0;
  int real_edges = 0;
  std::vector<std::int32_t> atomic_numbers;  // node_capacity, 0 for padding
  std::vector<Vec3> positions;               // node_capacity
  std::vector<std::int32_t> node_graph_ids;  // node_capacity, -1 for padding
  std::vector<std::int32_t> edge_targets;    // edge_capacity
  std::vector<std::int32_t> edge_sources;    // edge_capacity
  std::vector<double> edge_distances;        // edge_capacity
  std::vector<std::string> graph_ids;        // one per real graph
  std::vector<std::optional<double>> labels; // parallel to graph_ids

  int graph_count() const { return static_cast<int>(graph_ids.size()); }

  // Throws ConsistencyError/CapacityError when the layout invariants above
  // are violated.
  void validate() const;
};

// Loads the pack's graphs from the store and lays them out as fixed arrays.
PackedBatch assemble(const Pack& pack, const GraphStore& store);

// A batch holding exactly one graph with no padding at all.
PackedBatch assemble_single(const MolecularGraph& graph);

}  // namespace molpack

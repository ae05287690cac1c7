#include "molpack/batch.hpp"

#include <algorithm>
#include <map>

#include "molpack/error.hpp"

namespace molpack {
namespace {

int rounded_up(int value, int multiple) {
  if (multiple <= 0) throw ConfigError("edge capacity rounding multiple must be positive");
  return ((value + multiple - 1) / multiple) * multiple;
}

}  // namespace

std::vector<Pack> materialize(const PackingStrategy& strategy,
                              std::span<const MolecularGraph> graphs,
                              const EdgeCapacityRule& rule) {
  // Queue up graph indices by size, preserving input order.
  std::map<int, std::vector<std::size_t>> by_size;
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    by_size[static_cast<int>(graphs[g].node_count())].push_back(g);
  }
  std::map<int, std::size_t> cursor;

  std::vector<Pack> packs;
  packs.reserve(static_cast<std::size_t>(strategy.pack_count()));
  for (const StrategyEntry& entry : strategy.entries) {
    for (std::int64_t rep = 0; rep < entry.multiplicity; ++rep) {
      Pack pack;
      pack.node_capacity = strategy.capacity;
      for (int size : entry.sizes) {
        auto it = by_size.find(size);
        std::size_t& next = cursor[size];
        if (it == by_size.end() || next >= it->second.size()) {
          throw ConsistencyError("strategy expects more graphs of size " +
                                 std::to_string(size) + " than the input holds");
        }
        const MolecularGraph& graph = graphs[it->second[next]];
        ++next;
        pack.graph_ids.push_back(graph.molecule.id);
        pack.real_nodes += static_cast<int>(graph.node_count());
        pack.real_edges += static_cast<int>(graph.edge_count());
      }
      packs.push_back(std::move(pack));
    }
  }
  for (const auto& [size, queue] : by_size) {
    if (cursor[size] != queue.size()) {
      throw ConsistencyError("input holds more graphs of size " + std::to_string(size) +
                             " than the strategy packs");
    }
  }

  int edge_capacity = 0;
  switch (rule.kind) {
    case EdgeCapacityRule::Kind::MaxObservedRounded: {
      int max_edges = 0;
      for (const Pack& p : packs) max_edges = std::max(max_edges, p.real_edges);
      edge_capacity = rounded_up(max_edges, rule.value);
      break;
    }
    case EdgeCapacityRule::Kind::Fixed:
      edge_capacity = rule.value;
      break;
    case EdgeCapacityRule::Kind::PerNode:
      edge_capacity = rule.value * strategy.capacity;
      break;
  }
  for (Pack& p : packs) {
    if (p.real_edges > edge_capacity) {
      throw CapacityError("pack holds " + std::to_string(p.real_edges) +
                          " edges but the edge capacity is " + std::to_string(edge_capacity));
    }
    p.edge_capacity = edge_capacity;
    // Padding edges are self-loops on a padding node; make sure one exists.
    if (p.real_nodes == p.node_capacity && p.real_edges < p.edge_capacity) {
      p.node_capacity += 1;
    }
  }
  return packs;
}

void PackedBatch::validate() const {
  const auto cap_n = static_cast<std::size_t>(node_capacity);
  const auto cap_e = static_cast<std::size_t>(edge_capacity);
  if (atomic_numbers.size() != cap_n || positions.size() != cap_n ||
      node_graph_ids.size() != cap_n) {
    throw ConsistencyError("packed batch node arrays do not match node_capacity");
  }
  if (edge_targets.size() != cap_e || edge_sources.size() != cap_e ||
      edge_distances.size() != cap_e) {
    throw ConsistencyError("packed batch edge arrays do not match edge_capacity");
  }
  if (real_nodes > node_capacity || real_edges > edge_capacity) {
    throw CapacityError("packed batch real counts exceed capacities");
  }
  if (graph_ids.size() != labels.size()) {
    throw ConsistencyError("packed batch has " + std::to_string(graph_ids.size()) +
                           " graph ids but " + std::to_string(labels.size()) + " labels");
  }
  const auto n_graphs = static_cast<std::int32_t>(graph_ids.size());
  std::int32_t current = -1;
  for (int v = 0; v < node_capacity; ++v) {
    const std::int32_t g = node_graph_ids[static_cast<std::size_t>(v)];
    if (v < real_nodes) {
      // Real nodes are grouped per graph in ascending graph order.
      if (g != current && g != current + 1) {
        throw ConsistencyError("packed batch node " + std::to_string(v) +
                               " breaks the per-graph grouping");
      }
      current = g;
      if (g < 0 || g >= n_graphs) {
        throw ConsistencyError("packed batch node " + std::to_string(v) +
                               " references graph " + std::to_string(g));
      }
    } else if (g != -1) {
      throw ConsistencyError("packed batch padding node " + std::to_string(v) +
                             " is not marked with -1");
    }
  }
  if (real_nodes > 0 && current != n_graphs - 1) {
    throw ConsistencyError("packed batch covers graphs up to " + std::to_string(current) +
                           " but lists " + std::to_string(n_graphs));
  }
  for (int e = 0; e < edge_capacity; ++e) {
    const auto t = edge_targets[static_cast<std::size_t>(e)];
    const auto s = edge_sources[static_cast<std::size_t>(e)];
    if (t < 0 || t >= node_capacity || s < 0 || s >= node_capacity) {
      throw BoundsError("packed batch edge " + std::to_string(e) + " leaves the node range");
    }
    if (e < real_edges) {
      if (t == s) {
        throw ConsistencyError("packed batch real edge " + std::to_string(e) +
                               " is a self-loop");
      }
      if (node_graph_ids[static_cast<std::size_t>(t)] !=
          node_graph_ids[static_cast<std::size_t>(s)]) {
        throw ConsistencyError("packed batch real edge " + std::to_string(e) +
                               " crosses graphs");
      }
    } else {
      if (t != s || node_graph_ids[static_cast<std::size_t>(t)] != -1) {
        throw ConsistencyError("packed batch padding edge " + std::to_string(e) +
                               " must be a self-loop on a padding node");
      }
    }
  }
}

PackedBatch assemble(const Pack& pack, const GraphStore& store) {
  PackedBatch batch;
  batch.node_capacity = pack.node_capacity;
  batch.edge_capacity = pack.edge_capacity;
  batch.real_nodes = pack.real_nodes;
  batch.real_edges = pack.real_edges;
  batch.atomic_numbers.assign(static_cast<std::size_t>(pack.node_capacity), 0);
  batch.positions.assign(static_cast<std::size_t>(pack.node_capacity), Vec3{0.0, 0.0, 0.0});
  batch.node_graph_ids.assign(static_cast<std::size_t>(pack.node_capacity), -1);

  std::int32_t node_offset = 0;
  std::int32_t graph_index = 0;
  std::int32_t edge_cursor = 0;
  const auto pad_slot = static_cast<std::int32_t>(pack.node_capacity - 1);
  batch.edge_targets.assign(static_cast<std::size_t>(pack.edge_capacity), pad_slot);
  batch.edge_sources.assign(static_cast<std::size_t>(pack.edge_capacity), pad_slot);
  batch.edge_distances.assign(static_cast<std::size_t>(pack.edge_capacity), 0.0);

  for (const std::string& id : pack.graph_ids) {
    const MolecularGraph graph = store.get(id);
    graph.validate();
    const auto n = static_cast<std::int32_t>(graph.node_count());
    if (node_offset + n > pack.node_capacity) {
      throw CapacityError("pack overflows its node capacity while adding '" + id + "'");
    }
    for (std::int32_t v = 0; v < n; ++v) {
      const auto slot = static_cast<std::size_t>(node_offset + v);
      batch.atomic_numbers[slot] = graph.molecule.atomic_numbers[static_cast<std::size_t>(v)];
      batch.positions[slot] = graph.molecule.positions[static_cast<std::size_t>(v)];
      batch.node_graph_ids[slot] = graph_index;
    }
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
      if (edge_cursor >= pack.edge_capacity) {
        throw CapacityError("pack overflows its edge capacity while adding '" + id + "'");
      }
      batch.edge_targets[static_cast<std::size_t>(edge_cursor)] =
          graph.edges[e].target + node_offset;
      batch.edge_sources[static_cast<std::size_t>(edge_cursor)] =
          graph.edges[e].source + node_offset;
      batch.edge_distances[static_cast<std::size_t>(edge_cursor)] = graph.distances[e];
      ++edge_cursor;
    }
    batch.graph_ids.push_back(id);
    batch.labels.push_back(graph.molecule.label);
    node_offset += n;
    ++graph_index;
  }
  if (node_offset != pack.real_nodes || edge_cursor != pack.real_edges) {
    throw ConsistencyError("pack metadata disagrees with the stored graphs (" +
                           std::to_string(node_offset) + " nodes, " +
                           std::to_string(edge_cursor) + " edges found)");
  }
  if (pack.real_edges < pack.edge_capacity && pack.real_nodes == pack.node_capacity) {
    throw CapacityError("pack needs padding edges but has no padding node slot");
  }
  batch.validate();
  return batch;
}

PackedBatch assemble_single(const MolecularGraph& graph) {
  graph.validate();
  PackedBatch batch;
  batch.node_capacity = static_cast<int>(graph.node_count());
  batch.edge_capacity = static_cast<int>(graph.edge_count());
  batch.real_nodes = batch.node_capacity;
  batch.real_edges = batch.edge_capacity;
  batch.atomic_numbers = graph.molecule.atomic_numbers;
  batch.positions = graph.molecule.positions;
  batch.node_graph_ids.assign(static_cast<std::size_t>(batch.node_capacity), 0);
  batch.edge_targets.reserve(graph.edge_count());
  batch.edge_sources.reserve(graph.edge_count());
  for (const Edge& e : graph.edges) {
    batch.edge_targets.push_back(e.target);
    batch.edge_sources.push_back(e.source);
  }
  batch.edge_distances = graph.distances;
  batch.graph_ids.push_back(graph.molecule.id);
  batch.labels.push_back(graph.molecule.label);
  batch.validate();
  return batch;
}

}  // namespace molpack

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "molpack/molecule.hpp"

namespace molpack {

// Multiset of graph sizes: size -> number of graphs of that size.
struct SizeHistogram {
  std::map<int, std::int64_t> counts;

  static SizeHistogram from_sizes(std::span<const int> sizes);
  static SizeHistogram from_graphs(std::span<const MolecularGraph> graphs);

  std::int64_t total_graphs() const;
  std::int64_t total_items() const;  // sum of size * count
  int max_size() const;              // 0 when empty

  // Throws ConsistencyError unless every size and count is positive.
  void validate() const;
};

// One kind of pack produced by a packing strategy: `multiplicity` packs, each
// holding one graph per entry of `sizes` and `leftover` unused item slots.
struct StrategyEntry {
  std::int64_t multiplicity = 0;
  std::vector<int> sizes;  // non-increasing
  int leftover = 0;        // capacity - sum(sizes)
};

struct PackingStrategy {
  int capacity = 0;
  // Deterministic order: ascending leftover, then construction order.
  std::vector<StrategyEntry> entries;

  std::int64_t pack_count() const;
  std::int64_t item_slots() const;    // pack_count * capacity
  std::int64_t padded_slots() const;  // sum of multiplicity * leftover
};

// Fraction of item slots wasted on padding; 0 for an empty strategy.
double padding_fraction(const PackingStrategy& strategy);

// Longest-pack-first histogram packing.  Walks sizes from `capacity` down to
// 1 and, for each graph, drops it into the open pack with the least remaining
// space that still fits it (packs with equal composition are tracked in bulk
// as one strategy entry).  When nothing fits, one new pack is opened and the
// scan continues, so later graphs of the same size can land in it.  Runs in
// O(total_graphs * capacity) worst case.  Throws CapacityError if any size
// exceeds `capacity`.
PackingStrategy lpfhp(const SizeHistogram& histogram, int capacity);

// One graph per pack.
PackingStrategy naive_plan(const SizeHistogram& histogram, int capacity);

// Minimum number of packs that can hold the histogram, found by exhaustive
// branch-and-bound over every distinct assignment.  Throws SizeError when the
// histogram holds more than `max_items` graphs.
std::int64_t exact_pack_count(const SizeHistogram& histogram, int capacity,
                              std::int64_t max_items = 12);

// Synthetic size histogram shaped like a small-organic-molecule dataset:
// a binomial bump over [3, max_size] scaled to roughly `n_graphs` graphs with
// the requested mean size, always containing at least one graph of max_size.
SizeHistogram synthetic_molecule_histogram(std::int64_t n_graphs, int max_size = 29,
                                           double mean_size = 17.98);

}  // namespace molpack

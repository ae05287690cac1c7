#include "molpack/packing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "molpack/error.hpp"

namespace molpack {

SizeHistogram SizeHistogram::from_sizes(std::span<const int> sizes) {
  SizeHistogram h;
  for (int s : sizes) h.counts[s] += 1;
  h.validate();
  return h;
}

SizeHistogram SizeHistogram::from_graphs(std::span<const MolecularGraph> graphs) {
  SizeHistogram h;
  for (const MolecularGraph& g : graphs) h.counts[static_cast<int>(g.node_count())] += 1;
  h.validate();
  return h;
}

std::int64_t SizeHistogram::total_graphs() const {
  std::int64_t total = 0;
  for (const auto& [size, count] : counts) total += count;
  return total;
}

std::int64_t SizeHistogram::total_items() const {
  std::int64_t total = 0;
  for (const auto& [size, count] : counts) total += static_cast<std::int64_t>(size) * count;
  return total;
}

int SizeHistogram::max_size() const { return counts.empty() ? 0 : counts.rbegin()->first; }

void SizeHistogram::validate() const {
  for (const auto& [size, count] : counts) {
    if (size < 1) throw ConsistencyError("size histogram holds non-positive size " +
                                         std::to_string(size));
    if (count < 1) throw ConsistencyError("size histogram holds non-positive count " +
                                          std::to_string(count) + " for size " +
                                          std::to_string(size));
  }
}

std::int64_t PackingStrategy::pack_count() const {
  std::int64_t total = 0;
  for (const StrategyEntry& e : entries) total += e.multiplicity;
  return total;
}

std::int64_t PackingStrategy::item_slots() const {
  return pack_count() * static_cast<std::int64_t>(capacity);
}

std::int64_t PackingStrategy::padded_slots() const {
  std::int64_t total = 0;
  for (const StrategyEntry& e : entries) total += e.multiplicity * e.leftover;
  return total;
}

double padding_fraction(const PackingStrategy& strategy) {
  const std::int64_t slots = strategy.item_slots();
  if (slots == 0) return 0.0;
  return static_cast<double>(strategy.padded_slots()) / static_cast<double>(slots);
}

namespace {

struct OpenEntry {
  std::int64_t multiplicity;
  std::vector<int> sizes;
};

void check_fits(const SizeHistogram& histogram, int capacity) {
  if (capacity < 1) throw CapacityError("pack capacity must be positive, got " +
                                        std::to_string(capacity));
  histogram.validate();
  if (histogram.max_size() > capacity) {
    throw CapacityError("graph size " + std::to_string(histogram.max_size()) +
                        " exceeds pack capacity " + std::to_string(capacity));
  }
}

PackingStrategy flatten(std::vector<std::vector<OpenEntry>>& bins, int capacity) {
  PackingStrategy strategy;
  strategy.capacity = capacity;
  for (int leftover = 0; leftover <= capacity; ++leftover) {
    for (OpenEntry& open : bins[static_cast<std::size_t>(leftover)]) {
      strategy.entries.push_back(
          {open.multiplicity, std::move(open.sizes), leftover});
    }
  }
  return strategy;
}

}  // namespace

PackingStrategy lpfhp(const SizeHistogram& histogram, int capacity) {
  check_fits(histogram, capacity);
  // bins[r] holds the open pack groups with r item slots still free, used as
  // stacks: the most recently touched group sits on top.
  std::vector<std::vector<OpenEntry>> bins(static_cast<std::size_t>(capacity) + 1);
  for (int size = capacity; size >= 1; --size) {
    auto it = histogram.counts.find(size);
    if (it == histogram.counts.end()) continue;
    std::int64_t remaining = it->second;
    while (remaining > 0) {
      // Best fit: the least leftover space that still admits `size`.
      int fit = -1;
      for (int r = size; r <= capacity; ++r) {
        if (!bins[static_cast<std::size_t>(r)].empty()) {
          fit = r;
          break;
        }
      }
      if (fit < 0) {
        // Nothing fits: open a single new pack and rescan, so that further
        // graphs of this size can join it whenever 2 * size <= capacity.
        bins[static_cast<std::size_t>(capacity - size)].push_back({1, {size}});
        --remaining;
        continue;
      }
      auto& stack = bins[static_cast<std::size_t>(fit)];
      OpenEntry group = std::move(stack.back());
      stack.pop_back();
      if (remaining >= group.multiplicity) {
        // The whole group gains one graph of this size.
        remaining -= group.multiplicity;
        group.sizes.push_back(size);
        bins[static_cast<std::size_t>(fit - size)].push_back(std::move(group));
      } else {
        // Only part of the group is needed; the surplus stays where it was.
        stack.push_back({group.multiplicity - remaining, group.sizes});
        group.multiplicity = remaining;
        group.sizes.push_back(size);
        bins[static_cast<std::size_t>(fit - size)].push_back(std::move(group));
        remaining = 0;
      }
    }
  }
  return flatten(bins, capacity);
}

PackingStrategy naive_plan(const SizeHistogram& histogram, int capacity) {
  check_fits(histogram, capacity);
  std::vector<std::vector<OpenEntry>> bins(static_cast<std::size_t>(capacity) + 1);
  for (const auto& [size, count] : histogram.counts) {
    bins[static_cast<std::size_t>(capacity - size)].push_back({count, {size}});
  }
  return flatten(bins, capacity);
}

namespace {

struct BranchState {
  std::vector<int> sizes;       // items, largest first
  std::vector<int> free_space;  // per open pack
  int capacity = 0;
  std::int64_t best = 0;
};

void branch(BranchState& st, std::size_t item, std::int64_t open) {
  if (open >= st.best) return;  // cannot beat the incumbent
  if (item == st.sizes.size()) {
    st.best = open;
    return;
  }
  const int size = st.sizes[item];
  // Try each open pack, skipping packs with identical free space: placing
  // into either yields the same sub-problem.
  for (std::int64_t p = 0; p < open; ++p) {
    const int space = st.free_space[static_cast<std::size_t>(p)];
    if (space < size) continue;
    bool duplicate = false;
    for (std::int64_t q = 0; q < p; ++q) {
      if (st.free_space[static_cast<std::size_t>(q)] == space) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    st.free_space[static_cast<std::size_t>(p)] -= size;
    branch(st, item + 1, open);
    st.free_space[static_cast<std::size_t>(p)] += size;
  }
  // Or open a fresh pack.
  st.free_space[static_cast<std::size_t>(open)] = st.capacity - size;
  branch(st, item + 1, open + 1);
}

}  // namespace

std::int64_t exact_pack_count(const SizeHistogram& histogram, int capacity,
                              std::int64_t max_items) {
  check_fits(histogram, capacity);
  const std::int64_t n = histogram.total_graphs();
  if (n > max_items) {
    throw SizeError("exact_pack_count: " + std::to_string(n) + " graphs exceed the limit of " +
                    std::to_string(max_items));
  }
  if (n == 0) return 0;
  BranchState st;
  st.capacity = capacity;
  for (auto it = histogram.counts.rbegin(); it != histogram.counts.rend(); ++it) {
    for (std::int64_t k = 0; k < it->second; ++k) st.sizes.push_back(it->first);
  }
  st.free_space.assign(st.sizes.size(), 0);
  st.best = static_cast<std::int64_t>(st.sizes.size()) + 1;  // beatable upper bound
  branch(st, 0, 0);
  return st.best;
}

SizeHistogram synthetic_molecule_histogram(std::int64_t n_graphs, int max_size,
                                           double mean_size) {
  if (n_graphs < 1 || max_size <= 3 || mean_size <= 3.0 || mean_size >= max_size) {
    throw ConfigError("synthetic_molecule_histogram: need n_graphs >= 1 and 3 < mean < max");
  }
  const int trials = max_size - 3;
  const double p = (mean_size - 3.0) / static_cast<double>(trials);
  SizeHistogram h;
  // Binomial pmf over k = 0..trials via the multiplicative recurrence.
  double pmf = std::pow(1.0 - p, trials);  // k = 0
  for (int k = 0; k <= trials; ++k) {
    const auto count = static_cast<std::int64_t>(
        std::llround(static_cast<double>(n_graphs) * pmf));
    if (count > 0) h.counts[k + 3] = count;
    if (k < trials) {
      pmf *= (static_cast<double>(trials - k) / static_cast<double>(k + 1)) * (p / (1.0 - p));
    }
  }
  h.counts[max_size] = std::max<std::int64_t>(h.counts[max_size], 1);
  return h;
}

}  // namespace molpack

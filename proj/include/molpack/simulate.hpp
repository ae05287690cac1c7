#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "molpack/cost_model.hpp"
#include "molpack/error.hpp"
#include "molpack/matrix.hpp"

namespace molpack {

enum class PhaseKind { Exchange, Sync, Compute };

// One bulk-synchronous phase.  Exchange phases record, per tile, how many
// payload bytes arrived, split into dense data and index bytes; sync and
// compute phases move nothing.
struct SimPhase {
  PhaseKind kind = PhaseKind::Compute;
  std::vector<std::uint64_t> data_bytes_in;
  std::vector<std::uint64_t> index_bytes_in;
};

struct SimTrace {
  int tiles = 1;
  std::vector<SimPhase> phases;
};

namespace detail {

// Chunks [0, extent) into `parts` contiguous ranges whose lengths differ by
// at most one; the longer ranges come first.
inline std::vector<std::pair<std::int64_t, std::int64_t>> balanced_ranges(std::int64_t extent,
                                                                          int parts) {
  std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
  ranges.reserve(static_cast<std::size_t>(parts));
  const std::int64_t base = extent / parts;
  const std::int64_t bump = extent % parts;
  std::int64_t begin = 0;
  for (int p = 0; p < parts; ++p) {
    const std::int64_t len = base + (p < bump ? 1 : 0);
    ranges.emplace_back(begin, begin + len);
    begin += len;
  }
  return ranges;
}

inline void check_plan(std::int64_t index_count, std::int64_t table_rows, std::int64_t width,
                       const Divisors& d, const HardwareProfile& hw) {
  hw.validate();
  if (d.index_ways < 1 || d.row_ways < 1 || d.col_ways < 1) {
    throw ConfigError("simulate: axis splits must be positive");
  }
  if (static_cast<std::int64_t>(d.index_ways) * d.row_ways * d.col_ways > hw.num_tiles) {
    throw ConfigError("simulate: plan uses " + std::to_string(d.tiles()) + " tiles, machine has " +
                      std::to_string(hw.num_tiles));
  }
  if (d.index_ways > std::max<std::int64_t>(index_count, 1) || d.row_ways > table_rows ||
      d.col_ways > width) {
    throw ConfigError("simulate: axis split exceeds its extent (I=" +
                      std::to_string(index_count) + ", M=" + std::to_string(table_rows) +
                      ", N=" + std::to_string(width) + ")");
  }
}

}  // namespace detail

// Simulates a tile-partitioned gather under a bulk-synchronous schedule and
// returns the result together with the phase trace.  The index axis is split
// index_ways, the table rows row_ways and the columns col_ways; each tile
// builds the partial of its output block covered by its table rows, and a
// row-split plan appends an exchange+sync+compute round that redistributes
// and adds the partials (each tile reducing a balanced slice).  The result
// equals gather(table, indices) exactly: each output element is written by
// exactly one tile and summed with zeros.
template <typename T>
std::pair<Matrix<T>, SimTrace> simulate_gather(const Matrix<T>& table,
                                               std::span<const std::int32_t> indices,
                                               const Divisors& d, const HardwareProfile& hw) {
  const auto index_count = static_cast<std::int64_t>(indices.size());
  const auto table_rows = static_cast<std::int64_t>(table.rows());
  const auto width = static_cast<std::int64_t>(table.cols());
  detail::check_plan(index_count, table_rows, width, d, hw);

  const auto idx_ranges = detail::balanced_ranges(index_count, d.index_ways);
  const auto row_ranges = detail::balanced_ranges(table_rows, d.row_ways);
  const auto col_ranges = detail::balanced_ranges(width, d.col_ways);
  const int tiles = d.tiles();
  const auto tile_of = [&](int a, int b, int c) {
    return (a * d.row_ways + b) * d.col_ways + c;
  };

  SimTrace trace;
  trace.tiles = tiles;
  if (tiles > 1) {
    // Operands stream in: each tile gets its table block and its index slice.
    SimPhase in;
    in.kind = PhaseKind::Exchange;
    in.data_bytes_in.assign(static_cast<std::size_t>(tiles), 0);
    in.index_bytes_in.assign(static_cast<std::size_t>(tiles), 0);
    for (int a = 0; a < d.index_ways; ++a) {
      for (int b = 0; b < d.row_ways; ++b) {
        for (int c = 0; c < d.col_ways; ++c) {
          const auto t = static_cast<std::size_t>(tile_of(a, b, c));
          const auto rows = row_ranges[static_cast<std::size_t>(b)].second -
                            row_ranges[static_cast<std::size_t>(b)].first;
          const auto cols = col_ranges[static_cast<std::size_t>(c)].second -
                            col_ranges[static_cast<std::size_t>(c)].first;
          const auto idx = idx_ranges[static_cast<std::size_t>(a)].second -
                           idx_ranges[static_cast<std::size_t>(a)].first;
          in.data_bytes_in[t] = static_cast<std::uint64_t>(rows * cols * hw.bytes_per_data);
          in.index_bytes_in[t] = static_cast<std::uint64_t>(idx * hw.bytes_per_index);
        }
      }
    }
    trace.phases.push_back(std::move(in));
    trace.phases.push_back({PhaseKind::Sync, {}, {}});
  }

  // Local compute: every tile fills the rows it owns, zeros elsewhere.
  std::vector<Matrix<T>> partials(static_cast<std::size_t>(tiles));
  for (int a = 0; a < d.index_ways; ++a) {
    const auto [i0, i1] = idx_ranges[static_cast<std::size_t>(a)];
    for (int b = 0; b < d.row_ways; ++b) {
      const auto [m0, m1] = row_ranges[static_cast<std::size_t>(b)];
      for (int c = 0; c < d.col_ways; ++c) {
        const auto [n0, n1] = col_ranges[static_cast<std::size_t>(c)];
        Matrix<T> part(static_cast<std::size_t>(i1 - i0), static_cast<std::size_t>(n1 - n0));
        for (std::int64_t r = i0; r < i1; ++r) {
          const std::int32_t v = indices[static_cast<std::size_t>(r)];
          if (v < 0 || v >= table_rows) {
            throw BoundsError("simulate_gather: index " + std::to_string(v) + " at position " +
                              std::to_string(r) + " outside table with " +
                              std::to_string(table_rows) + " rows");
          }
          if (v < m0 || v >= m1) continue;
          for (std::int64_t n = n0; n < n1; ++n) {
            part(static_cast<std::size_t>(r - i0), static_cast<std::size_t>(n - n0)) =
                table(static_cast<std::size_t>(v), static_cast<std::size_t>(n));
          }
        }
        partials[static_cast<std::size_t>(tile_of(a, b, c))] = std::move(part);
      }
    }
  }
  trace.phases.push_back({PhaseKind::Compute, {}, {}});

  if (d.row_ways > 1) {
    // Partial outputs are redistributed element-balanced within each (a, c)
    // group and added; tile (a, b, c) reduces slice b.
    SimPhase red;
    red.kind = PhaseKind::Exchange;
    red.data_bytes_in.assign(static_cast<std::size_t>(tiles), 0);
    red.index_bytes_in.assign(static_cast<std::size_t>(tiles), 0);
    for (int a = 0; a < d.index_ways; ++a) {
      const auto [i0, i1] = idx_ranges[static_cast<std::size_t>(a)];
      for (int c = 0; c < d.col_ways; ++c) {
        const auto [n0, n1] = col_ranges[static_cast<std::size_t>(c)];
        const std::int64_t elems = (i1 - i0) * (n1 - n0);
        const auto slices = detail::balanced_ranges(elems, d.row_ways);
        for (int b = 0; b < d.row_ways; ++b) {
          const auto slice_len = slices[static_cast<std::size_t>(b)].second -
                                 slices[static_cast<std::size_t>(b)].first;
          red.data_bytes_in[static_cast<std::size_t>(tile_of(a, b, c))] =
              static_cast<std::uint64_t>(slice_len * (d.row_ways - 1) * hw.bytes_per_data);
        }
      }
    }
    trace.phases.push_back(std::move(red));
    trace.phases.push_back({PhaseKind::Sync, {}, {}});
    trace.phases.push_back({PhaseKind::Compute, {}, {}});
  }

  // Assemble: sum the row-split partials in ascending b (at most one term per
  // element is nonzero, the rest are exact zeros).
  Matrix<T> out(static_cast<std::size_t>(index_count), static_cast<std::size_t>(width));
  for (int a = 0; a < d.index_ways; ++a) {
    const auto [i0, i1] = idx_ranges[static_cast<std::size_t>(a)];
    for (int c = 0; c < d.col_ways; ++c) {
      const auto [n0, n1] = col_ranges[static_cast<std::size_t>(c)];
      for (int b = 0; b < d.row_ways; ++b) {
        const Matrix<T>& part = partials[static_cast<std::size_t>(tile_of(a, b, c))];
        for (std::int64_t r = i0; r < i1; ++r) {
          for (std::int64_t n = n0; n < n1; ++n) {
            out(static_cast<std::size_t>(r), static_cast<std::size_t>(n)) +=
                part(static_cast<std::size_t>(r - i0), static_cast<std::size_t>(n - n0));
          }
        }
      }
    }
  }
  return {std::move(out), std::move(trace)};
}

// Simulates a tile-partitioned scatter-add.  Tiles receive their slice of the
// update matrix and of the index vector (the destination block is resident on
// the first index slice's tiles and does not move), accumulate partial
// destination blocks in ascending update-row order, and an index-split plan
// appends an exchange+sync+compute round where each (row, col) group's
// partials are redistributed element-balanced and added onto the destination,
// ascending in the index split.  With an unsplit index axis every output
// element is accumulated in exactly the flat kernel's order (base first, then
// ascending update row), so the result equals scatter_add even on arbitrary
// floats; an index split regroups the additions per slice, which still gives
// exact results whenever the values are exactly representable sums (e.g.
// integer-valued data).
template <typename T>
std::pair<Matrix<T>, SimTrace> simulate_scatter(const Matrix<T>& base,
                                                std::span<const std::int32_t> indices,
                                                const Matrix<T>& values, const Divisors& d,
                                                const HardwareProfile& hw) {
  const auto index_count = static_cast<std::int64_t>(indices.size());
  const auto table_rows = static_cast<std::int64_t>(base.rows());
  const auto width = static_cast<std::int64_t>(base.cols());
  if (values.rows() != indices.size() || values.cols() != base.cols()) {
    throw ShapeError("simulate_scatter: value shape does not match indices/base");
  }
  detail::check_plan(index_count, table_rows, width, d, hw);

  const auto idx_ranges = detail::balanced_ranges(index_count, d.index_ways);
  const auto row_ranges = detail::balanced_ranges(table_rows, d.row_ways);
  const auto col_ranges = detail::balanced_ranges(width, d.col_ways);
  const int tiles = d.tiles();
  const auto tile_of = [&](int a, int b, int c) {
    return (a * d.row_ways + b) * d.col_ways + c;
  };

  SimTrace trace;
  trace.tiles = tiles;
  if (tiles > 1) {
    SimPhase in;
    in.kind = PhaseKind::Exchange;
    in.data_bytes_in.assign(static_cast<std::size_t>(tiles), 0);
    in.index_bytes_in.assign(static_cast<std::size_t>(tiles), 0);
    for (int a = 0; a < d.index_ways; ++a) {
      const auto idx = idx_ranges[static_cast<std::size_t>(a)].second -
                       idx_ranges[static_cast<std::size_t>(a)].first;
      for (int b = 0; b < d.row_ways; ++b) {
        for (int c = 0; c < d.col_ways; ++c) {
          const auto cols = col_ranges[static_cast<std::size_t>(c)].second -
                            col_ranges[static_cast<std::size_t>(c)].first;
          const auto t = static_cast<std::size_t>(tile_of(a, b, c));
          in.data_bytes_in[t] = static_cast<std::uint64_t>(idx * cols * hw.bytes_per_data);
          in.index_bytes_in[t] = static_cast<std::uint64_t>(idx * hw.bytes_per_index);
        }
      }
    }
    trace.phases.push_back(std::move(in));
    trace.phases.push_back({PhaseKind::Sync, {}, {}});
  }

  std::vector<Matrix<T>> partials(static_cast<std::size_t>(tiles));
  for (int a = 0; a < d.index_ways; ++a) {
    const auto [i0, i1] = idx_ranges[static_cast<std::size_t>(a)];
    for (int b = 0; b < d.row_ways; ++b) {
      const auto [m0, m1] = row_ranges[static_cast<std::size_t>(b)];
      for (int c = 0; c < d.col_ways; ++c) {
        const auto [n0, n1] = col_ranges[static_cast<std::size_t>(c)];
        Matrix<T> part(static_cast<std::size_t>(m1 - m0), static_cast<std::size_t>(n1 - n0));
        if (a == 0) {  // the destination block lives on the first index slice
          for (std::int64_t m = m0; m < m1; ++m) {
            for (std::int64_t n = n0; n < n1; ++n) {
              part(static_cast<std::size_t>(m - m0), static_cast<std::size_t>(n - n0)) =
                  base(static_cast<std::size_t>(m), static_cast<std::size_t>(n));
            }
          }
        }
        for (std::int64_t r = i0; r < i1; ++r) {
          const std::int32_t m = indices[static_cast<std::size_t>(r)];
          if (m < 0 || m >= table_rows) {
            throw BoundsError("simulate_scatter: index " + std::to_string(m) + " at position " +
                              std::to_string(r) + " outside base with " +
                              std::to_string(table_rows) + " rows");
          }
          if (m < m0 || m >= m1) continue;
          for (std::int64_t n = n0; n < n1; ++n) {
            part(static_cast<std::size_t>(m - m0), static_cast<std::size_t>(n - n0)) +=
                values(static_cast<std::size_t>(r), static_cast<std::size_t>(n));
          }
        }
        partials[static_cast<std::size_t>(tile_of(a, b, c))] = std::move(part);
      }
    }
  }
  trace.phases.push_back({PhaseKind::Compute, {}, {}});

  if (d.index_ways > 1) {
    SimPhase red;
    red.kind = PhaseKind::Exchange;
    red.data_bytes_in.assign(static_cast<std::size_t>(tiles), 0);
    red.index_bytes_in.assign(static_cast<std::size_t>(tiles), 0);
    for (int b = 0; b < d.row_ways; ++b) {
      const auto [m0, m1] = row_ranges[static_cast<std::size_t>(b)];
      for (int c = 0; c < d.col_ways; ++c) {
        const auto [n0, n1] = col_ranges[static_cast<std::size_t>(c)];
        const std::int64_t elems = (m1 - m0) * (n1 - n0);
        const auto slices = detail::balanced_ranges(elems, d.index_ways);
        for (int a = 0; a < d.index_ways; ++a) {
          const auto slice_len = slices[static_cast<std::size_t>(a)].second -
                                 slices[static_cast<std::size_t>(a)].first;
          red.data_bytes_in[static_cast<std::size_t>(tile_of(a, b, c))] =
              static_cast<std::uint64_t>(slice_len * (d.index_ways - 1) * hw.bytes_per_data);
        }
      }
    }
    trace.phases.push_back(std::move(red));
    trace.phases.push_back({PhaseKind::Sync, {}, {}});
    trace.phases.push_back({PhaseKind::Compute, {}, {}});
  }

  // partials in ascending index-split order (the first one carries the base).
  Matrix<T> out(base.rows(), base.cols());
  for (int b = 0; b < d.row_ways; ++b) {
    const auto [m0, m1] = row_ranges[static_cast<std::size_t>(b)];
    for (int c = 0; c < d.col_ways; ++c) {
      const auto [n0, n1] = col_ranges[static_cast<std::size_t>(c)];
      for (int a = 0; a < d.index_ways; ++a) {
        const Matrix<T>& part = partials[static_cast<std::size_t>(tile_of(a, b, c))];
        for (std::int64_t m = m0; m < m1; ++m) {
          for (std::int64_t n = n0; n < n1; ++n) {
            out(static_cast<std::size_t>(m), static_cast<std::size_t>(n)) +=
                part(static_cast<std::size_t>(m - m0), static_cast<std::size_t>(n - n0));
          }
        }
      }
    }
  }
  return {std::move(out), std::move(trace)};
}

}  // namespace molpack

#pragma once

#include <cstdint>
#include <string>

#include "molpack/hardware.hpp"

namespace molpack {

enum class OpKind { Gather, Scatter };

std::string to_string(OpKind kind);
OpKind op_kind_from_string(const std::string& name);

// Shape of one indexed operation.
//   Gather:  out[r] = table[index[r]]      index_count rows out of table_rows.
//   Scatter: out = table; out[index[r]] += values[r].
// `width` is the feature dimension shared by every operand row.
struct OpSpec {
  OpKind kind = OpKind::Gather;
  std::int64_t index_count = 0;  // rows of the index vector and of V
  std::int64_t table_rows = 0;   // rows of the dense table A
  std::int64_t width = 0;        // columns of A and V

  void validate() const;  // throws ConfigError unless all extents are positive
};

// How many ways each axis is split across tiles.  The identity plan (1,1,1)
// runs on a single tile.
struct Divisors {
  int index_ways = 1;
  int row_ways = 1;
  int col_ways = 1;

  int tiles() const { return index_ways * row_ways * col_ways; }
  bool operator==(const Divisors&) const = default;
};

// Per-tile extents under a plan: each axis is chunked into ceil(extent/ways)
// or smaller pieces, and the cost model prices the largest chunk.
struct TileShape {
  std::int64_t index_count = 0;
  std::int64_t table_rows = 0;
  std::int64_t width = 0;
};

TileShape tile_shape(const OpSpec& spec, const Divisors& divisors);

struct CostBreakdown {
  double exchange = 0.0;  // cycles moving operands to tiles
  double compute = 0.0;   // cycles producing per-tile partials
  double reduce = 0.0;    // cycles combining partials (0 when not needed)
  double total = 0.0;     // sum of the above
};

// Cycles to move `bytes` through one tile's exchange port.
double exchange_cycles(double bytes, const HardwareProfile& hw);

// Cycle cost of running `spec` under `divisors`; the reduce term appears for
// a gather when rows are split (partial tables produce partial outputs) and
// for a scatter when the index axis is split (each split accumulates its own
// partial of the destination).
CostBreakdown op_cost(const OpSpec& spec, const Divisors& divisors, const HardwareProfile& hw);

// Bytes a tile must hold at once: its table block, its index block and its
// index-shaped data block.
std::int64_t tile_working_set_bytes(const OpSpec& spec, const Divisors& divisors,
                                    const HardwareProfile& hw);

// A plan is feasible when each axis split is at most the axis extent, the
// tile product fits the machine and the working set fits tile SRAM.
bool plan_feasible(const OpSpec& spec, const Divisors& divisors, const HardwareProfile& hw);

}  // namespace molpack

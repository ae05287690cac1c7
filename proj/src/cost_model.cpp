#include "molpack/cost_model.hpp"

#include "molpack/error.hpp"

namespace molpack {
namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

// Vectorized indexed-copy cost: the output rows are striped over the W
// worker threads (W * ceil(rows_out / W) covers padding the last round), each
// round scans a scan_rows x scan_cols data block through the vector units,
// discounted by the share of the full table held locally (scan volume is
// proportional to the hit rate of local lookups).
double block_compute_cycles(std::int64_t rows_out, std::int64_t scan_rows,
                            std::int64_t scan_cols, std::int64_t table_rows,
                            const HardwareProfile& hw) {
  const double rounds = static_cast<double>(hw.worker_threads) *
                        static_cast<double>(ceil_div(rows_out, hw.worker_threads));
  return rounds * static_cast<double>(scan_cols) * static_cast<double>(scan_rows) *
         static_cast<double>(hw.bytes_per_data) /
         (static_cast<double>(table_rows) * static_cast<double>(hw.vector_width_bytes));
}

}  // namespace

std::string to_string(OpKind kind) {
  return kind == OpKind::Gather ? "gather" : "scatter";
}

OpKind op_kind_from_string(const std::string& name) {
  if (name == "gather") return OpKind::Gather;
  if (name == "scatter") return OpKind::Scatter;
  throw ConfigError("unknown op kind '" + name + "' (expected gather or scatter)");
}

void OpSpec::validate() const {
  if (index_count < 1 || table_rows < 1 || width < 1) {
    throw ConfigError("op spec extents must be positive (I=" + std::to_string(index_count) +
                      ", M=" + std::to_string(table_rows) + ", N=" + std::to_string(width) +
                      ")");
  }
}

TileShape tile_shape(const OpSpec& spec, const Divisors& divisors) {
  if (divisors.index_ways < 1 || divisors.row_ways < 1 || divisors.col_ways < 1) {
    throw ConfigError("axis splits must be positive");
  }
  TileShape shape;
  shape.index_count = ceil_div(spec.index_count, divisors.index_ways);
  shape.table_rows = ceil_div(spec.table_rows, divisors.row_ways);
  shape.width = ceil_div(spec.width, divisors.col_ways);
  return shape;
}

double exchange_cycles(double bytes, const HardwareProfile& hw) {
  return bytes / hw.exchange_bytes_per_cycle;
}

CostBreakdown op_cost(const OpSpec& spec, const Divisors& divisors, const HardwareProfile& hw) {
  spec.validate();
  hw.validate();
  const TileShape t = tile_shape(spec, divisors);
  const double data_bytes = static_cast<double>(hw.bytes_per_data);
  const double index_block = static_cast<double>(t.index_count) * hw.bytes_per_index;
  const double table_block =
      static_cast<double>(t.table_rows) * static_cast<double>(t.width) * data_bytes;
  const double out_block =
      static_cast<double>(t.index_count) * static_cast<double>(t.width) * data_bytes;

  CostBreakdown cost;
  if (spec.kind == OpKind::Gather) {
    // Tiles receive their table block and index block, pick their local rows,
    // and -- when the table rows are split -- exchange and add the partial
    // outputs.
    cost.exchange = exchange_cycles(table_block, hw) + exchange_cycles(index_block, hw);
    cost.compute =
        block_compute_cycles(t.index_count, t.table_rows, t.width, spec.table_rows, hw);
    if (divisors.row_ways > 1) {
      cost.reduce = exchange_cycles(out_block, hw) + out_block / hw.vector_width_bytes;
    }
  } else {
    // Tiles receive their slice of V and of the index, accumulate a partial
    // of the destination block, and -- when the index axis is split -- the
    // partial destination blocks are exchanged and added together.
    cost.exchange = exchange_cycles(out_block, hw) + exchange_cycles(index_block, hw);
    cost.compute =
        block_compute_cycles(t.table_rows, t.index_count, t.width, spec.table_rows, hw);
    if (divisors.index_ways > 1) {
      cost.reduce = exchange_cycles(table_block, hw) + table_block / hw.vector_width_bytes;
    }
  }
  cost.total = cost.exchange + cost.compute + cost.reduce;
  return cost;
}

std::int64_t tile_working_set_bytes(const OpSpec& spec, const Divisors& divisors,
                                    const HardwareProfile& hw) {
  const TileShape t = tile_shape(spec, divisors);
  return t.table_rows * t.width * hw.bytes_per_data + t.index_count * hw.bytes_per_index +
         t.index_count * t.width * hw.bytes_per_data;
}

bool plan_feasible(const OpSpec& spec, const Divisors& divisors, const HardwareProfile& hw) {
  if (divisors.index_ways < 1 || divisors.row_ways < 1 || divisors.col_ways < 1) return false;
  if (divisors.index_ways > spec.index_count || divisors.row_ways > spec.table_rows ||
      divisors.col_ways > spec.width) {
    return false;
  }
  if (static_cast<std::int64_t>(divisors.index_ways) * divisors.row_ways * divisors.col_ways >
      hw.num_tiles) {
    return false;
  }
  return tile_working_set_bytes(spec, divisors, hw) <= hw.sram_bytes_per_tile;
}

}  // namespace molpack

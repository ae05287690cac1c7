#include "molpack/plan_search.hpp"

#include <algorithm>

#include <json.hpp>

#include "molpack/error.hpp"

namespace molpack {

Plan plan_search(const OpSpec& spec, const HardwareProfile& hw) {
  spec.validate();
  hw.validate();
  const auto tiles = static_cast<std::int64_t>(hw.num_tiles);
  bool found = false;
  Plan best;

  const int max_index = static_cast<int>(std::min<std::int64_t>(spec.index_count, tiles));
  for (int pi = 1; pi <= max_index; ++pi) {
    const int max_row =
        static_cast<int>(std::min<std::int64_t>(spec.table_rows, tiles / pi));
    for (int pm = 1; pm <= max_row; ++pm) {
      const int max_col =
          static_cast<int>(std::min<std::int64_t>(spec.width, tiles / (static_cast<std::int64_t>(pi) * pm)));
      for (int pn = 1; pn <= max_col; ++pn) {
        const Divisors d{pi, pm, pn};
        if (!plan_feasible(spec, d, hw)) continue;
        const CostBreakdown cost = op_cost(spec, d, hw);
        // Strict improvement only: the loops visit divisors in ascending
        // lexicographic order, so ties keep the smallest triple.
        if (!found || cost.total < best.cost.total) {
          best = Plan{d, cost};
          found = true;
        }
      }
    }
  }
  if (!found) {
    throw InfeasibleError("no feasible plan: even the finest split of I=" +
                          std::to_string(spec.index_count) + ", M=" +
                          std::to_string(spec.table_rows) + ", N=" + std::to_string(spec.width) +
                          " overflows " + std::to_string(hw.sram_bytes_per_tile) +
                          " bytes of tile SRAM");
  }
  return best;
}

std::string plan_report_json(const OpSpec& spec, const Plan& plan, const HardwareProfile& hw) {
  nlohmann::json report = {
      {"kind", to_string(spec.kind)},
      {"shape", {{"I", spec.index_count}, {"M", spec.table_rows}, {"N", spec.width}}},
      {"plan",
       {{"P_I", plan.divisors.index_ways},
        {"P_M", plan.divisors.row_ways},
        {"P_N", plan.divisors.col_ways}}},
      {"cost",
       {{"exchange", plan.cost.exchange},
        {"compute", plan.cost.compute},
        {"reduce", plan.cost.reduce},
        {"total", plan.cost.total}}},
      {"profile", nlohmann::json::parse(profile_to_json_text(hw))},
  };
  return report.dump(2);
}

}  // namespace molpack

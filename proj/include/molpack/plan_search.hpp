#pragma once

#include <string>

#include "molpack/cost_model.hpp"

namespace molpack {

struct Plan {
  Divisors divisors;
  CostBreakdown cost;
};

// Exhaustively enumerates every feasible split of (index, rows, cols) over
// the machine and returns the cheapest under op_cost.  Ties resolve to the
// lexicographically smallest (index_ways, row_ways, col_ways).  Throws
// InfeasibleError when no split fits tile SRAM.
Plan plan_search(const OpSpec& spec, const HardwareProfile& hw);

// JSON report for one planned op, e.g.
//   {"kind": "gather", "shape": {"I":.., "M":.., "N":..},
//    "plan": {"P_I":.., "P_M":.., "P_N":..},
//    "cost": {"exchange":.., "compute":.., "reduce":.., "total":..},
//    "profile": {...}}
std::string plan_report_json(const OpSpec& spec, const Plan& plan, const HardwareProfile& hw);

}  // namespace molpack

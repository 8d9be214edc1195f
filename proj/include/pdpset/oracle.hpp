#pragma once

#include <vector>

#include "pdpset/instance.hpp"
#include "pdpset/plan.hpp"

namespace pdpset {

struct OracleLimits {
  int max_vehicles = 3;
  int max_requests = 4;
  int max_transfer_nodes = 25;
  double time_budget_seconds = 60.0;

  static OracleLimits pdp() { return {3, 4, 25, 60.0}; }
  static OracleLimits pdpset() { return {2, 3, 25, 60.0}; }
};

// Which routes the enumeration may return. `shortest_paths` is the plan
// evaluator's space, where a vehicle may pass a node more than once;
// `simple_paths` keeps only plans the MILP can represent.
enum class RouteSpace { shortest_paths, simple_paths };

struct OracleResult {
  Plan plan;
  CostBreakdown cost;
  long long explored = 0;  // complete solutions costed
  double seconds = 0.0;
};

// Optimal transfer-free plan by exhaustive enumeration. Throws
// Error{oracle_limit} when the instance exceeds the limits or the budget
// runs out.
OracleResult exact_pdp(const Instance& inst, const OracleLimits& lim = OracleLimits::pdp(),
                       RouteSpace space = RouteSpace::shortest_paths);

// Optimal plan with at most one transfer between the two vehicles, placed
// after each vehicle's last pickup. Falls back to exact_pdp for one vehicle.
OracleResult exact_pdpset(const Instance& inst, const OracleLimits& lim = OracleLimits::pdpset(),
                          RouteSpace space = RouteSpace::shortest_paths);

// Integer encoding used to break ties between equal-cost plans
// (lexicographically smallest wins).
std::vector<int> encode_plan(const Instance& inst, const Plan& plan);

}  // namespace pdpset

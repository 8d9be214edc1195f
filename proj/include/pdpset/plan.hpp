#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdpset/error.hpp"
#include "pdpset/instance.hpp"

namespace pdpset {

enum class EventKind { pickup, dropoff, transfer };

// One stop on a vehicle route. Requests and partners are instance indices,
// not ids.
struct Event {
  EventKind kind = EventKind::pickup;
  NodeId node = 1;
  int request = -1;
  int partner = -1;
  std::vector<int> out;  // requests handed to the partner
  std::vector<int> in;   // requests received from the partner

  static Event pickup(const Instance& inst, int r);
  static Event dropoff(const Instance& inst, int r);
  static Event transfer(NodeId node, int partner, std::vector<int> out, std::vector<int> in);

  bool operator==(const Event&) const = default;
};

struct Plan {
  std::vector<std::vector<Event>> routes;  // one per vehicle, instance order

  static Plan empty(const Instance& inst) {
    return Plan{std::vector<std::vector<Event>>(inst.vehicles.size())};
  }
  bool operator==(const Plan&) const = default;
};

struct Schedule {
  // Per vehicle, per event.
  std::vector<std::vector<double>> arrival;
  std::vector<std::vector<double>> dwell;
  // Passengers on board on the leg that ends at each event.
  std::vector<std::vector<int>> leg_load;
  // Passengers on board after the last event (should be zero).
  std::vector<int> final_load;
  std::vector<double> vehicle_distance;

  // Per request; -1 when the request was never picked up / dropped off.
  std::vector<int> pickup_vehicle;
  std::vector<double> pickup_time;
  std::vector<double> dropoff_time;
  std::vector<double> onboard_distance;
};

struct CostBreakdown {
  double vehicle_distance = 0.0;
  double customer_wait = 0.0;
  double customer_distance = 0.0;
  double transfer_time = 0.0;
  double total = 0.0;
};

nlohmann::json to_json(const CostBreakdown& cost);

// Deterministic schedule. Throws Error{structural} for unmatched or
// deadlocked transfers and Error{sync_window} for a dwell above d_max.
Schedule simulate(const Instance& inst, const Plan& plan);

CostBreakdown cost_breakdown(const Instance& inst, const Schedule& schedule);

// simulate + cost_breakdown.
CostBreakdown evaluate(const Instance& inst, const Plan& plan);

// Cost of one transfer-free route in isolation. Summed over vehicles this
// equals evaluate() for any plan without transfers.
CostBreakdown evaluate_route(const Instance& inst, int vehicle, std::span<const Event> route);

std::vector<Violation> check_feasible(const Instance& inst, const Plan& plan);

// Number of transfer operations (each counted once per vehicle pair) and
// the number of distinct vehicles that take part in at least one.
int transfer_count(const Plan& plan);
int vehicles_in_transfers(const Plan& plan);

nlohmann::json plan_to_json(const Instance& inst, const Plan& plan);
Plan plan_from_json(const Instance& inst, const nlohmann::json& doc);
Plan load_plan_file(const Instance& inst, const std::string& path);

}  // namespace pdpset

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdpset/error.hpp"
#include "pdpset/graph.hpp"

namespace pdpset {

struct Vehicle {
  int id = 0;
  NodeId origin = 1;
  // Physical end node; nullopt means the zero-cost dummy depot.
  std::optional<NodeId> destination;
  int capacity = 1;

  bool operator==(const Vehicle&) const = default;
};

struct Request {
  int id = 0;
  NodeId pickup = 1;
  NodeId dropoff = 2;
  int qty = 1;

  bool operator==(const Request&) const = default;
};

// Multipliers of vehicle distance, customer wait, customer travel distance
// and vehicle transfer dwell.
struct Weights {
  double alpha = 1.0;
  double beta = 1.0;
  double theta = 1.0;
  double delta = 1.0;

  bool operator==(const Weights&) const = default;
};

// What the beta term charges: time of pickup (default) or full journey time
// until dropoff.
enum class WaitMetric { pickup, journey };

struct Instance {
  std::shared_ptr<const GridNetwork> network;
  std::vector<Vehicle> vehicles;
  std::vector<Request> requests;
  Weights weights;
  double d_max = 0.0;
  double t_range = 0.0;
  WaitMetric wait_metric = WaitMetric::pickup;
  std::optional<std::uint64_t> seed;

  const GridNetwork& net() const { return *network; }
  int max_capacity() const;
  // Position of the vehicle / request with the given id, or -1.
  int vehicle_index(int id) const;
  int request_index(int id) const;
};

// Field-by-field equality; networks compare by dimensions.
bool same_instance(const Instance& a, const Instance& b);

struct GenerateParams {
  int rows = 5;
  int cols = 5;
  int vehicles = 2;
  int requests = 3;
  int capacity = 6;
  Weights weights;
  double d_max = 2.0;
  double t_range = 8.0;
  std::uint64_t seed = 1;
};

Instance generate_instance(const GenerateParams& params);

std::vector<Violation> validate_instance(const Instance& inst);

nlohmann::json save_instance(const Instance& inst);
Instance load_instance(const nlohmann::json& doc);

Instance load_instance_file(const std::string& path);
void save_instance_file(const Instance& inst, const std::string& path);

// The 5x5 two-vehicle, three-request walkthrough instance: vehicles at nodes
// 2 and 9 with capacity 3, requests 1->20, 7->19, 3->25, unit weights.
Instance illustrative_instance(double d_max = 2.0, double t_range = 8.0);

}  // namespace pdpset

#include "pdpset/instance.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace pdpset {

using nlohmann::json;

int Instance::max_capacity() const {
  int best = 0;
  for (const auto& v : vehicles) best = std::max(best, v.capacity);
  return best;
}

int Instance::vehicle_index(int id) const {
  for (std::size_t k = 0; k < vehicles.size(); ++k) {
    if (vehicles[k].id == id) return static_cast<int>(k);
  }
  return -1;
}

int Instance::request_index(int id) const {
  for (std::size_t r = 0; r < requests.size(); ++r) {
    if (requests[r].id == id) return static_cast<int>(r);
  }
  return -1;
}

bool same_instance(const Instance& a, const Instance& b) {
  return a.net().rows() == b.net().rows() && a.net().cols() == b.net().cols() &&
         a.vehicles == b.vehicles && a.requests == b.requests &&
         a.weights == b.weights && a.d_max == b.d_max && a.t_range == b.t_range &&
         a.wait_metric == b.wait_metric && a.seed == b.seed;
}

Instance generate_instance(const GenerateParams& p) {
  if (p.vehicles < 1 || p.requests < 1) {
    throw Error(ErrorCode::generation, "need at least one vehicle and one request");
  }
  if (p.capacity < 1) throw Error(ErrorCode::generation, "capacity must be >= 1");
  if (p.d_max < 0.0 || p.t_range < 0.0) {
    throw Error(ErrorCode::generation, "d_max and t_range must be >= 0");
  }
  std::shared_ptr<GridNetwork> net;
  try {
    net = build_grid(p.rows, p.cols);
  } catch (const Error& e) {
    throw Error(ErrorCode::generation, e.what());
  }

  Instance inst;
  inst.weights = p.weights;
  inst.d_max = p.d_max;
  inst.t_range = p.t_range;
  inst.seed = p.seed;

  std::mt19937_64 rng(p.seed);
  std::uniform_int_distribution<NodeId> node(1, net->node_count());
  for (int k = 0; k < p.vehicles; ++k) {
    inst.vehicles.push_back({k + 1, node(rng), std::nullopt, p.capacity});
  }
  for (int r = 0; r < p.requests; ++r) {
    const NodeId pick = node(rng);
    NodeId drop = node(rng);
    while (drop == pick) drop = node(rng);
    inst.requests.push_back({r + 1, pick, drop, 1});
  }
  inst.network = std::move(net);
  return inst;
}

std::vector<Violation> validate_instance(const Instance& inst) {
  std::vector<Violation> out;
  auto add = [&out](std::string code, std::string msg) {
    out.push_back({std::move(code), std::move(msg)});
  };
  if (!inst.network) {
    add("network", "network: missing");
    return out;
  }
  const GridNetwork& net = inst.net();
  if (inst.vehicles.empty()) add("vehicles", "vehicles: at least one vehicle required");
  if (inst.requests.empty()) add("requests", "requests: at least one request required");
  if (inst.d_max < 0.0) add("d_max", "d_max: must be >= 0");
  if (inst.t_range < 0.0) add("t_range", "t_range: must be >= 0");
  const Weights& w = inst.weights;
  if (w.alpha < 0.0 || w.beta < 0.0 || w.theta < 0.0 || w.delta < 0.0) {
    add("weights", "weights: all multipliers must be >= 0");
  }

  std::set<int> ids;
  for (std::size_t k = 0; k < inst.vehicles.size(); ++k) {
    const Vehicle& v = inst.vehicles[k];
    const std::string at = "vehicles[" + std::to_string(k) + "]";
    if (!ids.insert(v.id).second) add("duplicate-id", at + ".id: duplicate vehicle id");
    if (v.capacity < 1) add("capacity", at + ".capacity: must be >= 1");
    if (!net.valid(v.origin)) add("node", at + ".origin: invalid node");
    if (v.destination && !net.valid(*v.destination)) {
      add("node", at + ".destination: invalid node");
    }
  }

  ids.clear();
  const int max_cap = inst.max_capacity();
  for (std::size_t r = 0; r < inst.requests.size(); ++r) {
    const Request& q = inst.requests[r];
    const std::string at = "requests[" + std::to_string(r) + "]";
    if (!ids.insert(q.id).second) add("duplicate-id", at + ".id: duplicate request id");
    if (!net.valid(q.pickup)) add("node", at + ".pickup: invalid node");
    if (!net.valid(q.dropoff)) add("node", at + ".dropoff: invalid node");
    if (q.pickup == q.dropoff) add("same-location", at + ".dropoff: equals pickup");
    if (q.qty < 1) {
      add("qty", at + ".qty: must be >= 1");
    } else if (q.qty > max_cap) {
      add("unservable", at + ".qty: unservable request, " + std::to_string(q.qty) +
                            " passengers exceed every vehicle capacity (max " +
                            std::to_string(max_cap) + ")");
    }
  }
  return out;
}

json save_instance(const Instance& inst) {
  json doc;
  doc["grid"] = {{"rows", inst.net().rows()}, {"cols", inst.net().cols()}};
  doc["weights"] = {{"alpha", inst.weights.alpha},
                    {"beta", inst.weights.beta},
                    {"theta", inst.weights.theta},
                    {"delta", inst.weights.delta}};
  doc["d_max"] = inst.d_max;
  doc["t_range"] = inst.t_range;
  if (inst.wait_metric == WaitMetric::journey) doc["wait_metric"] = "journey";
  if (inst.seed) doc["seed"] = *inst.seed;
  doc["vehicles"] = json::array();
  for (const auto& v : inst.vehicles) {
    json jv = {{"id", v.id}, {"origin", v.origin}, {"capacity", v.capacity}};
    if (v.destination) jv["destination"] = *v.destination;
    doc["vehicles"].push_back(std::move(jv));
  }
  doc["requests"] = json::array();
  for (const auto& r : inst.requests) {
    doc["requests"].push_back(
        {{"id", r.id}, {"pickup", r.pickup}, {"dropoff", r.dropoff}, {"qty", r.qty}});
  }
  return doc;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::parse, path + ": " + what);
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) parse_fail(path, "expected object");
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(path + "/" + key, "missing required field");
  return *it;
}

long long as_int(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) {
    const double d = j.get<double>();
    if (d == static_cast<double>(static_cast<long long>(d))) return static_cast<long long>(d);
  }
  parse_fail(path, "expected integer");
}

double as_num(const json& j, const std::string& path) {
  if (!j.is_number()) parse_fail(path, "expected number");
  return j.get<double>();
}

int int_field(const json& obj, const std::string& key, const std::string& path) {
  return static_cast<int>(as_int(member(obj, key, path), path + "/" + key));
}

double num_field(const json& obj, const std::string& key, const std::string& path) {
  return as_num(member(obj, key, path), path + "/" + key);
}

NodeId node_field(const json& obj, const std::string& key, const std::string& path,
                  const GridNetwork& net) {
  const int v = int_field(obj, key, path);
  if (!net.valid(v)) {
    parse_fail(path + "/" + key,
               "node " + std::to_string(v) + " outside 1.." + std::to_string(net.node_count()));
  }
  return v;
}

}  // namespace

Instance load_instance(const json& doc) {
  if (!doc.is_object()) parse_fail("", "document must be an object");
  const json& grid = member(doc, "grid", "");
  const int rows = int_field(grid, "rows", "/grid");
  const int cols = int_field(grid, "cols", "/grid");
  std::shared_ptr<GridNetwork> net;
  try {
    net = build_grid(rows, cols);
  } catch (const Error& e) {
    parse_fail("/grid", e.what());
  }

  Instance inst;
  const json& w = member(doc, "weights", "");
  inst.weights.alpha = num_field(w, "alpha", "/weights");
  inst.weights.beta = num_field(w, "beta", "/weights");
  inst.weights.theta = num_field(w, "theta", "/weights");
  inst.weights.delta = num_field(w, "delta", "/weights");
  inst.d_max = num_field(doc, "d_max", "");
  inst.t_range = num_field(doc, "t_range", "");
  if (auto it = doc.find("wait_metric"); it != doc.end()) {
    if (*it == "pickup") {
      inst.wait_metric = WaitMetric::pickup;
    } else if (*it == "journey") {
      inst.wait_metric = WaitMetric::journey;
    } else {
      parse_fail("/wait_metric", "expected \"pickup\" or \"journey\"");
    }
  }
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) parse_fail("/seed", "expected non-negative integer");
    inst.seed = it->get<std::uint64_t>();
  }

  const json& vs = member(doc, "vehicles", "");
  if (!vs.is_array()) parse_fail("/vehicles", "expected array");
  if (vs.empty()) parse_fail("/vehicles", "must contain at least one vehicle");
  for (std::size_t k = 0; k < vs.size(); ++k) {
    const std::string at = "/vehicles/" + std::to_string(k);
    Vehicle v;
    v.id = int_field(vs[k], "id", at);
    v.origin = node_field(vs[k], "origin", at, *net);
    v.capacity = int_field(vs[k], "capacity", at);
    if (vs[k].contains("destination") && !vs[k]["destination"].is_null()) {
      v.destination = node_field(vs[k], "destination", at, *net);
    }
    inst.vehicles.push_back(v);
  }

  const json& rs = member(doc, "requests", "");
  if (!rs.is_array()) parse_fail("/requests", "expected array");
  if (rs.empty()) parse_fail("/requests", "must contain at least one request");
  for (std::size_t r = 0; r < rs.size(); ++r) {
    const std::string at = "/requests/" + std::to_string(r);
    Request q;
    q.id = int_field(rs[r], "id", at);
    q.pickup = node_field(rs[r], "pickup", at, *net);
    q.dropoff = node_field(rs[r], "dropoff", at, *net);
    q.qty = int_field(rs[r], "qty", at);
    inst.requests.push_back(q);
  }
  inst.network = std::move(net);
  return inst;
}

Instance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse, path + ": cannot open file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, path + ": " + e.what());
  }
  return load_instance(doc);
}

void save_instance_file(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::parse, path + ": cannot write file");
  out << save_instance(inst).dump(2) << '\n';
}

Instance illustrative_instance(double d_max, double t_range) {
  Instance inst;
  inst.network = build_grid(5, 5);
  inst.vehicles = {{1, 2, std::nullopt, 3}, {2, 9, std::nullopt, 3}};
  inst.requests = {{1, 1, 20, 1}, {2, 7, 19, 1}, {3, 3, 25, 1}};
  inst.d_max = d_max;
  inst.t_range = t_range;
  return inst;
}

}  // namespace pdpset

#include "pdpset/plan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>

namespace pdpset {

using nlohmann::json;

Event Event::pickup(const Instance& inst, int r) {
  Event e;
  e.kind = EventKind::pickup;
  e.node = inst.requests.at(r).pickup;
  e.request = r;
  return e;
}

Event Event::dropoff(const Instance& inst, int r) {
  Event e;
  e.kind = EventKind::dropoff;
  e.node = inst.requests.at(r).dropoff;
  e.request = r;
  return e;
}

Event Event::transfer(NodeId node, int partner, std::vector<int> out, std::vector<int> in) {
  Event e;
  e.kind = EventKind::transfer;
  e.node = node;
  e.partner = partner;
  std::sort(out.begin(), out.end());
  std::sort(in.begin(), in.end());
  e.out = std::move(out);
  e.in = std::move(in);
  return e;
}

json to_json(const CostBreakdown& c) {
  return {{"vehicle_distance", c.vehicle_distance},
          {"customer_wait", c.customer_wait},
          {"customer_distance", c.customer_distance},
          {"transfer_time", c.transfer_time},
          {"total", c.total}};
}

namespace {

constexpr double kTimeTol = 1e-9;

std::string vehicle_label(const Instance& inst, int k) {
  return "vehicle " + std::to_string(inst.vehicles[k].id);
}

std::string request_label(const Instance& inst, int r) {
  return "request " + std::to_string(inst.requests[r].id);
}

// Structural problems that prevent simulation at all.
std::vector<Violation> structural_issues(const Instance& inst, const Plan& plan) {
  std::vector<Violation> out;
  const int nk = static_cast<int>(inst.vehicles.size());
  const int nr = static_cast<int>(inst.requests.size());
  if (static_cast<int>(plan.routes.size()) != nk) {
    out.push_back({"structure", "plan has " + std::to_string(plan.routes.size()) +
                                    " routes for " + std::to_string(nk) + " vehicles"});
    return out;
  }
  auto valid_request = [nr](int r) { return r >= 0 && r < nr; };
  for (int k = 0; k < nk; ++k) {
    for (std::size_t e = 0; e < plan.routes[k].size(); ++e) {
      const Event& ev = plan.routes[k][e];
      const std::string at = vehicle_label(inst, k) + " event " + std::to_string(e);
      if (!inst.net().valid(ev.node)) {
        out.push_back({"structure", at + ": invalid node " + std::to_string(ev.node)});
        continue;
      }
      if (ev.kind == EventKind::transfer) {
        if (ev.partner < 0 || ev.partner >= nk || ev.partner == k) {
          out.push_back({"structure", at + ": invalid transfer partner"});
        }
        for (int r : ev.out) {
          if (!valid_request(r)) out.push_back({"structure", at + ": invalid request index"});
        }
        for (int r : ev.in) {
          if (!valid_request(r)) out.push_back({"structure", at + ": invalid request index"});
        }
        for (int r : ev.out) {
          if (std::find(ev.in.begin(), ev.in.end(), r) != ev.in.end()) {
            out.push_back({"structure", at + ": request in both outgoing and incoming sets"});
          }
        }
      } else if (!valid_request(ev.request)) {
        out.push_back({"structure", at + ": invalid request index"});
      }
    }
  }
  if (!out.empty()) return out;

  // Transfers between k and l must pair up in order, at the same node, with
  // mirrored request sets.
  for (int k = 0; k < nk; ++k) {
    for (int l = k + 1; l < nk; ++l) {
      std::vector<const Event*> a;
      std::vector<const Event*> b;
      for (const auto& ev : plan.routes[k]) {
        if (ev.kind == EventKind::transfer && ev.partner == l) a.push_back(&ev);
      }
      for (const auto& ev : plan.routes[l]) {
        if (ev.kind == EventKind::transfer && ev.partner == k) b.push_back(&ev);
      }
      const std::string pair = vehicle_label(inst, k) + " / " + vehicle_label(inst, l);
      if (a.size() != b.size()) {
        out.push_back({"unmatched-transfer", pair + ": transfer counts differ"});
        continue;
      }
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i]->node != b[i]->node) {
          out.push_back({"unmatched-transfer", pair + ": transfer " + std::to_string(i) +
                                                   " at different nodes"});
        }
        if (a[i]->out != b[i]->in || a[i]->in != b[i]->out) {
          out.push_back({"unmatched-transfer", pair + ": transfer " + std::to_string(i) +
                                                   " request sets not mirrored"});
        }
      }
    }
  }
  return out;
}

struct SimOutcome {
  Schedule schedule;
  std::vector<Violation> issues;
  bool sync_violation = false;
};

// Runs the plan; ordering, capacity and window problems are recorded rather
// than thrown so check_feasible can report all of them.
SimOutcome run(const Instance& inst, const Plan& plan) {
  if (auto issues = structural_issues(inst, plan); !issues.empty()) {
    throw Error(ErrorCode::structural, issues.front().message);
  }
  const GridNetwork& net = inst.net();
  const int nk = static_cast<int>(inst.vehicles.size());
  const int nr = static_cast<int>(inst.requests.size());

  SimOutcome res;
  Schedule& s = res.schedule;
  s.arrival.resize(nk);
  s.dwell.resize(nk);
  s.leg_load.resize(nk);
  s.final_load.assign(nk, 0);
  s.vehicle_distance.assign(nk, 0.0);
  s.pickup_vehicle.assign(nr, -1);
  s.pickup_time.assign(nr, -1.0);
  s.dropoff_time.assign(nr, -1.0);
  s.onboard_distance.assign(nr, 0.0);
  for (int k = 0; k < nk; ++k) {
    s.arrival[k].assign(plan.routes[k].size(), 0.0);
    s.dwell[k].assign(plan.routes[k].size(), 0.0);
    s.leg_load[k].assign(plan.routes[k].size(), 0);
  }

  // Which vehicle currently carries each request (-1: not on any vehicle).
  std::vector<int> carrier(nr, -1);
  std::vector<char> delivered(nr, 0);
  std::vector<std::size_t> pos(nk, 0);
  std::vector<double> clock(nk, 0.0);
  std::vector<NodeId> here(nk);
  std::vector<int> load(nk, 0);
  for (int k = 0; k < nk; ++k) here[k] = inst.vehicles[k].origin;

  auto issue = [&res](std::string code, std::string msg) {
    res.issues.push_back({std::move(code), std::move(msg)});
  };
  auto onboard = [&](int k) {
    std::vector<int> out;
    for (int r = 0; r < nr; ++r) {
      if (carrier[r] == k) out.push_back(r);
    }
    return out;
  };

  // Moves vehicle k to its next event location and returns the arrival time.
  auto arrive = [&](int k) {
    const Event& ev = plan.routes[k][pos[k]];
    const double t = net.shortest_time(here[k], ev.node);
    const double d = net.shortest_dist(here[k], ev.node);
    s.vehicle_distance[k] += d;
    for (int r : onboard(k)) s.onboard_distance[r] += d;
    s.leg_load[k][pos[k]] = load[k];
    here[k] = ev.node;
    s.arrival[k][pos[k]] = clock[k] + t;
    return clock[k] + t;
  };

  auto check_capacity = [&](int k, std::size_t e) {
    if (load[k] > inst.vehicles[k].capacity) {
      issue("capacity", vehicle_label(inst, k) + " event " + std::to_string(e) +
                            ": load " + std::to_string(load[k]) + " exceeds capacity " +
                            std::to_string(inst.vehicles[k].capacity));
    }
  };

  auto do_stop = [&](int k) {
    const std::size_t e = pos[k];
    const Event& ev = plan.routes[k][e];
    const double t = arrive(k);
    clock[k] = t;
    const int r = ev.request;
    const int q = inst.requests[r].qty;
    const std::string at = vehicle_label(inst, k) + " event " + std::to_string(e);
    if (ev.kind == EventKind::pickup) {
      if (ev.node != inst.requests[r].pickup) {
        issue("location", at + ": pickup of " + request_label(inst, r) + " away from its pickup node");
      }
      if (carrier[r] != -1 || delivered[r] || s.pickup_vehicle[r] != -1) {
        issue("onboard", at + ": " + request_label(inst, r) + " picked up twice");
      } else {
        carrier[r] = k;
        load[k] += q;
        s.pickup_vehicle[r] = k;
        s.pickup_time[r] = t;
      }
    } else {
      if (ev.node != inst.requests[r].dropoff) {
        issue("location", at + ": dropoff of " + request_label(inst, r) + " away from its dropoff node");
      }
      if (carrier[r] != k) {
        issue(s.pickup_vehicle[r] == -1 ? "precedence" : "onboard",
              at + ": " + request_label(inst, r) + " dropped off while not on board");
      } else {
        carrier[r] = -1;
        delivered[r] = 1;
        load[k] -= q;
        s.dropoff_time[r] = t;
      }
    }
    check_capacity(k, e);
    ++pos[k];
  };

  // Resolves the synchronized transfer at the current events of k and l.
  auto do_transfer = [&](int k, int l) {
    const std::size_t ek = pos[k];
    const std::size_t el = pos[l];
    const Event& a = plan.routes[k][ek];
    const double tk = arrive(k);
    const double tl = arrive(l);
    const double depart = std::max(tk, tl);
    s.dwell[k][ek] = depart - tk;
    s.dwell[l][el] = depart - tl;
    const double gap = std::abs(tk - tl);
    if (gap > inst.d_max + kTimeTol) {
      res.sync_violation = true;
      issue("sync-window", vehicle_label(inst, k) + " / " + vehicle_label(inst, l) +
                               ": transfer at node " + std::to_string(a.node) + " dwell " +
                               std::to_string(gap) + " exceeds d_max " +
                               std::to_string(inst.d_max));
    }
    const std::string at = vehicle_label(inst, k) + " event " + std::to_string(ek);
    for (int r : a.out) {
      if (carrier[r] != k) {
        issue("onboard", at + ": transfers " + request_label(inst, r) + " which is not on board");
      }
    }
    for (int r : a.in) {
      if (carrier[r] != l) {
        issue("onboard", vehicle_label(inst, l) + " event " + std::to_string(el) +
                             ": transfers " + request_label(inst, r) + " which is not on board");
      }
    }
    for (int r : a.out) {
      if (carrier[r] == k) {
        carrier[r] = l;
        load[k] -= inst.requests[r].qty;
        load[l] += inst.requests[r].qty;
      }
    }
    for (int r : a.in) {
      if (carrier[r] == l) {
        carrier[r] = k;
        load[l] -= inst.requests[r].qty;
        load[k] += inst.requests[r].qty;
      }
    }
    check_capacity(k, ek);
    check_capacity(l, el);
    clock[k] = depart;
    clock[l] = depart;
    ++pos[k];
    ++pos[l];
  };

  bool progress = true;
  while (progress) {
    progress = false;
    for (int k = 0; k < nk; ++k) {
      while (pos[k] < plan.routes[k].size()) {
        const Event& ev = plan.routes[k][pos[k]];
        if (ev.kind != EventKind::transfer) {
          do_stop(k);
          progress = true;
          continue;
        }
        const int l = ev.partner;
        if (pos[l] < plan.routes[l].size()) {
          const Event& other = plan.routes[l][pos[l]];
          if (other.kind == EventKind::transfer && other.partner == k) {
            do_transfer(k, l);
            progress = true;
            continue;
          }
        }
        break;
      }
    }
  }
  for (int k = 0; k < nk; ++k) {
    if (pos[k] < plan.routes[k].size()) {
      throw Error(ErrorCode::structural,
                  vehicle_label(inst, k) + ": transfer at event " + std::to_string(pos[k]) +
                      " can never synchronize (deadlock)");
    }
  }

  for (int k = 0; k < nk; ++k) {
    s.final_load[k] = load[k];
    if (const auto& dest = inst.vehicles[k].destination) {
      s.vehicle_distance[k] += net.shortest_dist(here[k], *dest);
    }
  }
  for (int r = 0; r < nr; ++r) {
    if (carrier[r] != -1) {
      issue("leftover", request_label(inst, r) + " still on board " +
                            vehicle_label(inst, carrier[r]) + " at route end");
    }
  }
  return res;
}

}  // namespace

Schedule simulate(const Instance& inst, const Plan& plan) {
  SimOutcome res = run(inst, plan);
  if (res.sync_violation) {
    for (const auto& v : res.issues) {
      if (v.code == "sync-window") throw Error(ErrorCode::sync_window, v.message);
    }
  }
  return std::move(res.schedule);
}

CostBreakdown cost_breakdown(const Instance& inst, const Schedule& s) {
  CostBreakdown c;
  for (double d : s.vehicle_distance) c.vehicle_distance += d;
  for (std::size_t r = 0; r < inst.requests.size(); ++r) {
    const double q = inst.requests[r].qty;
    const double t = inst.wait_metric == WaitMetric::pickup ? s.pickup_time[r] : s.dropoff_time[r];
    if (t >= 0.0) c.customer_wait += q * t;
    c.customer_distance += q * s.onboard_distance[r];
  }
  for (const auto& dw : s.dwell) {
    for (double d : dw) c.transfer_time += d;
  }
  const Weights& w = inst.weights;
  c.total = w.alpha * c.vehicle_distance + w.beta * c.customer_wait +
            w.theta * c.customer_distance + w.delta * c.transfer_time;
  return c;
}

CostBreakdown evaluate(const Instance& inst, const Plan& plan) {
  return cost_breakdown(inst, simulate(inst, plan));
}

CostBreakdown evaluate_route(const Instance& inst, int vehicle, std::span<const Event> route) {
  const GridNetwork& net = inst.net();
  const Vehicle& v = inst.vehicles[vehicle];
  CostBreakdown c;
  NodeId at = v.origin;
  double clock = 0.0;
  int load = 0;
  const bool journey = inst.wait_metric == WaitMetric::journey;
  for (const Event& ev : route) {
    const double d = net.shortest_dist(at, ev.node);
    c.vehicle_distance += d;
    c.customer_distance += d * load;
    clock += net.shortest_time(at, ev.node);
    at = ev.node;
    const int q = inst.requests[ev.request].qty;
    if (ev.kind == EventKind::pickup) {
      if (!journey) c.customer_wait += q * clock;
      load += q;
    } else {
      if (journey) c.customer_wait += q * clock;
      load -= q;
    }
  }
  if (v.destination) c.vehicle_distance += net.shortest_dist(at, *v.destination);
  const Weights& w = inst.weights;
  c.total = w.alpha * c.vehicle_distance + w.beta * c.customer_wait +
            w.theta * c.customer_distance;
  return c;
}

std::vector<Violation> check_feasible(const Instance& inst, const Plan& plan) {
  std::vector<Violation> out = structural_issues(inst, plan);
  if (!out.empty()) return out;

  const int nr = static_cast<int>(inst.requests.size());
  std::vector<int> pickups(nr, 0);
  std::vector<int> dropoffs(nr, 0);
  for (const auto& route : plan.routes) {
    for (const auto& ev : route) {
      if (ev.kind == EventKind::pickup) ++pickups[ev.request];
      if (ev.kind == EventKind::dropoff) ++dropoffs[ev.request];
    }
  }
  for (int r = 0; r < nr; ++r) {
    const std::string who = request_label(inst, r);
    if (pickups[r] == 0) out.push_back({"missing-pickup", who + ": never picked up (unserved)"});
    if (pickups[r] > 1) out.push_back({"duplicate-pickup", who + ": picked up more than once"});
    if (dropoffs[r] == 0) out.push_back({"missing-dropoff", who + ": never dropped off (unserved)"});
    if (dropoffs[r] > 1) out.push_back({"duplicate-dropoff", who + ": dropped off more than once"});
  }

  SimOutcome res;
  try {
    res = run(inst, plan);
  } catch (const Error& e) {
    out.push_back({"structure", e.what()});
    return out;
  }
  out.insert(out.end(), res.issues.begin(), res.issues.end());
  const Schedule& s = res.schedule;
  for (int r = 0; r < nr; ++r) {
    if (s.pickup_time[r] >= 0.0 && s.dropoff_time[r] >= 0.0 &&
        s.dropoff_time[r] + kTimeTol < s.pickup_time[r]) {
      out.push_back({"precedence", request_label(inst, r) + ": dropped off before pickup"});
    }
  }
  return out;
}

int transfer_count(const Plan& plan) {
  int n = 0;
  for (std::size_t k = 0; k < plan.routes.size(); ++k) {
    for (const auto& ev : plan.routes[k]) {
      if (ev.kind == EventKind::transfer && ev.partner > static_cast<int>(k)) ++n;
    }
  }
  return n;
}

int vehicles_in_transfers(const Plan& plan) {
  int n = 0;
  for (const auto& route : plan.routes) {
    if (std::any_of(route.begin(), route.end(),
                    [](const Event& e) { return e.kind == EventKind::transfer; })) {
      ++n;
    }
  }
  return n;
}

json plan_to_json(const Instance& inst, const Plan& plan) {
  json routes = json::array();
  for (std::size_t k = 0; k < plan.routes.size(); ++k) {
    json events = json::array();
    for (const auto& ev : plan.routes[k]) {
      json je;
      je["node"] = ev.node;
      if (ev.kind == EventKind::transfer) {
        je["kind"] = "transfer";
        je["partner"] = inst.vehicles[ev.partner].id;
        je["out"] = json::array();
        je["in"] = json::array();
        for (int r : ev.out) je["out"].push_back(inst.requests[r].id);
        for (int r : ev.in) je["in"].push_back(inst.requests[r].id);
      } else {
        je["kind"] = ev.kind == EventKind::pickup ? "pickup" : "dropoff";
        je["request"] = inst.requests[ev.request].id;
      }
      events.push_back(std::move(je));
    }
    routes.push_back({{"vehicle", inst.vehicles[k].id}, {"events", std::move(events)}});
  }
  return {{"routes", std::move(routes)}};
}

namespace {

[[noreturn]] void plan_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::parse, path + ": " + what);
}

int plan_int(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) plan_fail(path + "/" + key, "missing required field");
  if (!it->is_number_integer()) plan_fail(path + "/" + key, "expected integer");
  return it->get<int>();
}

std::vector<int> request_list(const Instance& inst, const json& obj, const char* key,
                              const std::string& path) {
  std::vector<int> out;
  auto it = obj.find(key);
  if (it == obj.end()) return out;
  if (!it->is_array()) plan_fail(path + "/" + key, "expected array");
  for (std::size_t i = 0; i < it->size(); ++i) {
    const std::string at = path + "/" + key + "/" + std::to_string(i);
    if (!(*it)[i].is_number_integer()) plan_fail(at, "expected integer");
    const int idx = inst.request_index((*it)[i].get<int>());
    if (idx < 0) plan_fail(at, "unknown request id");
    out.push_back(idx);
  }
  return out;
}

}  // namespace

Plan plan_from_json(const Instance& inst, const json& doc) {
  if (!doc.is_object()) plan_fail("", "document must be an object");
  auto it = doc.find("routes");
  if (it == doc.end()) plan_fail("/routes", "missing required field");
  if (!it->is_array()) plan_fail("/routes", "expected array");
  Plan plan = Plan::empty(inst);
  std::set<int> seen;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const std::string at = "/routes/" + std::to_string(i);
    const json& jr = (*it)[i];
    if (!jr.is_object()) plan_fail(at, "expected object");
    const int k = inst.vehicle_index(plan_int(jr, "vehicle", at));
    if (k < 0) plan_fail(at + "/vehicle", "unknown vehicle id");
    if (!seen.insert(k).second) plan_fail(at + "/vehicle", "duplicate route for vehicle");
    auto ev_it = jr.find("events");
    if (ev_it == jr.end()) plan_fail(at + "/events", "missing required field");
    if (!ev_it->is_array()) plan_fail(at + "/events", "expected array");
    for (std::size_t e = 0; e < ev_it->size(); ++e) {
      const std::string ep = at + "/events/" + std::to_string(e);
      const json& je = (*ev_it)[e];
      if (!je.is_object()) plan_fail(ep, "expected object");
      auto kind_it = je.find("kind");
      if (kind_it == je.end() || !kind_it->is_string()) {
        plan_fail(ep + "/kind", "expected \"pickup\", \"dropoff\" or \"transfer\"");
      }
      const std::string kind = kind_it->get<std::string>();
      Event ev;
      ev.node = plan_int(je, "node", ep);
      if (!inst.net().valid(ev.node)) plan_fail(ep + "/node", "invalid node");
      if (kind == "pickup" || kind == "dropoff") {
        ev.kind = kind == "pickup" ? EventKind::pickup : EventKind::dropoff;
        ev.request = inst.request_index(plan_int(je, "request", ep));
        if (ev.request < 0) plan_fail(ep + "/request", "unknown request id");
      } else if (kind == "transfer") {
        ev.kind = EventKind::transfer;
        ev.partner = inst.vehicle_index(plan_int(je, "partner", ep));
        if (ev.partner < 0) plan_fail(ep + "/partner", "unknown vehicle id");
        ev.out = request_list(inst, je, "out", ep);
        ev.in = request_list(inst, je, "in", ep);
        std::sort(ev.out.begin(), ev.out.end());
        std::sort(ev.in.begin(), ev.in.end());
      } else {
        plan_fail(ep + "/kind", "expected \"pickup\", \"dropoff\" or \"transfer\"");
      }
      plan.routes[k].push_back(std::move(ev));
    }
  }
  return plan;
}

Plan load_plan_file(const Instance& inst, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse, path + ": cannot open file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, path + ": " + e.what());
  }
  return plan_from_json(inst, doc);
}

}  // namespace pdpset

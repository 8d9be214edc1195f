#include "pdpset/oracle.hpp"

#include "pdpset/milp.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace pdpset {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTol = 1e-9;

using Clock = std::chrono::steady_clock;

class Budget {
 public:
  explicit Budget(double seconds) : start_(Clock::now()), seconds_(seconds) {}

  void tick() {
    if ((++calls_ & 1023) == 0 && elapsed() > seconds_) {
      throw Error(ErrorCode::oracle_limit,
                  "time budget of " + std::to_string(seconds_) + " s exhausted");
    }
  }
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  Clock::time_point start_;
  double seconds_;
  long long calls_ = 0;
};

void check_limit(const char* what, int have, int limit) {
  if (have > limit) {
    throw Error(ErrorCode::oracle_limit, std::string(what) + ": " + std::to_string(have) +
                                             " exceeds oracle limit " + std::to_string(limit));
  }
}

// Candidate comparison: cost first, then encoding.
bool better(double cost, const std::vector<int>& enc, double best,
            const std::vector<int>& best_enc) {
  if (cost < best - kTol) return true;
  if (cost > best + kTol) return false;
  return enc < best_enc;
}

std::vector<int> encode_route(const Instance& inst, const std::vector<Event>& route) {
  std::vector<int> out;
  for (const auto& ev : route) {
    switch (ev.kind) {
      case EventKind::pickup:
        out.insert(out.end(), {1, inst.requests[ev.request].id});
        break;
      case EventKind::dropoff:
        out.insert(out.end(), {2, inst.requests[ev.request].id});
        break;
      case EventKind::transfer:
        out.insert(out.end(), {3, ev.node, inst.vehicles[ev.partner].id});
        for (int r : ev.out) out.push_back(inst.requests[r].id);
        out.push_back(-1);
        for (int r : ev.in) out.push_back(inst.requests[r].id);
        out.push_back(-1);
        break;
    }
  }
  return out;
}

// Enumerates every precedence- and capacity-feasible ordering of the pickups
// and dropoffs of `mask`, calling `visit` on partial sequences whose pickups
// are complete (full orderings when `complete_only`).
void enumerate_orders(const Instance& inst, int k, unsigned mask, bool complete_only,
                      Budget& budget,
                      const std::function<void(const std::vector<Event>&, unsigned onboard)>& visit) {
  const int nr = static_cast<int>(inst.requests.size());
  const int cap = inst.vehicles[k].capacity;
  std::vector<Event> seq;
  std::function<void(unsigned, unsigned, int)> dfs = [&](unsigned picked, unsigned dropped,
                                                         int load) {
    budget.tick();
    const bool all_picked = picked == mask;
    if (all_picked && (!complete_only || dropped == mask)) visit(seq, picked & ~dropped);
    for (int r = 0; r < nr; ++r) {
      const unsigned bit = 1U << r;
      if (!(mask & bit)) continue;
      if (!(picked & bit)) {
        const int q = inst.requests[r].qty;
        if (load + q > cap) continue;
        seq.push_back(Event::pickup(inst, r));
        dfs(picked | bit, dropped, load + q);
        seq.pop_back();
      } else if (!(dropped & bit)) {
        seq.push_back(Event::dropoff(inst, r));
        dfs(picked, dropped | bit, load - inst.requests[r].qty);
        seq.pop_back();
      }
    }
  };
  dfs(0U, 0U, 0);
}

OracleResult finish(const Instance& inst, Plan plan, double expected, long long explored,
                    const Budget& budget) {
  OracleResult res;
  res.cost = evaluate(inst, plan);
  if (std::abs(res.cost.total - expected) > 1e-6) {
    throw std::logic_error("oracle cost mismatch: enumerated " + std::to_string(expected) +
                           ", evaluated " + std::to_string(res.cost.total));
  }
  res.plan = std::move(plan);
  res.explored = explored;
  res.seconds = budget.elapsed();
  return res;
}

}  // namespace

std::vector<int> encode_plan(const Instance& inst, const Plan& plan) {
  std::vector<int> out;
  for (const auto& route : plan.routes) {
    auto part = encode_route(inst, route);
    out.insert(out.end(), part.begin(), part.end());
    out.push_back(-2);
  }
  return out;
}

OracleResult exact_pdp(const Instance& inst, const OracleLimits& lim, RouteSpace space) {
  const int nk = static_cast<int>(inst.vehicles.size());
  const int nr = static_cast<int>(inst.requests.size());
  check_limit("vehicles", nk, lim.max_vehicles);
  check_limit("requests", nr, lim.max_requests);
  Budget budget(lim.time_budget_seconds);

  // Best single-vehicle route for every request subset.
  const unsigned subsets = 1U << nr;
  std::vector<std::vector<double>> best(nk, std::vector<double>(subsets, kInf));
  std::vector<std::vector<std::vector<Event>>> route(nk, std::vector<std::vector<Event>>(subsets));
  long long explored = 0;
  for (int k = 0; k < nk; ++k) {
    for (unsigned m = 0; m < subsets; ++m) {
      std::vector<int> best_enc;
      enumerate_orders(inst, k, m, true, budget, [&](const std::vector<Event>& seq, unsigned) {
        ++explored;
        if (space == RouteSpace::simple_paths && !milp::route_representable(inst, k, seq)) return;
        const double c = evaluate_route(inst, k, seq).total;
        const auto enc = encode_route(inst, seq);
        if (better(c, enc, best[k][m], best_enc)) {
          best[k][m] = c;
          best_enc = enc;
          route[k][m] = seq;
        }
      });
    }
  }

  // Every assignment of requests to vehicles.
  double total_best = kInf;
  std::vector<int> enc_best;
  Plan plan_best;
  long long combos = 1;
  for (int r = 0; r < nr; ++r) combos *= nk;
  for (long long c = 0; c < combos; ++c) {
    budget.tick();
    long long x = c;
    std::vector<unsigned> mask(nk, 0U);
    for (int r = 0; r < nr; ++r) {
      mask[x % nk] |= 1U << r;
      x /= nk;
    }
    double total = 0.0;
    for (int k = 0; k < nk; ++k) total += best[k][mask[k]];
    if (!std::isfinite(total) || total > total_best + kTol) continue;
    Plan p = Plan::empty(inst);
    for (int k = 0; k < nk; ++k) p.routes[k] = route[k][mask[k]];
    auto enc = encode_plan(inst, p);
    if (better(total, enc, total_best, enc_best)) {
      total_best = total;
      enc_best = std::move(enc);
      plan_best = std::move(p);
    }
  }
  if (!std::isfinite(total_best)) {
    throw Error(ErrorCode::construction, "no capacity-feasible plan exists");
  }
  return finish(inst, std::move(plan_best), total_best, explored, budget);
}

namespace {

struct Prefix {
  std::vector<Event> events;
  NodeId node;
  double time;
  double cost;  // weighted cost of the prefix, no final leg
  unsigned onboard;
};

Prefix cost_prefix(const Instance& inst, int k, const std::vector<Event>& seq, unsigned onboard) {
  const GridNetwork& net = inst.net();
  const Weights& w = inst.weights;
  Prefix p{seq, inst.vehicles[k].origin, 0.0, 0.0, onboard};
  int load = 0;
  for (const auto& ev : seq) {
    const double d = net.shortest_dist(p.node, ev.node);
    p.time += net.shortest_time(p.node, ev.node);
    p.cost += (w.alpha + w.theta * load) * d;
    p.node = ev.node;
    const int q = inst.requests[ev.request].qty;
    const bool charged = (ev.kind == EventKind::pickup) == (inst.wait_metric == WaitMetric::pickup);
    if (charged) p.cost += w.beta * q * p.time;
    load += ev.kind == EventKind::pickup ? q : -q;
  }
  return p;
}

// Cheapest permutation of drop-offs starting at `from` at time zero.
struct Tail {
  double cost = kInf;
  std::vector<int> order;
};

Tail best_tail(const Instance& inst, int k, NodeId from, unsigned set) {
  const GridNetwork& net = inst.net();
  const Weights& w = inst.weights;
  const bool journey = inst.wait_metric == WaitMetric::journey;
  std::vector<int> order;
  for (int r = 0; r < static_cast<int>(inst.requests.size()); ++r) {
    if (set >> r & 1U) order.push_back(r);
  }
  Tail best;
  do {
    int load = 0;
    for (int r : order) load += inst.requests[r].qty;
    double cost = 0.0, clock = 0.0;
    NodeId at = from;
    for (int r : order) {
      const NodeId to = inst.requests[r].dropoff;
      const double d = net.shortest_dist(at, to);
      clock += net.shortest_time(at, to);
      cost += (w.alpha + w.theta * load) * d;
      if (journey) cost += w.beta * inst.requests[r].qty * clock;
      load -= inst.requests[r].qty;
      at = to;
    }
    if (const auto& dest = inst.vehicles[k].destination) cost += w.alpha * net.shortest_dist(at, *dest);
    if (cost < best.cost - kTol) {
      best.cost = cost;
      best.order = order;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

}  // namespace

OracleResult exact_pdpset(const Instance& inst, const OracleLimits& lim, RouteSpace space) {
  const int nk = static_cast<int>(inst.vehicles.size());
  const int nr = static_cast<int>(inst.requests.size());
  check_limit("vehicles", nk, lim.max_vehicles);
  check_limit("requests", nr, lim.max_requests);
  check_limit("transfer nodes", inst.net().node_count(), lim.max_transfer_nodes);
  if (nk == 1) return exact_pdp(inst, lim, space);
  check_limit("vehicles", nk, 2);

  Budget budget(lim.time_budget_seconds);
  OracleResult base =
      exact_pdp(inst, {2, nr, lim.max_transfer_nodes, lim.time_budget_seconds}, space);
  double best = base.cost.total;
  Plan best_plan = base.plan;
  std::vector<int> best_enc = encode_plan(inst, best_plan);
  long long explored = base.explored;

  const GridNetwork& net = inst.net();
  const Weights& w = inst.weights;
  const int n = net.node_count();
  const bool journey = inst.wait_metric == WaitMetric::journey;
  const unsigned subsets = 1U << nr;
  auto load_of = [&](unsigned set) {
    int q = 0;
    for (int r = 0; r < nr; ++r) {
      if (set >> r & 1U) q += inst.requests[r].qty;
    }
    return q;
  };

  // Memoized best tails per (vehicle, node, set).
  std::vector<std::vector<Tail>> tails(2 * (n + 1));
  auto tail = [&](int k, NodeId x, unsigned set) -> const Tail& {
    auto& slot = tails[k * (n + 1) + x];
    if (slot.empty()) slot.resize(subsets);
    Tail& t = slot[set];
    if (!std::isfinite(t.cost)) t = best_tail(inst, k, x, set);
    return t;
  };

  for (unsigned assign = 0; assign < subsets; ++assign) {
    // Bit set: picked up by the second vehicle.
    const unsigned mine[2] = {(subsets - 1) & ~assign, assign};
    std::vector<Prefix> pre[2];
    for (int k = 0; k < 2; ++k) {
      enumerate_orders(inst, k, mine[k], false, budget,
                       [&](const std::vector<Event>& seq, unsigned onboard) {
                         pre[k].push_back(cost_prefix(inst, k, seq, onboard));
                       });
    }
    for (const Prefix& a : pre[0]) {
      for (const Prefix& b : pre[1]) {
        const unsigned uni = a.onboard | b.onboard;
        if (uni == 0) continue;
        for (NodeId x = 1; x <= n; ++x) {
          budget.tick();
          const double ta = a.time + net.shortest_time(a.node, x);
          const double tb = b.time + net.shortest_time(b.node, x);
          const double dwell = std::abs(ta - tb);
          if (dwell > inst.d_max + kTol) continue;
          const double t0 = std::max(ta, tb);
          const double legs =
              (w.alpha + w.theta * load_of(a.onboard)) * net.shortest_dist(a.node, x) +
              (w.alpha + w.theta * load_of(b.onboard)) * net.shortest_dist(b.node, x);
          // `on_b`: requests that leave the transfer on the second vehicle.
          for (unsigned on_b = 0; on_b < subsets; ++on_b) {
            if ((on_b & ~uni) != 0 || on_b == b.onboard) continue;
            const unsigned on_a = uni & ~on_b;
            if (load_of(on_a) > inst.vehicles[0].capacity) continue;
            if (load_of(on_b) > inst.vehicles[1].capacity) continue;
            ++explored;
            const Tail& ta_best = tail(0, x, on_a);
            const Tail& tb_best = tail(1, x, on_b);
            double cost = a.cost + b.cost + legs + w.delta * dwell + ta_best.cost + tb_best.cost;
            if (journey) cost += w.beta * (load_of(on_a) + load_of(on_b)) * t0;
            if (cost > best + kTol) continue;
            Plan p = Plan::empty(inst);
            p.routes[0] = a.events;
            p.routes[1] = b.events;
            p.routes[0].push_back(Event::transfer(x, 1, {}, {}));
            p.routes[1].push_back(Event::transfer(x, 0, {}, {}));
            for (int r = 0; r < nr; ++r) {
              if (a.onboard >> r & 1U && on_b >> r & 1U) {
                p.routes[0].back().out.push_back(r);
                p.routes[1].back().in.push_back(r);
              }
              if (b.onboard >> r & 1U && on_a >> r & 1U) {
                p.routes[1].back().out.push_back(r);
                p.routes[0].back().in.push_back(r);
              }
            }
            for (int r : ta_best.order) p.routes[0].push_back(Event::dropoff(inst, r));
            for (int r : tb_best.order) p.routes[1].push_back(Event::dropoff(inst, r));
            auto enc = encode_plan(inst, p);
            if (better(cost, enc, best, best_enc)) {
              if (space == RouteSpace::simple_paths && !milp::representable(inst, p)) continue;
              best = cost;
              best_enc = std::move(enc);
              best_plan = std::move(p);
            }
          }
        }
      }
    }
  }
  return finish(inst, std::move(best_plan), best, explored, budget);
}

}  // namespace pdpset

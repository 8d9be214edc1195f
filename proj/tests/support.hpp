#pragma once

// Helpers shared by the unit tests. Everything here is written without the
// library's own cost or path code so it can act as an independent oracle.

#include <algorithm>
#include <deque>
#include <random>
#include <vector>

#include "pdpset/heuristic.hpp"
#include "pdpset/instance.hpp"
#include "pdpset/plan.hpp"

namespace testing {

using namespace pdpset;

inline int manhattan(const GridNetwork& net, NodeId a, NodeId b) {
  return std::abs(net.row_of(a) - net.row_of(b)) + std::abs(net.col_of(a) - net.col_of(b));
}

// Hop distances by breadth-first search over the arc list.
inline std::vector<int> bfs(const GridNetwork& net, NodeId src) {
  std::vector<int> dist(net.node_count() + 1, -1);
  std::deque<NodeId> q{src};
  dist[src] = 0;
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop_front();
    for (const auto& a : net.arcs()) {
      if (a.from == u && dist[a.to] < 0) {
        dist[a.to] = dist[u] + 1;
        q.push_back(a.to);
      }
    }
  }
  return dist;
}

// Recomputes the four cost components by walking the plan in a simple
// discrete-event loop on Manhattan distances (unit grids only).
struct Recount {
  double vd = 0, wt = 0, td = 0, tt = 0;
  bool ok = true;
  int max_overload = 0;  // largest load above capacity seen
  double max_gap = 0;    // largest arrival difference at a transfer
};

inline Recount recount(const Instance& inst, const Plan& plan) {
  const GridNetwork& net = inst.net();
  const int nk = static_cast<int>(inst.vehicles.size());
  const int nr = static_cast<int>(inst.requests.size());
  Recount out;
  std::vector<std::size_t> pos(nk, 0);
  std::vector<double> t(nk, 0.0);
  std::vector<NodeId> at(nk);
  std::vector<std::vector<int>> aboard(nk);
  std::vector<int> picked(nr, 0), dropped(nr, 0);
  for (int k = 0; k < nk; ++k) at[k] = inst.vehicles[k].origin;
  auto load = [&](int k) {
    int q = 0;
    for (int r : aboard[k]) q += inst.requests[r].qty;
    return q;
  };
  auto move = [&](int k, NodeId to) {
    const int d = manhattan(net, at[k], to);
    out.vd += d;
    for (int r : aboard[k]) out.td += d * inst.requests[r].qty;
    t[k] += d;
    at[k] = to;
  };
  bool progress = true;
  while (progress) {
    progress = false;
    for (int k = 0; k < nk; ++k) {
      while (pos[k] < plan.routes[k].size()) {
        const Event& ev = plan.routes[k][pos[k]];
        if (ev.kind == EventKind::pickup) {
          move(k, ev.node);
          aboard[k].push_back(ev.request);
          ++picked[ev.request];
          if (inst.wait_metric == WaitMetric::pickup) out.wt += t[k] * inst.requests[ev.request].qty;
        } else if (ev.kind == EventKind::dropoff) {
          move(k, ev.node);
          std::erase(aboard[k], ev.request);
          ++dropped[ev.request];
          if (inst.wait_metric == WaitMetric::journey) out.wt += t[k] * inst.requests[ev.request].qty;
        } else {
          const int l = ev.partner;
          if (pos[l] >= plan.routes[l].size()) break;
          const Event& other = plan.routes[l][pos[l]];
          if (other.kind != EventKind::transfer || other.partner != k) break;
          move(k, ev.node);
          move(l, other.node);
          const double gap = std::abs(t[k] - t[l]);
          out.tt += gap;
          out.max_gap = std::max(out.max_gap, gap);
          t[k] = t[l] = std::max(t[k], t[l]);
          for (int r : ev.out) {
            std::erase(aboard[k], r);
            aboard[l].push_back(r);
          }
          for (int r : ev.in) {
            std::erase(aboard[l], r);
            aboard[k].push_back(r);
          }
          out.max_overload = std::max(out.max_overload, load(l) - inst.vehicles[l].capacity);
          ++pos[l];
        }
        out.max_overload = std::max(out.max_overload, load(k) - inst.vehicles[k].capacity);
        ++pos[k];
        progress = true;
      }
    }
  }
  for (int k = 0; k < nk; ++k) {
    if (pos[k] != plan.routes[k].size() || !aboard[k].empty()) out.ok = false;
  }
  for (int r = 0; r < nr; ++r) {
    if (picked[r] != 1 || dropped[r] != 1) out.ok = false;
  }
  return out;
}

// Random transfer-free plan: every request on a random vehicle, events in a
// random precedence-respecting order. Capacity is not enforced.
inline Plan random_plan(const Instance& inst, std::mt19937_64& rng) {
  const int nk = static_cast<int>(inst.vehicles.size());
  Plan plan = Plan::empty(inst);
  std::uniform_int_distribution<int> pick_vehicle(0, nk - 1);
  for (int r = 0; r < static_cast<int>(inst.requests.size()); ++r) {
    auto& route = plan.routes[pick_vehicle(rng)];
    std::uniform_int_distribution<std::size_t> p(0, route.size());
    const std::size_t i = p(rng);
    route.insert(route.begin() + i, Event::pickup(inst, r));
    std::uniform_int_distribution<std::size_t> d(i + 1, route.size());
    route.insert(route.begin() + d(rng), Event::dropoff(inst, r));
  }
  return plan;
}

// Adds one random transfer between two random vehicles after their last
// pickup; the result may violate capacity or the time window.
inline Plan random_transfer(const Instance& inst, const Plan& plan, std::mt19937_64& rng) {
  const int nk = static_cast<int>(inst.vehicles.size());
  if (nk < 2) return plan;
  std::uniform_int_distribution<int> vk(0, nk - 1);
  int k = vk(rng), l = vk(rng);
  while (l == k) l = vk(rng);
  if (k > l) std::swap(k, l);
  auto onboard_after_last_pickup = [&](int v) {
    std::vector<int> on, snapshot;
    for (const auto& ev : plan.routes[v]) {
      if (ev.kind == EventKind::pickup) on.push_back(ev.request);
      if (ev.kind == EventKind::dropoff) std::erase(on, ev.request);
      if (ev.kind == EventKind::pickup) snapshot = on;
    }
    return snapshot;
  };
  const auto on_k = onboard_after_last_pickup(k);
  const auto on_l = onboard_after_last_pickup(l);
  TransferCandidate c;
  c.k = k;
  c.l = l;
  std::uniform_int_distribution<NodeId> node(1, inst.net().node_count());
  c.node = node(rng);
  std::bernoulli_distribution coin(0.5);
  std::vector<int> end_k, end_l;
  for (int r : on_k) (coin(rng) ? c.k_to_l : end_k).push_back(r);
  for (int r : on_l) (coin(rng) ? c.l_to_k : end_l).push_back(r);
  c.seq_k = end_k;
  c.seq_k.insert(c.seq_k.end(), c.l_to_k.begin(), c.l_to_k.end());
  c.seq_l = end_l;
  c.seq_l.insert(c.seq_l.end(), c.k_to_l.begin(), c.k_to_l.end());
  std::shuffle(c.seq_k.begin(), c.seq_k.end(), rng);
  std::shuffle(c.seq_l.begin(), c.seq_l.end(), rng);
  return apply_transfer(inst, plan, c);
}

}  // namespace testing

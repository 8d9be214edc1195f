#include "pdpset/heuristic.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace pdpset {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-9;

bool capacity_ok(const Instance& inst, int k, const std::vector<Event>& route) {
  int load = 0;
  const int cap = inst.vehicles[k].capacity;
  for (const auto& ev : route) {
    load += ev.kind == EventKind::pickup ? inst.requests[ev.request].qty
                                         : -inst.requests[ev.request].qty;
    if (load > cap) return false;
  }
  return true;
}

double beta_journey(const Instance& inst) {
  return inst.wait_metric == WaitMetric::journey ? inst.weights.beta : 0.0;
}

double final_leg(const Instance& inst, int k, NodeId from) {
  const auto& dest = inst.vehicles[k].destination;
  return dest ? inst.weights.alpha * inst.net().shortest_dist(from, *dest) : 0.0;
}

}  // namespace

Plan phase1_construct(const Instance& inst) {
  const int nk = static_cast<int>(inst.vehicles.size());
  const int nr = static_cast<int>(inst.requests.size());
  const int max_cap = inst.max_capacity();
  for (const auto& q : inst.requests) {
    if (q.qty > max_cap) {
      throw Error(ErrorCode::construction,
                  "request " + std::to_string(q.id) + " is unservable: qty " +
                      std::to_string(q.qty) + " exceeds every vehicle capacity");
    }
  }

  // Requests are considered in id order so ties go to the lower id.
  std::vector<int> by_id(nr);
  for (int r = 0; r < nr; ++r) by_id[r] = r;
  std::sort(by_id.begin(), by_id.end(),
            [&](int a, int b) { return inst.requests[a].id < inst.requests[b].id; });
  std::vector<int> vk(nk);
  for (int k = 0; k < nk; ++k) vk[k] = k;
  std::sort(vk.begin(), vk.end(),
            [&](int a, int b) { return inst.vehicles[a].id < inst.vehicles[b].id; });

  Plan plan = Plan::empty(inst);
  std::vector<double> route_cost(nk);
  for (int k = 0; k < nk; ++k) route_cost[k] = evaluate_route(inst, k, plan.routes[k]).total;
  std::vector<char> assigned(nr, 0);

  std::vector<Event> trial;
  for (int step = 0; step < nr; ++step) {
    double best = kInf;
    int best_r = -1, best_k = -1;
    std::size_t best_i = 0, best_j = 0;
    for (int r : by_id) {
      if (assigned[r]) continue;
      const Event pick = Event::pickup(inst, r);
      const Event drop = Event::dropoff(inst, r);
      for (int k : vk) {
        if (inst.requests[r].qty > inst.vehicles[k].capacity) continue;
        const auto& route = plan.routes[k];
        const std::size_t len = route.size();
        for (std::size_t i = 0; i <= len; ++i) {
          for (std::size_t j = i + 1; j <= len + 1; ++j) {
            // New route: pickup at position i, dropoff at position j.
            trial.clear();
            trial.insert(trial.end(), route.begin(), route.begin() + i);
            trial.push_back(pick);
            trial.insert(trial.end(), route.begin() + i, route.begin() + (j - 1));
            trial.push_back(drop);
            trial.insert(trial.end(), route.begin() + (j - 1), route.end());
            if (!capacity_ok(inst, k, trial)) continue;
            const double delta = evaluate_route(inst, k, trial).total - route_cost[k];
            if (delta < best - kEps) {
              best = delta;
              best_r = r;
              best_k = k;
              best_i = i;
              best_j = j;
            }
          }
        }
      }
    }
    if (best_r < 0) {
      throw Error(ErrorCode::construction, "no capacity-feasible insertion remains");
    }
    auto& route = plan.routes[best_k];
    route.insert(route.begin() + best_i, Event::pickup(inst, best_r));
    route.insert(route.begin() + best_j, Event::dropoff(inst, best_r));
    route_cost[best_k] = evaluate_route(inst, best_k, route).total;
    assigned[best_r] = 1;
  }
  return plan;
}

double dropoff_tail_cost(const Instance& inst, const VehicleState& state,
                         const std::vector<int>& order) {
  const GridNetwork& net = inst.net();
  const Weights& w = inst.weights;
  const double bj = beta_journey(inst);
  int load = 0;
  for (int r : order) load += inst.requests[r].qty;
  double cost = 0.0;
  double clock = state.time;
  NodeId at = state.node;
  for (int r : order) {
    const NodeId to = inst.requests[r].dropoff;
    const double d = net.shortest_dist(at, to);
    clock += net.shortest_time(at, to);
    cost += w.alpha * d + w.theta * load * d + bj * inst.requests[r].qty * clock;
    load -= inst.requests[r].qty;
    at = to;
  }
  return cost + final_leg(inst, state.vehicle, at);
}

namespace {

// Exact cost-to-go over subsets of a fixed item list. For a subset S and a
// last-served item j outside S, g(S, j) is the cheapest way to serve S
// starting at j's dropoff node (time origin shifted to zero; the absolute
// start time enters only as load * start under the journey metric).
class TailTable {
 public:
  TailTable(const Instance& inst, int vehicle, std::vector<int> items, int exact_limit)
      : inst_(inst), vehicle_(vehicle), items_(std::move(items)), limit_(exact_limit) {
    const int u = static_cast<int>(items_.size());
    const std::size_t masks = std::size_t{1} << u;
    load_.assign(masks, 0);
    for (std::size_t m = 1; m < masks; ++m) {
      const int low = std::countr_zero(m);
      load_[m] = load_[m & (m - 1)] + inst.requests[items_[low]].qty;
    }
    g_.assign(masks * u, kInf);
    next_.assign(masks * u, -1);
    const GridNetwork& net = inst.net();
    const Weights& w = inst.weights;
    const double bj = beta_journey(inst);
    // Removing a bit makes the mask smaller, so an ascending sweep sees every
    // subproblem first.
    for (std::size_t m = 0; m < masks; ++m) {
      if (std::popcount(m) >= limit_) continue;
      for (int j = 0; j < u; ++j) {
        if (m >> j & 1U) continue;
        const NodeId from = drop(j);
        double& cell = g_[m * u + j];
        if (m == 0) {
          cell = final_leg(inst, vehicle_, from);
          continue;
        }
        const double lm = load_[m];
        for (int i = 0; i < u; ++i) {
          if (!(m >> i & 1U)) continue;
          const NodeId to = drop(i);
          const double c = (w.alpha + w.theta * lm) * net.shortest_dist(from, to) +
                           bj * lm * net.shortest_time(from, to) + g_[(m & ~(1U << i)) * u + i];
          if (c < cell - kEps) {
            cell = c;
            next_[m * u + j] = i;
          }
        }
      }
    }
  }

  // Cost of serving `mask` from node x leaving at time t0, and the order.
  double cost_from(NodeId x, std::size_t mask, double t0, std::vector<int>* order) const {
    const int u = static_cast<int>(items_.size());
    if (order) order->clear();
    if (mask == 0) return final_leg(inst_, vehicle_, x);
    if (std::popcount(mask) > limit_) {
      std::vector<int> reqs;
      for (int i = 0; i < u; ++i) {
        if (mask >> i & 1U) reqs.push_back(items_[i]);
      }
      DropoffSequence seq = cheapest_insertion_dropoffs(inst_, {vehicle_, x, t0}, reqs);
      if (order) *order = std::move(seq.order);
      return seq.cost;
    }
    const GridNetwork& net = inst_.net();
    const Weights& w = inst_.weights;
    const double bj = beta_journey(inst_);
    const double lm = load_[mask];
    double best = kInf;
    int first = -1;
    for (int i = 0; i < u; ++i) {
      if (!(mask >> i & 1U)) continue;
      const NodeId to = drop(i);
      const double c = (w.alpha + w.theta * lm) * net.shortest_dist(x, to) +
                       bj * lm * net.shortest_time(x, to) + g_[(mask & ~(1U << i)) * u + i];
      if (c < best - kEps) {
        best = c;
        first = i;
      }
    }
    if (order) {
      std::size_t m = mask;
      for (int j = first; j >= 0;) {
        order->push_back(items_[j]);
        m &= ~(std::size_t{1} << j);
        j = m == 0 ? -1 : next_[m * u + j];
      }
    }
    return best + bj * lm * t0;
  }

  int load(std::size_t mask) const { return load_[mask]; }

 private:
  NodeId drop(int i) const { return inst_.requests[items_[i]].dropoff; }

  const Instance& inst_;
  int vehicle_;
  std::vector<int> items_;
  int limit_;
  std::vector<int> load_;
  std::vector<double> g_;
  std::vector<int> next_;
};

// Largest onboard union enumerated per pair.
constexpr int kMaxUnion = 16;

struct Anchor {
  std::size_t prefix = 0;  // events kept before the transfer
  NodeId node = 1;
  double time = 0.0;
  std::vector<int> onboard;
  std::vector<int> tail;  // remaining (drop-off) events
};

Anchor anchor_of(const Instance& inst, const Plan& plan, const Schedule& sched, int k) {
  const auto& route = plan.routes[k];
  Anchor a;
  a.node = inst.vehicles[k].origin;
  std::vector<int> onboard;
  for (std::size_t e = 0; e < route.size(); ++e) {
    const Event& ev = route[e];
    if (ev.kind == EventKind::pickup) {
      onboard.push_back(ev.request);
    } else if (ev.kind == EventKind::dropoff) {
      std::erase(onboard, ev.request);
    } else {
      for (int r : ev.out) std::erase(onboard, r);
      onboard.insert(onboard.end(), ev.in.begin(), ev.in.end());
    }
    if (ev.kind != EventKind::dropoff) {
      a.prefix = e + 1;
      a.node = ev.node;
      a.time = sched.arrival[k][e] + sched.dwell[k][e];
      a.onboard = onboard;
    }
  }
  std::sort(a.onboard.begin(), a.onboard.end());
  for (std::size_t e = a.prefix; e < route.size(); ++e) a.tail.push_back(route[e].request);
  return a;
}

std::optional<TransferCandidate> best_for_pair(const Instance& inst, const Plan& plan,
                                               const Schedule& sched, double incumbent, int k,
                                               int l, const HeuristicOptions& opt) {
  if (k > l) std::swap(k, l);
  const GridNetwork& net = inst.net();
  const Weights& w = inst.weights;
  const Anchor ak = anchor_of(inst, plan, sched, k);
  const Anchor al = anchor_of(inst, plan, sched, l);

  std::vector<int> uni = ak.onboard;
  uni.insert(uni.end(), al.onboard.begin(), al.onboard.end());
  const int u = static_cast<int>(uni.size());
  if (u == 0 || u > kMaxUnion) return std::nullopt;
  const std::size_t masks = std::size_t{1} << u;
  const std::size_t all = masks - 1;
  // Bit set: request ends on l. Items from k come first in `uni`.
  const std::size_t identity = all & ~((std::size_t{1} << ak.onboard.size()) - 1);

  const TailTable tk(inst, k, uni, opt.exact_resequence_limit);
  const TailTable tl(inst, l, uni, opt.exact_resequence_limit);
  const int cap_k = inst.vehicles[k].capacity;
  const int cap_l = inst.vehicles[l].capacity;
  std::vector<std::size_t> arrangements;
  for (std::size_t m = 0; m < masks; ++m) {
    if (m == identity) continue;
    if (tl.load(m) > cap_l || tk.load(all & ~m) > cap_k) continue;
    arrangements.push_back(m);
  }
  if (arrangements.empty()) return std::nullopt;

  const double old_k = dropoff_tail_cost(inst, {k, ak.node, ak.time}, ak.tail);
  const double old_l = dropoff_tail_cost(inst, {l, al.node, al.time}, al.tail);
  const double base = incumbent - old_k - old_l;
  const int load_k = tk.load(all & ~identity);
  const int load_l = tl.load(identity);

  const auto near_k = net.nodes_within(ak.node, inst.t_range);
  const auto near_l = net.nodes_within(al.node, inst.t_range);
  std::vector<NodeId> common;
  std::set_intersection(near_k.begin(), near_k.end(), near_l.begin(), near_l.end(),
                        std::back_inserter(common));

  double best = kInf;
  NodeId best_node = 0;
  std::size_t best_mask = 0;
  double best_t0 = 0.0;
  for (NodeId x : common) {
    const double arr_k = ak.time + net.shortest_time(ak.node, x);
    const double arr_l = al.time + net.shortest_time(al.node, x);
    const double dwell = std::abs(arr_k - arr_l);
    if (dwell > inst.d_max + kEps) continue;
    const double t0 = std::max(arr_k, arr_l);
    const double dk = net.shortest_dist(ak.node, x);
    const double dl = net.shortest_dist(al.node, x);
    const double fixed = base + (w.alpha + w.theta * load_k) * dk +
                         (w.alpha + w.theta * load_l) * dl + w.delta * dwell;
    if (fixed >= best) continue;
    for (std::size_t m : arrangements) {
      const double c = fixed + tk.cost_from(x, all & ~m, t0, nullptr) + tl.cost_from(x, m, t0, nullptr);
      if (c < best - kEps) {
        best = c;
        best_node = x;
        best_mask = m;
        best_t0 = t0;
      }
    }
  }
  if (best_node == 0 || best >= incumbent - kEps) return std::nullopt;

  TransferCandidate cand;
  cand.k = k;
  cand.l = l;
  cand.node = best_node;
  for (int i = 0; i < u; ++i) {
    const bool on_l = best_mask >> i & 1U;
    const bool from_k = i < static_cast<int>(ak.onboard.size());
    if (from_k && on_l) cand.k_to_l.push_back(uni[i]);
    if (!from_k && !on_l) cand.l_to_k.push_back(uni[i]);
  }
  std::sort(cand.k_to_l.begin(), cand.k_to_l.end());
  std::sort(cand.l_to_k.begin(), cand.l_to_k.end());
  tk.cost_from(best_node, all & ~best_mask, best_t0, &cand.seq_k);
  tl.cost_from(best_node, best_mask, best_t0, &cand.seq_l);
  cand.arrival_k = ak.time + net.shortest_time(ak.node, best_node);
  cand.arrival_l = al.time + net.shortest_time(al.node, best_node);

  // Savings always come from a full re-evaluation of the modified plan.
  const Plan next = apply_transfer(inst, plan, cand);
  cand.total = evaluate(inst, next).total;
  cand.savings = incumbent - cand.total;
  if (cand.savings <= kEps) return std::nullopt;
  return cand;
}

}  // namespace

Plan apply_transfer(const Instance& inst, const Plan& plan, const TransferCandidate& cand) {
  const Schedule sched = simulate(inst, plan);
  Plan out = plan;
  auto rebuild = [&](int v, int partner, const std::vector<int>& give,
                     const std::vector<int>& take, const std::vector<int>& seq) {
    const Anchor a = anchor_of(inst, plan, sched, v);
    auto& route = out.routes[v];
    route.resize(a.prefix);
    route.push_back(Event::transfer(cand.node, partner, give, take));
    for (int r : seq) route.push_back(Event::dropoff(inst, r));
  };
  rebuild(cand.k, cand.l, cand.k_to_l, cand.l_to_k, cand.seq_k);
  rebuild(cand.l, cand.k, cand.l_to_k, cand.k_to_l, cand.seq_l);
  return out;
}

std::optional<TransferCandidate> best_transfer_for_pair(const Instance& inst, const Plan& plan,
                                                        int k, int l,
                                                        const HeuristicOptions& opt) {
  if (k == l) return std::nullopt;
  const Schedule sched = simulate(inst, plan);
  return best_for_pair(inst, plan, sched, cost_breakdown(inst, sched).total, k, l, opt);
}

Plan phase2_improve(const Instance& inst, const Plan& plan, const HeuristicOptions& opt) {
  const int nk = static_cast<int>(inst.vehicles.size());
  Plan current = plan;
  if (nk < 2) return current;
  std::vector<std::pair<int, int>> pairs;
  for (int k = 0; k < nk; ++k) {
    for (int l = k + 1; l < nk; ++l) pairs.emplace_back(k, l);
  }

  while (true) {
    const Schedule sched = simulate(inst, current);
    double incumbent = cost_breakdown(inst, sched).total;
    std::vector<std::optional<TransferCandidate>> found(pairs.size());
    auto work = [&](std::size_t p) {
      found[p] = best_for_pair(inst, current, sched, incumbent, pairs[p].first, pairs[p].second, opt);
    };
    const int threads = std::min<int>(opt.threads, static_cast<int>(pairs.size()));
    if (threads > 1) {
      std::atomic<std::size_t> next{0};
      std::vector<std::jthread> pool;
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
          for (std::size_t p = next++; p < pairs.size(); p = next++) work(p);
        });
      }
    } else {
      for (std::size_t p = 0; p < pairs.size(); ++p) work(p);
    }

    std::vector<TransferCandidate> cands;
    for (auto& c : found) {
      if (c) cands.push_back(std::move(*c));
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const TransferCandidate& a, const TransferCandidate& b) {
                       if (a.savings != b.savings) return a.savings > b.savings;
                       return std::pair(a.k, a.l) < std::pair(b.k, b.l);
                     });
    std::vector<char> used(nk, 0);
    bool accepted = false;
    for (const auto& c : cands) {
      if (used[c.k] || used[c.l]) continue;
      Plan next = apply_transfer(inst, current, c);
      const double total = evaluate(inst, next).total;
      if (total >= incumbent - kEps) continue;
      current = std::move(next);
      incumbent = total;
      used[c.k] = used[c.l] = 1;
      accepted = true;
    }
    if (!accepted || !opt.phase2_repeat) break;
  }
  return current;
}

DropoffSequence resequence_dropoffs(const Instance& inst, const VehicleState& state,
                                    const std::vector<int>& dropoffs, int exact_limit) {
  DropoffSequence out;
  if (dropoffs.empty()) {
    out.cost = final_leg(inst, state.vehicle, state.node);
    return out;
  }
  if (static_cast<int>(dropoffs.size()) > exact_limit ||
      static_cast<int>(dropoffs.size()) > kMaxUnion) {
    return cheapest_insertion_dropoffs(inst, state, dropoffs);
  }
  const TailTable table(inst, state.vehicle, dropoffs, exact_limit);
  const std::size_t all = (std::size_t{1} << dropoffs.size()) - 1;
  out.cost = table.cost_from(state.node, all, state.time, &out.order);
  return out;
}

DropoffSequence cheapest_insertion_dropoffs(const Instance& inst, const VehicleState& state,
                                            const std::vector<int>& dropoffs) {
  DropoffSequence out;
  std::vector<int> trial;
  for (int r : dropoffs) {
    double best = kInf;
    std::size_t best_pos = 0;
    for (std::size_t p = 0; p <= out.order.size(); ++p) {
      trial = out.order;
      trial.insert(trial.begin() + p, r);
      const double c = dropoff_tail_cost(inst, state, trial);
      if (c < best - kEps) {
        best = c;
        best_pos = p;
      }
    }
    out.order.insert(out.order.begin() + best_pos, r);
  }
  out.cost = dropoff_tail_cost(inst, state, out.order);
  return out;
}

SolveResult solve(const Instance& inst, const HeuristicOptions& opt, bool phase1_only) {
  using clock = std::chrono::steady_clock;
  SolveResult res;
  const auto t0 = clock::now();
  res.pdp_plan = phase1_construct(inst);
  const auto t1 = clock::now();
  res.phase1_seconds = std::chrono::duration<double>(t1 - t0).count();
  res.pdp_cost = evaluate(inst, res.pdp_plan);
  if (phase1_only) {
    res.pdpset_plan = res.pdp_plan;
    res.pdpset_cost = res.pdp_cost;
    return res;
  }
  const auto t2 = clock::now();
  res.pdpset_plan = phase2_improve(inst, res.pdp_plan, opt);
  res.phase2_seconds = std::chrono::duration<double>(clock::now() - t2).count();
  res.pdpset_cost = evaluate(inst, res.pdpset_plan);
  return res;
}

}  // namespace pdpset

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "pdpset/heuristic.hpp"
#include "support.hpp"

using namespace pdpset;

namespace {

// Weighted cost of dropping `order` from `state`, written out by hand:
// distance, onboard distance and (journey metric) arrival times.
double tail_oracle(const Instance& inst, const VehicleState& state, const std::vector<int>& order) {
  const Weights& w = inst.weights;
  int load = 0;
  for (int r : order) load += inst.requests[r].qty;
  NodeId at = state.node;
  double t = state.time;
  double cost = 0.0;
  for (int r : order) {
    const NodeId to = inst.requests[r].dropoff;
    const int d = testing::manhattan(inst.net(), at, to);
    cost += w.alpha * d + w.theta * load * d;
    t += d;
    if (inst.wait_metric == WaitMetric::journey) cost += w.beta * inst.requests[r].qty * t;
    load -= inst.requests[r].qty;
    at = to;
  }
  return cost;
}

double best_by_permutation(const Instance& inst, const VehicleState& state, std::vector<int> set) {
  std::sort(set.begin(), set.end());
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, tail_oracle(inst, state, set));
  } while (std::next_permutation(set.begin(), set.end()));
  return best;
}

std::vector<Instance> suite(double t_range = 8.0) {
  std::vector<Instance> out;
  for (int nr = 3; nr <= 6; ++nr) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      GenerateParams gp;
      gp.requests = nr;
      gp.seed = seed;
      gp.t_range = t_range;
      out.push_back(generate_instance(gp));
    }
  }
  return out;
}

int transfers_on(const std::vector<Event>& route) {
  return static_cast<int>(std::count_if(route.begin(), route.end(), [](const Event& e) {
    return e.kind == EventKind::transfer;
  }));
}

}  // namespace

TEST_CASE("walkthrough instance: 39 without transfers, 36 with one") {
  const Instance inst = illustrative_instance();
  const Plan p1 = phase1_construct(inst);
  CHECK(check_feasible(inst, p1).empty());
  const CostBreakdown c1 = evaluate(inst, p1);
  CHECK(c1.total == 39);
  CHECK(c1.vehicle_distance == 16);
  CHECK(c1.customer_wait == 6);
  CHECK(c1.customer_distance == 17);
  CHECK(c1.transfer_time == 0);
  // v1 serves r1 and r2, v2 serves r3.
  CHECK(p1.routes[0].size() == 4);
  CHECK(p1.routes[1].size() == 2);
  CHECK(p1.routes[1][0].request == 2);

  const Plan p2 = phase2_improve(inst, p1);
  CHECK(check_feasible(inst, p2).empty());
  const CostBreakdown c2 = evaluate(inst, p2);
  CHECK(c2.total == 36);
  CHECK(c2.vehicle_distance == 12);
  CHECK(c2.customer_wait == 6);
  CHECK(c2.customer_distance == 17);
  CHECK(c2.transfer_time == 1);
  CHECK(transfer_count(p2) == 1);
  bool moved_r3 = false;
  for (const auto& route : p2.routes) {
    for (const auto& ev : route) {
      if (ev.kind == EventKind::transfer && ev.out == std::vector<int>{2}) moved_r3 = true;
    }
  }
  CHECK(moved_r3);
}

TEST_CASE("best transfer for the walkthrough pair saves 3") {
  const Instance inst = illustrative_instance();
  const Plan p1 = phase1_construct(inst);
  const auto cand = best_transfer_for_pair(inst, p1, 0, 1);
  REQUIRE(cand.has_value());
  CHECK(cand->savings == doctest::Approx(3.0));
  CHECK(cand->total == doctest::Approx(36.0));
  CHECK(cand->node == 8);
  CHECK(cand->l_to_k == std::vector<int>{2});
  CHECK(cand->k_to_l.empty());
  CHECK(std::abs(cand->arrival_k - cand->arrival_l) <= inst.d_max);
  CHECK(evaluate(inst, apply_transfer(inst, p1, *cand)).total == doctest::Approx(36.0));
}

TEST_CASE("one vehicle already at the pickup") {
  Instance inst;
  inst.network = build_grid(4, 4);
  inst.vehicles = {{1, 6, std::nullopt, 2}};
  inst.requests = {{1, 6, 16, 1}};
  inst.weights = {1.5, 1.0, 2.0, 1.0};
  const Plan p = phase1_construct(inst);
  REQUIRE(p.routes[0].size() == 2);
  CHECK(p.routes[0][0].kind == EventKind::pickup);
  CHECK(p.routes[0][1].kind == EventKind::dropoff);
  CHECK(evaluate(inst, p).total == doctest::Approx((1.5 + 2.0) * 4));
  CHECK(phase2_improve(inst, p) == p);
}

TEST_CASE("unservable request stops construction") {
  Instance inst = illustrative_instance();
  inst.requests[1].qty = 4;
  try {
    phase1_construct(inst);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::construction);
  }
}

TEST_CASE("no candidate when anchors are too far apart") {
  Instance inst;
  inst.network = build_grid(20, 20);
  inst.vehicles = {{1, 1, std::nullopt, 3}, {2, 400, std::nullopt, 3}};
  inst.requests = {{1, 1, 2, 1}, {2, 400, 399, 1}};
  inst.d_max = 50.0;
  inst.t_range = 2.0;
  Plan p = Plan::empty(inst);
  p.routes[0] = {Event::pickup(inst, 0), Event::dropoff(inst, 0)};
  p.routes[1] = {Event::pickup(inst, 1), Event::dropoff(inst, 1)};
  CHECK_FALSE(best_transfer_for_pair(inst, p, 0, 1).has_value());
}

TEST_CASE("no candidate when arrivals can never match and no wait is allowed") {
  // Arrival-time parity differs at every node, so d_max = 0 rules out all.
  const Instance inst = illustrative_instance(0.0);
  const Plan p1 = phase1_construct(inst);
  CHECK_FALSE(best_transfer_for_pair(inst, p1, 0, 1).has_value());
  CHECK(phase2_improve(inst, p1) == p1);
}

TEST_CASE("resequencing drop-offs from node 8") {
  const Instance inst = illustrative_instance();
  const VehicleState state{0, 8, 4.0};
  const DropoffSequence empty = resequence_dropoffs(inst, state, {});
  CHECK(empty.order.empty());
  CHECK(empty.cost == 0.0);

  const DropoffSequence seq = resequence_dropoffs(inst, state, {0, 1, 2});
  std::vector<NodeId> nodes;
  for (int r : seq.order) nodes.push_back(inst.requests[r].dropoff);
  CHECK(nodes == std::vector<NodeId>{19, 20, 25});
  CHECK(seq.cost == doctest::Approx(best_by_permutation(inst, state, {0, 1, 2})));

  // Route 2 -> 1 -> 7 -> 8 then the tail: vehicle distance 9.
  std::vector<Event> route{Event::pickup(inst, 0), Event::pickup(inst, 1),
                           Event::transfer(8, 1, {}, {2})};
  for (int r : seq.order) route.push_back(Event::dropoff(inst, r));
  double vd = 0.0;
  NodeId at = inst.vehicles[0].origin;
  for (const auto& ev : route) {
    vd += testing::manhattan(inst.net(), at, ev.node);
    at = ev.node;
  }
  CHECK(vd == 9.0);
}

TEST_CASE("exact resequencing matches the permutation oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    GenerateParams gp;
    gp.rows = 6;
    gp.cols = 6;
    gp.requests = 1 + trial % 6;
    gp.seed = 3000 + trial;
    gp.weights = {1.0 + trial % 3, 0.5 + trial % 2, 0.25 + trial % 4, 1.0};
    Instance inst = generate_instance(gp);
    if (trial % 2) inst.wait_metric = WaitMetric::journey;
    std::uniform_int_distribution<NodeId> node(1, 36);
    const VehicleState state{0, node(rng), static_cast<double>(trial % 9)};
    std::vector<int> set(inst.requests.size());
    std::iota(set.begin(), set.end(), 0);
    const DropoffSequence seq = resequence_dropoffs(inst, state, set);
    const double best = best_by_permutation(inst, state, set);
    CHECK(seq.cost == doctest::Approx(best));
    CHECK(tail_oracle(inst, state, seq.order) == doctest::Approx(seq.cost));
    CHECK(dropoff_tail_cost(inst, state, seq.order) == doctest::Approx(seq.cost));
  }
}

TEST_CASE("cheapest insertion never beats the exact order at seven drop-offs") {
  for (int trial = 0; trial < 30; ++trial) {
    GenerateParams gp;
    gp.rows = 7;
    gp.cols = 7;
    gp.requests = 7;
    gp.capacity = 7;
    gp.seed = 4000 + trial;
    const Instance inst = generate_instance(gp);
    std::vector<int> set{0, 1, 2, 3, 4, 5, 6};
    const VehicleState state{0, inst.vehicles[0].origin, 0.0};
    const double exact = best_by_permutation(inst, state, set);
    const DropoffSequence ins = cheapest_insertion_dropoffs(inst, state, set);
    CHECK(ins.cost >= exact - 1e-9);
    CHECK(tail_oracle(inst, state, ins.order) == doctest::Approx(ins.cost));
    // Above the exact limit the resequencer falls back to insertion.
    CHECK(resequence_dropoffs(inst, state, set).order == ins.order);
    CHECK(resequence_dropoffs(inst, state, set, 7).cost == doctest::Approx(exact));
  }
}

TEST_CASE("Phase II never increases cost and keeps wait times") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    GenerateParams gp;
    gp.seed = seed;
    gp.vehicles = 2 + static_cast<int>(seed % 3);
    gp.requests = 3 + static_cast<int>(seed % 5);
    gp.capacity = 2 + static_cast<int>(seed % 4);
    gp.rows = gp.cols = 5 + static_cast<int>(seed % 3);
    const Instance inst = generate_instance(gp);
    const Plan p1 = phase1_construct(inst);
    REQUIRE(check_feasible(inst, p1).empty());
    for (bool repeat : {false, true}) {
      HeuristicOptions opt;
      opt.phase2_repeat = repeat;
      const Plan p2 = phase2_improve(inst, p1, opt);
      CHECK(check_feasible(inst, p2).empty());
      CHECK(evaluate(inst, p2).total <= evaluate(inst, p1).total + 1e-9);
      const Schedule s1 = simulate(inst, p1);
      const Schedule s2 = simulate(inst, p2);
      for (std::size_t r = 0; r < inst.requests.size(); ++r) {
        CHECK(s1.pickup_time[r] == s2.pickup_time[r]);
        CHECK(s1.pickup_vehicle[r] == s2.pickup_vehicle[r]);
      }
      if (!repeat) {
        for (const auto& route : p2.routes) CHECK(transfers_on(route) <= 1);
      }
    }
  }
}

TEST_CASE("repeated passes are at least as good as one") {
  for (const Instance& inst : suite()) {
    const Plan p1 = phase1_construct(inst);
    HeuristicOptions once;
    HeuristicOptions again;
    again.phase2_repeat = true;
    CHECK(evaluate(inst, phase2_improve(inst, p1, again)).total <=
          evaluate(inst, phase2_improve(inst, p1, once)).total + 1e-9);
  }
}

TEST_CASE("predicted totals match the evaluator") {
  for (const Instance& inst : suite()) {
    const Plan p1 = phase1_construct(inst);
    const double base = evaluate(inst, p1).total;
    if (auto c = best_transfer_for_pair(inst, p1, 0, 1)) {
      CHECK(c->savings > 0.0);
      CHECK(c->total == doctest::Approx(evaluate(inst, apply_transfer(inst, p1, *c)).total));
      CHECK(c->savings == doctest::Approx(base - c->total));
    }
  }
}

TEST_CASE("pair savings grow with the search radius") {
  const auto narrow = suite(2.0);
  const auto mid = suite(5.0);
  const auto wide = suite(8.0);
  for (std::size_t i = 0; i < wide.size(); ++i) {
    const Plan p1 = phase1_construct(wide[i]);
    auto savings = [&](const Instance& inst) {
      const auto c = best_transfer_for_pair(inst, p1, 0, 1);
      return c ? c->savings : 0.0;
    };
    const double s2 = savings(narrow[i]);
    const double s5 = savings(mid[i]);
    const double s8 = savings(wide[i]);
    CHECK(s8 >= s5 - 1e-9);
    CHECK(s5 >= s2 - 1e-9);
  }
}

TEST_CASE("serial and parallel runs agree and repeat exactly") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GenerateParams gp;
    gp.seed = seed;
    gp.vehicles = 5;
    gp.requests = 12;
    gp.rows = gp.cols = 12;
    gp.capacity = 4;
    const Instance inst = generate_instance(gp);
    HeuristicOptions serial;
    HeuristicOptions parallel;
    parallel.threads = 4;
    const SolveResult a = solve(inst, serial);
    const SolveResult b = solve(inst, serial);
    const SolveResult c = solve(inst, parallel);
    CHECK(a.pdp_plan == b.pdp_plan);
    CHECK(a.pdpset_plan == b.pdpset_plan);
    CHECK(a.pdpset_plan == c.pdpset_plan);
    CHECK(a.pdpset_cost.total == c.pdpset_cost.total);
  }
}

TEST_CASE("solve reports both phases") {
  const Instance inst = illustrative_instance();
  const SolveResult both = solve(inst);
  CHECK(both.pdp_cost.total == 39);
  CHECK(both.pdpset_cost.total == 36);
  CHECK(both.phase1_seconds >= 0.0);
  const SolveResult first = solve(inst, {}, true);
  CHECK(first.pdpset_plan == first.pdp_plan);
  CHECK(first.pdpset_cost.total == 39);
}

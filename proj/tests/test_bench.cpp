#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pdpset/bench.hpp"

using namespace pdpset;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') {
        quoted = !quoted;
      } else if (c == ',' && !quoted) {
        cells.push_back(cell);
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

ScenarioSpec s1() {
  ScenarioSpec spec;
  spec.name = "S1";
  spec.params.requests = 3;
  return spec;
}

}  // namespace

TEST_CASE("method names round trip") {
  for (Method m : {Method::ha_pdp, Method::ha_pdpset, Method::oracle_pdp, Method::oracle_pdpset}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("simplex"), Error);
}

TEST_CASE("comparison CSV has the fixed column set") {
  const std::string header =
      "instance,seed,method_a,method_b,a_total,b_total,ratio,a_vd,a_wt,a_td,a_tt,b_vd,b_wt,b_td,"
      "b_tt,a_seconds,b_seconds,phase1_seconds,phase2_seconds,transfers,vehicles_in_transfers,"
      "error";
  const ComparisonReport rep = run_scenario(s1());
  const std::string csv = rep.to_csv();
  CHECK(csv.substr(0, csv.find('\n')) == header);

  const auto table = parse_csv(csv);
  REQUIRE(table.size() == 1 + 5 + 2);
  for (const auto& row : table) CHECK(row.size() == 22);
  CHECK(table[6][0] == "avg");
  CHECK(table[7][0] == "std");
  for (int i = 1; i <= 5; ++i) {
    CHECK(table[i][0] == std::to_string(i));
    CHECK(table[i][1] == std::to_string(i));
    CHECK(table[i][2] == "ha_pdp");
    CHECK(table[i][3] == "ha_pdpset");
    CHECK(table[i][21].empty());
  }
}

TEST_CASE("aggregate rows recompute from the data rows") {
  const ComparisonReport rep = run_scenario(s1());
  const auto table = parse_csv(rep.to_csv());
  const auto& cols = table[0];
  for (std::size_t c = 4; c + 1 < cols.size(); ++c) {
    if (cols[c].find("seconds") != std::string::npos) continue;
    std::vector<double> xs;
    for (int i = 1; i <= 5; ++i) {
      if (!table[i][c].empty()) xs.push_back(std::stod(table[i][c]));
    }
    REQUIRE(xs.size() == 5);
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / xs.size());
    INFO("column " << cols[c]);
    const double tol = cols[c] == "ratio" ? 1e-6 : 1e-8;
    CHECK(std::stod(table[6][c]) == doctest::Approx(mean).epsilon(tol));
    CHECK(std::stod(table[7][c]) == doctest::Approx(sd).epsilon(tol).scale(1.0));
  }
}

TEST_CASE("row totals are the weighted component sums") {
  ScenarioSpec spec = s1();
  spec.params.weights = {1.5, 0.5, 2.0, 3.0};
  const ComparisonReport rep = run_scenario(spec);
  const Weights& w = spec.params.weights;
  for (const auto& row : rep.rows) {
    REQUIRE(row.a.has_value());
    REQUIRE(row.b.has_value());
    for (const MethodRun* run : {&*row.a, &*row.b}) {
      const CostBreakdown& c = run->cost;
      CHECK(c.total == doctest::Approx(w.alpha * c.vehicle_distance + w.beta * c.customer_wait +
                                       w.theta * c.customer_distance + w.delta * c.transfer_time));
    }
    CHECK(*row.ratio() == doctest::Approx((row.b->cost.total - row.a->cost.total) /
                                          row.a->cost.total));
  }
}

TEST_CASE("transfers never make the heuristic worse across the four scenarios") {
  int rows = 0;
  for (int nr = 3; nr <= 6; ++nr) {
    ScenarioSpec spec;
    spec.params.requests = nr;
    const ComparisonReport rep = run_scenario(spec);
    for (const auto& row : rep.rows) {
      ++rows;
      CHECK(row.error.empty());
      CHECK(row.b->cost.total <= row.a->cost.total + 1e-9);
      CHECK(row.b->cost.customer_wait == row.a->cost.customer_wait);
      CHECK(row.b->vehicles_in_transfers == 2 * row.b->transfers);
    }
  }
  CHECK(rows == 20);
}

TEST_CASE("single-method report leaves comparison columns empty") {
  ScenarioSpec spec = s1();
  spec.method_b.reset();
  const ComparisonReport rep = run_scenario(spec);
  const auto table = parse_csv(rep.to_csv());
  const auto& cols = table[0];
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] == "ratio" || cols[c].rfind("b_", 0) == 0 || cols[c] == "method_b") {
      for (std::size_t i = 1; i < table.size(); ++i) CHECK(table[i][c].empty());
    }
  }
  CHECK_FALSE(rep.aggregate("ratio").has_value());
  CHECK(rep.aggregate("a_total").has_value());
  const std::string comp = rep.component_csv();
  CHECK(comp.substr(0, comp.find('\n')) == "instance,seed,method,vd,wt,td,tt,total");
  CHECK(std::count(comp.begin(), comp.end(), '\n') == 6);
}

TEST_CASE("oracle methods and errors are reported per row") {
  ScenarioSpec spec = s1();
  spec.method_a = Method::oracle_pdp;
  spec.method_b = Method::oracle_pdpset;
  spec.seeds = {1, 2};
  const ComparisonReport ok = run_scenario(spec);
  for (const auto& row : ok.rows) {
    CHECK(row.error.empty());
    CHECK(row.b->cost.total <= row.a->cost.total);
  }

  spec.params.requests = 5;
  const ComparisonReport bad = run_scenario(spec);
  REQUIRE(bad.rows.size() == 2);
  for (const auto& row : bad.rows) CHECK(row.error.find("exceeds oracle limit") != std::string::npos);
  CHECK(bad.to_json()["rows"][0].contains("error"));
}

TEST_CASE("reports repeat exactly, serial or parallel") {
  ScenarioSpec spec;
  spec.params.requests = 6;
  spec.seeds = {1, 2, 3, 4, 5, 6, 7, 8};
  const ComparisonReport a = run_scenario(spec);
  spec.threads = 4;
  const ComparisonReport b = run_scenario(spec);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].seed == b.rows[i].seed);
    CHECK(a.rows[i].a->cost.total == b.rows[i].a->cost.total);
    CHECK(a.rows[i].b->cost.total == b.rows[i].b->cost.total);
    CHECK(a.rows[i].b->transfers == b.rows[i].b->transfers);
  }
  const auto j = a.to_json();
  CHECK(j["rows"].size() == 8);
  CHECK(j["aggregate"].contains("ratio"));
}

TEST_CASE("scaling sweep reports every grid and seed") {
  GenerateParams base;
  base.vehicles = 4;
  base.requests = 8;
  const ScalingReport rep = run_scaling({5, 10, 20}, base, {1, 2});
  CHECK(rep.rows.size() == 6);
  for (const auto& r : rep.rows) {
    CHECK(r.error.empty());
    CHECK(r.pdpset_total <= r.pdp_total + 1e-9);
  }
  const auto means = rep.mean_seconds_by_grid();
  REQUIRE(means.size() == 3);
  CHECK(means[0].first == 5);
  CHECK(means[2].first == 20);
  const std::string csv = rep.to_csv();
  CHECK(csv.substr(0, csv.find('\n')) ==
        "grid,seed,phase1_seconds,phase2_seconds,total_seconds,pdp_total,pdpset_total,transfers,"
        "vehicles_in_transfers,error");
}

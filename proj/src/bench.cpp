#include "pdpset/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

#include "pdpset/oracle.hpp"

namespace pdpset {

using nlohmann::json;

const char* method_name(Method m) {
  switch (m) {
    case Method::ha_pdp: return "ha_pdp";
    case Method::ha_pdpset: return "ha_pdpset";
    case Method::oracle_pdp: return "oracle_pdp";
    case Method::oracle_pdpset: return "oracle_pdpset";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::ha_pdp, Method::ha_pdpset, Method::oracle_pdp, Method::oracle_pdpset}) {
    if (name == method_name(m)) return m;
  }
  throw Error(ErrorCode::parse, "unknown method '" + name +
                                    "' (expected ha_pdp, ha_pdpset, oracle_pdp or oracle_pdpset)");
}

std::optional<double> ReportRow::ratio() const {
  if (!a || !b || a->cost.total == 0.0) return std::nullopt;
  return (b->cost.total - a->cost.total) / a->cost.total;
}

namespace {

std::string num(double v, const char* fmt = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string seconds(double v) { return num(v, "%.3f"); }

MethodRun run_from(const Instance& inst, const Plan& plan, double secs) {
  MethodRun run;
  run.cost = evaluate(inst, plan);
  run.seconds = secs;
  run.transfers = transfer_count(plan);
  run.vehicles_in_transfers = vehicles_in_transfers(plan);
  return run;
}

bool is_heuristic(Method m) { return m == Method::ha_pdp || m == Method::ha_pdpset; }

ReportRow run_row(const ScenarioSpec& spec, int index) {
  ReportRow row;
  row.instance = index + 1;
  row.seed = spec.seeds[index];
  try {
    GenerateParams p = spec.params;
    p.seed = row.seed;
    const Instance inst = generate_instance(p);

    std::optional<SolveResult> heur;
    const bool need_heur = is_heuristic(spec.method_a) ||
                           (spec.method_b && is_heuristic(*spec.method_b));
    if (need_heur) {
      const bool need_phase2 = spec.method_a == Method::ha_pdpset ||
                               (spec.method_b && *spec.method_b == Method::ha_pdpset);
      heur = solve(inst, spec.heuristic, !need_phase2);
      row.phase1_seconds = heur->phase1_seconds;
      if (need_phase2) row.phase2_seconds = heur->phase2_seconds;
    }
    OracleLimits lim;
    lim.time_budget_seconds = spec.oracle_time_limit;
    auto run = [&](Method m) {
      using clock = std::chrono::steady_clock;
      switch (m) {
        case Method::ha_pdp:
          return run_from(inst, heur->pdp_plan, heur->phase1_seconds);
        case Method::ha_pdpset:
          return run_from(inst, heur->pdpset_plan, heur->phase1_seconds + heur->phase2_seconds);
        case Method::oracle_pdp: {
          const auto t0 = clock::now();
          OracleResult res = exact_pdp(inst, lim);
          return run_from(inst, res.plan, std::chrono::duration<double>(clock::now() - t0).count());
        }
        case Method::oracle_pdpset: {
          lim.max_vehicles = 2;
          lim.max_requests = 3;
          const auto t0 = clock::now();
          OracleResult res = exact_pdpset(inst, lim);
          return run_from(inst, res.plan, std::chrono::duration<double>(clock::now() - t0).count());
        }
      }
      throw std::logic_error("unreachable");
    };
    row.a = run(spec.method_a);
    if (spec.method_b) row.b = run(*spec.method_b);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  const int count = static_cast<int>(std::min<std::size_t>(threads, n));
  for (int t = 0; t < count; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  }
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

const std::vector<std::string>& ComparisonReport::csv_columns() {
  static const std::vector<std::string> cols = {
      "instance", "seed",      "method_a",  "method_b",       "a_total",
      "b_total",  "ratio",     "a_vd",      "a_wt",           "a_td",
      "a_tt",     "b_vd",      "b_wt",      "b_td",           "b_tt",
      "a_seconds", "b_seconds", "phase1_seconds", "phase2_seconds", "transfers",
      "vehicles_in_transfers", "error"};
  return cols;
}

std::optional<double> ComparisonReport::cell(const ReportRow& row, const std::string& c) const {
  auto comp = [&](const std::optional<MethodRun>& run, char which) -> std::optional<double> {
    if (!run) return std::nullopt;
    switch (which) {
      case 'v': return run->cost.vehicle_distance;
      case 'w': return run->cost.customer_wait;
      case 'd': return run->cost.customer_distance;
      case 't': return run->cost.transfer_time;
      case 'T': return run->cost.total;
      case 's': return run->seconds;
    }
    return std::nullopt;
  };
  static const std::map<std::string, std::pair<char, char>> table = {
      {"a_total", {'a', 'T'}}, {"b_total", {'b', 'T'}},   {"a_vd", {'a', 'v'}},
      {"a_wt", {'a', 'w'}},    {"a_td", {'a', 'd'}},      {"a_tt", {'a', 't'}},
      {"b_vd", {'b', 'v'}},    {"b_wt", {'b', 'w'}},      {"b_td", {'b', 'd'}},
      {"b_tt", {'b', 't'}},    {"a_seconds", {'a', 's'}}, {"b_seconds", {'b', 's'}}};
  if (auto it = table.find(c); it != table.end()) {
    return comp(it->second.first == 'a' ? row.a : row.b, it->second.second);
  }
  if (c == "ratio") return row.ratio();
  if (c == "phase1_seconds") return row.phase1_seconds;
  if (c == "phase2_seconds") return row.phase2_seconds;
  const std::optional<MethodRun>& plan_run = row.b ? row.b : row.a;
  if (c == "transfers" && plan_run) return plan_run->transfers;
  if (c == "vehicles_in_transfers" && plan_run) return plan_run->vehicles_in_transfers;
  return std::nullopt;
}

std::optional<std::pair<double, double>> ComparisonReport::aggregate(const std::string& c) const {
  std::vector<double> xs;
  for (const auto& row : rows) {
    if (auto v = cell(row, c)) xs.push_back(*v);
  }
  if (xs.empty()) return std::nullopt;
  return mean_std(xs);
}

std::string ComparisonReport::to_csv() const {
  const auto& cols = csv_columns();
  std::ostringstream os;
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  auto fmt = [](const std::string& col, double v) {
    if (col.find("seconds") != std::string::npos) return seconds(v);
    if (col == "ratio") return num(v, "%.6f");
    return num(v);
  };
  const std::string mb = method_b ? method_name(*method_b) : "";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::string& c = cols[i];
      if (i) os << ',';
      if (c == "instance") {
        os << row.instance;
      } else if (c == "seed") {
        os << row.seed;
      } else if (c == "method_a") {
        os << method_name(method_a);
      } else if (c == "method_b") {
        os << mb;
      } else if (c == "error") {
        os << csv_escape(row.error);
      } else if (auto v = cell(row, c)) {
        os << fmt(c, *v);
      }
    }
    os << '\n';
  }
  for (int which = 0; which < 2; ++which) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::string& c = cols[i];
      if (i) os << ',';
      if (c == "instance") {
        os << (which == 0 ? "avg" : "std");
      } else if (c == "method_a") {
        os << method_name(method_a);
      } else if (c == "method_b") {
        os << mb;
      } else if (c != "seed" && c != "error") {
        if (auto agg = aggregate(c)) os << fmt(c, which == 0 ? agg->first : agg->second);
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string ComparisonReport::component_csv() const {
  std::ostringstream os;
  os << "instance,seed,method,vd,wt,td,tt,total\n";
  for (const auto& row : rows) {
    auto line = [&](Method m, const std::optional<MethodRun>& run) {
      if (!run) return;
      os << row.instance << ',' << row.seed << ',' << method_name(m) << ','
         << num(run->cost.vehicle_distance) << ',' << num(run->cost.customer_wait) << ','
         << num(run->cost.customer_distance) << ',' << num(run->cost.transfer_time) << ','
         << num(run->cost.total) << '\n';
    };
    line(method_a, row.a);
    if (method_b) line(*method_b, row.b);
  }
  return os.str();
}

json ComparisonReport::to_json() const {
  json doc;
  doc["name"] = name;
  doc["method_a"] = method_name(method_a);
  doc["method_b"] = method_b ? json(method_name(*method_b)) : json(nullptr);
  doc["rows"] = json::array();
  for (const auto& row : rows) {
    json r;
    r["instance"] = row.instance;
    r["seed"] = row.seed;
    for (const auto& c : csv_columns()) {
      if (c == "instance" || c == "seed" || c == "method_a" || c == "method_b" || c == "error") {
        continue;
      }
      auto v = cell(row, c);
      r[c] = v ? json(*v) : json(nullptr);
    }
    if (!row.error.empty()) r["error"] = row.error;
    doc["rows"].push_back(std::move(r));
  }
  json agg = json::object();
  for (const auto& c : csv_columns()) {
    if (auto a = aggregate(c)) agg[c] = {{"avg", a->first}, {"std", a->second}};
  }
  doc["aggregate"] = std::move(agg);
  return doc;
}

ComparisonReport run_scenario(const ScenarioSpec& spec) {
  ComparisonReport report;
  report.name = spec.name;
  report.method_a = spec.method_a;
  report.method_b = spec.method_b;
  report.rows.resize(spec.seeds.size());
  parallel_for(spec.seeds.size(), spec.threads,
               [&](std::size_t i) { report.rows[i] = run_row(spec, static_cast<int>(i)); });
  return report;
}

std::string ScalingReport::to_csv() const {
  std::ostringstream os;
  os << "grid,seed,phase1_seconds,phase2_seconds,total_seconds,pdp_total,pdpset_total,"
        "transfers,vehicles_in_transfers,error\n";
  for (const auto& r : rows) {
    os << r.grid << ',' << r.seed << ',' << seconds(r.phase1_seconds) << ','
       << seconds(r.phase2_seconds) << ',' << seconds(r.phase1_seconds + r.phase2_seconds) << ','
       << num(r.pdp_total) << ',' << num(r.pdpset_total) << ',' << r.transfers << ','
       << r.vehicles_in_transfers << ',' << csv_escape(r.error) << '\n';
  }
  return os.str();
}

json ScalingReport::to_json() const {
  json doc;
  doc["rows"] = json::array();
  for (const auto& r : rows) {
    json j = {{"grid", r.grid},
              {"seed", r.seed},
              {"phase1_seconds", r.phase1_seconds},
              {"phase2_seconds", r.phase2_seconds},
              {"pdp_total", r.pdp_total},
              {"pdpset_total", r.pdpset_total},
              {"transfers", r.transfers},
              {"vehicles_in_transfers", r.vehicles_in_transfers}};
    if (!r.error.empty()) j["error"] = r.error;
    doc["rows"].push_back(std::move(j));
  }
  doc["mean_seconds_by_grid"] = json::array();
  for (const auto& [g, s] : mean_seconds_by_grid()) {
    doc["mean_seconds_by_grid"].push_back({{"grid", g}, {"seconds", s}});
  }
  return doc;
}

std::vector<std::pair<int, double>> ScalingReport::mean_seconds_by_grid() const {
  std::map<int, std::vector<double>> by;
  for (const auto& r : rows) {
    if (r.error.empty()) by[r.grid].push_back(r.phase1_seconds + r.phase2_seconds);
  }
  std::vector<std::pair<int, double>> out;
  for (const auto& [g, xs] : by) out.emplace_back(g, mean_std(xs).first);
  return out;
}

ScalingReport run_scaling(const std::vector<int>& grids, const GenerateParams& base,
                          const std::vector<std::uint64_t>& seeds, const HeuristicOptions& opt) {
  ScalingReport report;
  for (int g : grids) {
    for (std::uint64_t seed : seeds) {
      ScalingRow row;
      row.grid = g;
      row.seed = seed;
      try {
        GenerateParams p = base;
        p.rows = g;
        p.cols = g;
        p.seed = seed;
        const Instance inst = generate_instance(p);
        const SolveResult res = solve(inst, opt);
        row.phase1_seconds = res.phase1_seconds;
        row.phase2_seconds = res.phase2_seconds;
        row.pdp_total = res.pdp_cost.total;
        row.pdpset_total = res.pdpset_cost.total;
        row.transfers = transfer_count(res.pdpset_plan);
        row.vehicles_in_transfers = vehicles_in_transfers(res.pdpset_plan);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace pdpset

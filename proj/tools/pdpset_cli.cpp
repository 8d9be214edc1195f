#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pdpset/bench.hpp"
#include "pdpset/heuristic.hpp"
#include "pdpset/milp.hpp"
#include "pdpset/oracle.hpp"

using nlohmann::json;
using namespace pdpset;

namespace {

enum Exit { kOk = 0, kViolations = 1, kMalformed = 2, kOracleLimit = 3 };

void emit(const json& summary) { std::cout << summary.dump(2) << '\n'; }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::parse, path + ": cannot write file");
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json violations_json(const std::vector<Violation>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back({{"code", v.code}, {"message", v.message}});
  return out;
}

struct Common {
  std::vector<int> grid{5, 5};
  int vehicles = 2;
  int requests = 3;
  int capacity = 6;
  Weights weights;
  double dmax = 2.0;
  double trange = 8.0;
  std::uint64_t seed = 1;

  void add(CLI::App* app) {
    app->add_option("--grid", grid, "Grid rows and columns")->expected(2);
    app->add_option("--vehicles", vehicles, "Number of vehicles");
    app->add_option("--requests", requests, "Number of requests");
    app->add_option("--capacity", capacity, "Vehicle capacity");
    app->add_option("--alpha", weights.alpha, "Vehicle distance weight");
    app->add_option("--beta", weights.beta, "Customer wait weight");
    app->add_option("--theta", weights.theta, "Customer distance weight");
    app->add_option("--delta", weights.delta, "Transfer dwell weight");
    app->add_option("--dmax", dmax, "Transfer synchronization window");
    app->add_option("--trange", trange, "Transfer search radius");
    app->add_option("--seed", seed, "Random seed");
  }

  GenerateParams params() const {
    GenerateParams p;
    p.rows = grid[0];
    p.cols = grid[1];
    p.vehicles = vehicles;
    p.requests = requests;
    p.capacity = capacity;
    p.weights = weights;
    p.d_max = dmax;
    p.t_range = trange;
    p.seed = seed;
    return p;
  }
};

int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::oracle_limit: return kOracleLimit;
    case ErrorCode::sync_window:
    case ErrorCode::construction:
    case ErrorCode::not_representable: return kViolations;
    default: return kMalformed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pickup and delivery with synchronized en-route transfers"};
  app.require_subcommand(1);

  // gen
  Common gen_opts;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a random instance");
  gen_opts.add(gen);
  gen->add_option("--out", gen_out, "Instance JSON path");

  // solve
  std::string solve_in, solve_out;
  bool phase1_only = false;
  HeuristicOptions heur;
  std::optional<double> solve_dmax, solve_trange;
  auto* solve_cmd = app.add_subcommand("solve", "Run the two-phase heuristic");
  solve_cmd->add_option("instance", solve_in, "Instance JSON")->required();
  solve_cmd->add_flag("--phase1-only", phase1_only, "Stop after greedy construction");
  solve_cmd->add_flag("--phase2-repeat", heur.phase2_repeat, "Repeat transfer passes");
  solve_cmd->add_option("--threads", heur.threads, "Worker threads for transfer search");
  solve_cmd->add_option("--dmax", solve_dmax, "Override the instance d_max");
  solve_cmd->add_option("--trange", solve_trange, "Override the instance t_range");
  solve_cmd->add_option("--out", solve_out, "Plan JSON path");

  // oracle
  std::string oracle_in, oracle_out, oracle_mode = "pdpset";
  double time_limit = 60.0;
  bool simple_paths = false;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact enumeration for tiny instances");
  oracle_cmd->add_option("instance", oracle_in, "Instance JSON")->required();
  oracle_cmd->add_option("--mode", oracle_mode, "pdp or pdpset")
      ->check(CLI::IsMember({"pdp", "pdpset"}));
  oracle_cmd->add_option("--time-limit", time_limit, "Budget in seconds");
  oracle_cmd->add_flag("--simple-paths", simple_paths, "Only routes the MILP can represent");
  oracle_cmd->add_option("--out", oracle_out, "Plan JSON path");

  // export-milp
  std::string milp_in, milp_out;
  auto* milp_cmd = app.add_subcommand("export-milp", "Write the MILP in LP format");
  milp_cmd->add_option("instance", milp_in, "Instance JSON")->required();
  milp_cmd->add_option("--out", milp_out, "LP file path")->required();

  // check
  std::string check_in, check_plan, check_solution;
  double tol = 1e-6;
  auto* check_cmd = app.add_subcommand("check", "Validate a plan or a solver solution");
  check_cmd->add_option("instance", check_in, "Instance JSON")->required();
  auto* plan_opt = check_cmd->add_option("--plan", check_plan, "Plan JSON");
  auto* sol_opt = check_cmd->add_option("--solution", check_solution, "Lines of 'name value'");
  plan_opt->excludes(sol_opt);
  check_cmd->add_option("--tol", tol, "Row tolerance");

  // eval
  std::string eval_in, eval_plan;
  auto* eval_cmd = app.add_subcommand("eval", "Cost breakdown of a plan");
  eval_cmd->add_option("instance", eval_in, "Instance JSON")->required();
  eval_cmd->add_option("--plan", eval_plan, "Plan JSON")->required();

  // bench
  Common bench_opts;
  int seeds = 5;
  std::string method_a = "ha_pdp", method_b = "ha_pdpset", format = "csv", bench_out,
              components_out;
  std::vector<int> grids;
  int bench_threads = 1;
  HeuristicOptions bench_heur;
  auto* bench = app.add_subcommand("bench", "Scenario sweep with a comparison report");
  bench_opts.add(bench);
  bench->add_option("--seeds", seeds, "Number of seeds, starting at --seed");
  bench->add_option("--method-a", method_a, "Baseline method");
  bench->add_option("--method-b", method_b, "Compared method, or 'none'");
  bench->add_flag("--phase2-repeat", bench_heur.phase2_repeat, "Repeat transfer passes");
  bench->add_option("--threads", bench_threads, "Instances solved concurrently");
  bench->add_option("--time-limit", time_limit, "Oracle budget per instance in seconds");
  bench->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  bench->add_option("--out", bench_out, "Report path");
  bench->add_option("--components", components_out, "Per-method cost component CSV path");
  bench->add_option("--grids", grids, "Square grid sides for a scaling sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const Instance inst = generate_instance(gen_opts.params());
      json summary = {{"command", "gen"},
                      {"vehicles", inst.vehicles.size()},
                      {"requests", inst.requests.size()},
                      {"seed", gen_opts.seed}};
      if (gen_out.empty()) {
        summary["instance"] = save_instance(inst);
      } else {
        save_instance_file(inst, gen_out);
        summary["out"] = gen_out;
      }
      emit(summary);
      return kOk;
    }

    if (solve_cmd->parsed()) {
      Instance inst = load_instance_file(solve_in);
      if (solve_dmax) inst.d_max = *solve_dmax;
      if (solve_trange) inst.t_range = *solve_trange;
      if (auto vs = validate_instance(inst); !vs.empty()) {
        emit({{"command", "solve"}, {"error", "invalid instance"}, {"violations", violations_json(vs)}});
        return kMalformed;
      }
      const SolveResult res = solve(inst, heur, phase1_only);
      json summary = {{"command", "solve"},
                      {"pdp_cost", res.pdp_cost.total},
                      {"pdpset_cost", res.pdpset_cost.total},
                      {"pdp", to_json(res.pdp_cost)},
                      {"pdpset", to_json(res.pdpset_cost)},
                      {"phase1_seconds", res.phase1_seconds},
                      {"phase2_seconds", res.phase2_seconds},
                      {"transfers", transfer_count(res.pdpset_plan)},
                      {"vehicles_in_transfers", vehicles_in_transfers(res.pdpset_plan)}};
      const json plan = plan_to_json(inst, res.pdpset_plan);
      if (solve_out.empty()) {
        summary["plan"] = plan;
      } else {
        write_file(solve_out, plan.dump(2) + "\n");
        summary["out"] = solve_out;
      }
      emit(summary);
      return kOk;
    }

    if (oracle_cmd->parsed()) {
      const Instance inst = load_instance_file(oracle_in);
      const RouteSpace space = simple_paths ? RouteSpace::simple_paths : RouteSpace::shortest_paths;
      OracleLimits lim = oracle_mode == "pdp" ? OracleLimits::pdp() : OracleLimits::pdpset();
      lim.time_budget_seconds = time_limit;
      try {
        const OracleResult res =
            oracle_mode == "pdp" ? exact_pdp(inst, lim, space) : exact_pdpset(inst, lim, space);
        json summary = {{"command", "oracle"},
                        {"mode", oracle_mode},
                        {"cost", res.cost.total},
                        {"components", to_json(res.cost)},
                        {"explored", res.explored},
                        {"seconds", res.seconds},
                        {"transfers", transfer_count(res.plan)}};
        const json plan = plan_to_json(inst, res.plan);
        if (oracle_out.empty()) {
          summary["plan"] = plan;
        } else {
          write_file(oracle_out, plan.dump(2) + "\n");
          summary["out"] = oracle_out;
        }
        emit(summary);
        return kOk;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::oracle_limit) throw;
        emit({{"command", "oracle"}, {"error", "oracle-limit"}, {"message", e.what()}});
        return kOracleLimit;
      }
    }

    if (milp_cmd->parsed()) {
      const Instance inst = load_instance_file(milp_in);
      const milp::MilpModel model = milp::build_model(inst);
      write_file(milp_out, milp::export_lp(model));
      json families = json::object();
      for (int f = 0; f < milp::kFamilyCount; ++f) {
        const auto fam = static_cast<milp::Family>(f);
        families[milp::family_name(fam)] = model.variable_count(fam);
      }
      json rows = json::object();
      for (const auto& [eq, n] : model.row_counts()) rows["(" + std::to_string(eq) + ")"] = n;
      emit({{"command", "export-milp"},
            {"out", milp_out},
            {"big_m", model.big_m},
            {"variables", model.variables.size()},
            {"constraints", model.constraints.size()},
            {"variable_families", families},
            {"rows_by_equation", rows}});
      return kOk;
    }

    if (check_cmd->parsed()) {
      const Instance inst = load_instance_file(check_in);
      if (!check_solution.empty()) {
        const milp::MilpModel model = milp::build_model(inst);
        const auto imported = milp::parse_solution(model, read_file(check_solution));
        const auto vs = milp::check_assignment(model, imported.assignment, tol);
        json viol = json::array();
        for (const auto& v : vs) {
          viol.push_back({{"name", v.name},
                          {"equation", v.equation},
                          {"activity", v.activity},
                          {"rhs", v.rhs},
                          {"amount", v.amount}});
        }
        emit({{"command", "check"},
              {"kind", "solution"},
              {"feasible", vs.empty()},
              {"objective", milp::objective_value(model, imported.assignment)},
              {"warnings", imported.warnings},
              {"violations", viol}});
        return vs.empty() ? kOk : kViolations;
      }
      if (check_plan.empty()) {
        emit({{"command", "check"}, {"error", "one of --plan or --solution is required"}});
        return kMalformed;
      }
      const Plan plan = load_plan_file(inst, check_plan);
      auto vs = validate_instance(inst);
      const auto pv = check_feasible(inst, plan);
      vs.insert(vs.end(), pv.begin(), pv.end());
      json summary = {{"command", "check"},
                      {"kind", "plan"},
                      {"feasible", vs.empty()},
                      {"violations", violations_json(vs)}};
      if (vs.empty()) summary["cost"] = to_json(evaluate(inst, plan));
      emit(summary);
      return vs.empty() ? kOk : kViolations;
    }

    if (eval_cmd->parsed()) {
      const Instance inst = load_instance_file(eval_in);
      const Plan plan = load_plan_file(inst, eval_plan);
      const auto vs = check_feasible(inst, plan);
      if (!vs.empty()) {
        emit({{"command", "eval"}, {"feasible", false}, {"violations", violations_json(vs)}});
        return kViolations;
      }
      emit({{"command", "eval"},
            {"feasible", true},
            {"cost", to_json(evaluate(inst, plan))},
            {"transfers", transfer_count(plan)}});
      return kOk;
    }

    if (bench->parsed()) {
      std::vector<std::uint64_t> seed_list;
      for (int i = 0; i < seeds; ++i) seed_list.push_back(bench_opts.seed + i);
      if (!grids.empty()) {
        GenerateParams base = bench_opts.params();
        const ScalingReport rep = run_scaling(grids, base, seed_list, bench_heur);
        const std::string body = format == "csv" ? rep.to_csv() : rep.to_json().dump(2) + "\n";
        json summary = {{"command", "bench"}, {"kind", "scaling"}, {"rows", rep.rows.size()}};
        summary["mean_seconds_by_grid"] = rep.to_json()["mean_seconds_by_grid"];
        if (bench_out.empty()) {
          summary["report"] = format == "csv" ? json(body) : rep.to_json();
        } else {
          write_file(bench_out, body);
          summary["out"] = bench_out;
        }
        emit(summary);
        return kOk;
      }
      ScenarioSpec spec;
      spec.name = "bench";
      spec.params = bench_opts.params();
      spec.seeds = seed_list;
      spec.method_a = parse_method(method_a);
      spec.method_b = method_b == "none" ? std::nullopt : std::optional(parse_method(method_b));
      spec.heuristic = bench_heur;
      spec.oracle_time_limit = time_limit;
      spec.threads = bench_threads;
      const ComparisonReport rep = run_scenario(spec);
      const std::string body = format == "csv" ? rep.to_csv() : rep.to_json().dump(2) + "\n";
      json summary = {{"command", "bench"}, {"kind", "comparison"}, {"rows", rep.rows.size()}};
      int failed = 0;
      for (const auto& r : rep.rows) failed += r.error.empty() ? 0 : 1;
      summary["failed_rows"] = failed;
      if (auto agg = rep.aggregate("ratio")) {
        summary["ratio_avg"] = agg->first;
        summary["ratio_std"] = agg->second;
      }
      if (!components_out.empty()) {
        write_file(components_out, rep.component_csv());
        summary["components"] = components_out;
      }
      if (bench_out.empty()) {
        summary["report"] = format == "csv" ? json(body) : rep.to_json();
      } else {
        write_file(bench_out, body);
        summary["out"] = bench_out;
      }
      emit(summary);
      return kOk;
    }
  } catch (const Error& e) {
    emit({{"error", to_string(e.code())}, {"message", e.what()}});
    return exit_for(e);
  } catch (const std::exception& e) {
    emit({{"error", "internal"}, {"message", e.what()}});
    return kMalformed;
  }
  return kOk;
}

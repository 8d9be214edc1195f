#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdpset/heuristic.hpp"
#include "pdpset/instance.hpp"
#include "pdpset/plan.hpp"

namespace pdpset {

enum class Method { ha_pdp, ha_pdpset, oracle_pdp, oracle_pdpset };

const char* method_name(Method m);
// Throws Error{parse} on an unknown name.
Method parse_method(const std::string& name);

struct ScenarioSpec {
  std::string name = "scenario";
  GenerateParams params;  // seed field ignored; see `seeds`
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  Method method_a = Method::ha_pdp;
  std::optional<Method> method_b = Method::ha_pdpset;
  HeuristicOptions heuristic;
  double oracle_time_limit = 60.0;
  // Instances run concurrently; rows stay in seed order.
  int threads = 1;
};

struct MethodRun {
  CostBreakdown cost;
  double seconds = 0.0;
  int transfers = 0;
  int vehicles_in_transfers = 0;
};

struct ReportRow {
  int instance = 0;  // 1-based position in the sweep
  std::uint64_t seed = 0;
  std::optional<MethodRun> a;
  std::optional<MethodRun> b;
  std::optional<double> phase1_seconds;
  std::optional<double> phase2_seconds;
  std::string error;

  // (B - A) / A when both methods ran.
  std::optional<double> ratio() const;
};

struct ComparisonReport {
  std::string name;
  Method method_a = Method::ha_pdp;
  std::optional<Method> method_b;
  std::vector<ReportRow> rows;

  static const std::vector<std::string>& csv_columns();
  // Rows followed by "avg" and "std" lines (population std over rows that
  // have a value in that column).
  std::string to_csv() const;
  // Per-instance VD / WT / TD / TT / total for each method.
  std::string component_csv() const;
  nlohmann::json to_json() const;

  // Mean and population std of a numeric column over rows that have it.
  std::optional<std::pair<double, double>> aggregate(const std::string& column) const;
  std::optional<double> cell(const ReportRow& row, const std::string& column) const;
};

ComparisonReport run_scenario(const ScenarioSpec& spec);

struct ScalingRow {
  int grid = 0;
  std::uint64_t seed = 0;
  double phase1_seconds = 0.0;
  double phase2_seconds = 0.0;
  double pdp_total = 0.0;
  double pdpset_total = 0.0;
  int transfers = 0;
  int vehicles_in_transfers = 0;
  std::string error;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  std::string to_csv() const;
  nlohmann::json to_json() const;
  // Mean heuristic wall time (both phases) per grid size, ascending grid.
  std::vector<std::pair<int, double>> mean_seconds_by_grid() const;
};

// Square grids of the given side lengths, each solved for every seed.
ScalingReport run_scaling(const std::vector<int>& grids, const GenerateParams& base,
                          const std::vector<std::uint64_t>& seeds,
                          const HeuristicOptions& opt = {});

}  // namespace pdpset

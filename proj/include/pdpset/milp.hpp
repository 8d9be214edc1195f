#pragma once

#include <array>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pdpset/instance.hpp"
#include "pdpset/plan.hpp"

namespace pdpset::milp {

enum class Family { X, Y, V, F, TV, TP, U, Z, S, W };
inline constexpr int kFamilyCount = 10;
const char* family_name(Family f);

enum class VarKind { binary, continuous };
enum class Sense { le, ge, eq };

struct Variable {
  std::string name;
  Family family;
  VarKind kind;
  double lb;
  double ub;
};

using Term = std::pair<int, double>;

// Linear expression over variable indices plus a constant.
struct LinExpr {
  std::vector<Term> terms;
  double constant = 0.0;

  LinExpr() = default;
  LinExpr(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)
  static LinExpr var(int index, double coef = 1.0) {
    LinExpr e;
    e.terms.emplace_back(index, coef);
    return e;
  }
  LinExpr& add(int index, double coef) {
    terms.emplace_back(index, coef);
    return *this;
  }
  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double s, LinExpr a);

// Normalized row: sum(terms) <sense> rhs, duplicate indices merged, sorted.
struct Constraint {
  std::string name;
  int equation = 0;
  std::vector<Term> terms;
  Sense sense = Sense::le;
  double rhs = 0.0;
};

Constraint make_row(std::string name, int equation, const LinExpr& lhs, Sense sense,
                    const LinExpr& rhs);

double row_activity(const Constraint& row, const std::vector<double>& values);
// Amount by which the row is violated (0 when satisfied).
double row_violation(const Constraint& row, const std::vector<double>& values);

// Linearization of z = a * x for binary x and 0 <= a < M:
//   z <= M x,  z <= a,  z >= a - M (1 - x).
// `x` may be a sum of binaries that is known to be at most one.
std::array<Constraint, 3> product_rows(const std::string& suffix, std::array<int, 3> equations,
                                       int z, const LinExpr& x, const LinExpr& a, double big_m);

class MilpModel {
 public:
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::vector<Term> objective;
  double big_m = 0.0;

  int add_variable(std::string name, Family family, VarKind kind, double lb, double ub);
  void add_constraint(Constraint row) { constraints.push_back(std::move(row)); }

  // -1 when unknown.
  int find(const std::string& name) const;
  int variable_count(Family f) const { return family_counts_[static_cast<int>(f)]; }
  // Number of rows emitted for the given equation number.
  int row_count(int equation) const;
  std::map<int, int> row_counts() const;

 private:
  std::unordered_map<std::string, int> index_;
  std::array<int, kFamilyCount> family_counts_{};
};

// Bound that strictly exceeds any arrival time of a plan whose legs follow
// shortest paths: diameter * (2|R| + 2) + d_max |R| |K| + 1.
double compute_big_m(const Instance& inst);

MilpModel build_model(const Instance& inst);

// Standard LP-format text; byte-stable for a given model.
std::string export_lp(const MilpModel& model);

namespace names {
// Depot is written as "D". Vehicle and request arguments are ids.
std::string node(const Instance& inst, int node);
std::string x(const Instance& inst, int i, int j, int k);
std::string y(const Instance& inst, int i, int j, int k, int r);
std::string v(int k, int r);
std::string f(const Instance& inst, int r, int i, int k, int l);
std::string tv(const Instance& inst, int i, int k);
std::string tp(const Instance& inst, int i, int r);
std::string u(const Instance& inst, int i, int k);
std::string z(const Instance& inst, int i, int j, int k);
std::string s(const Instance& inst, int i, int j, int k);
std::string w(int k, int r);
}  // namespace names

// Sparse variable values by name; missing names read as 0.
struct Assignment {
  std::map<std::string, double> values;

  double get(const std::string& name) const {
    auto it = values.find(name);
    return it == values.end() ? 0.0 : it->second;
  }
  void set(const std::string& name, double value) { values[name] = value; }
};

// Maps a feasible plan onto model variables. Throws Error{not_representable}
// when a vehicle (or passenger) would have to visit a node twice.
Assignment plan_to_assignment(const Instance& inst, const Plan& plan);

// True when the vehicle can follow the route's stops along shortest paths
// without entering any node twice.
bool route_representable(const Instance& inst, int vehicle, const std::vector<Event>& route);
// True when plan_to_assignment succeeds.
bool representable(const Instance& inst, const Plan& plan);

struct RowViolation {
  std::string name;   // row or variable name
  int equation = 0;   // 0 for bound / integrality violations
  double activity = 0.0;
  double rhs = 0.0;
  double amount = 0.0;
};

std::vector<RowViolation> check_assignment(const MilpModel& model, const Assignment& asg,
                                           double tol = 1e-6);
double objective_value(const MilpModel& model, const Assignment& asg);

struct SolutionImport {
  Assignment assignment;
  std::vector<std::string> warnings;
};

// Reads "name value" lines; blank lines and lines starting with '#' are
// skipped, unknown names are dropped with a warning.
SolutionImport parse_solution(const MilpModel& model, const std::string& text);

}  // namespace pdpset::milp

#include "pdpset/milp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace pdpset::milp {

const char* family_name(Family f) {
  switch (f) {
    case Family::X: return "X";
    case Family::Y: return "Y";
    case Family::V: return "V";
    case Family::F: return "F";
    case Family::TV: return "TV";
    case Family::TP: return "TP";
    case Family::U: return "U";
    case Family::Z: return "Z";
    case Family::S: return "S";
    case Family::W: return "W";
  }
  return "?";
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  constant += o.constant;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  for (const auto& [i, c] : o.terms) terms.emplace_back(i, -c);
  constant -= o.constant;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (auto& t : terms) t.second *= s;
  constant *= s;
  return *this;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(double s, LinExpr a) { return a *= s; }

Constraint make_row(std::string name, int equation, const LinExpr& lhs, Sense sense,
                    const LinExpr& rhs) {
  LinExpr diff = lhs - rhs;
  std::sort(diff.terms.begin(), diff.terms.end());
  Constraint row;
  row.name = std::move(name);
  row.equation = equation;
  row.sense = sense;
  row.rhs = -diff.constant;
  for (const auto& [i, c] : diff.terms) {
    if (!row.terms.empty() && row.terms.back().first == i) {
      row.terms.back().second += c;
    } else {
      row.terms.emplace_back(i, c);
    }
  }
  std::erase_if(row.terms, [](const Term& t) { return t.second == 0.0; });
  return row;
}

double row_activity(const Constraint& row, const std::vector<double>& values) {
  double sum = 0.0;
  for (const auto& [i, c] : row.terms) sum += c * values[i];
  return sum;
}

double row_violation(const Constraint& row, const std::vector<double>& values) {
  const double lhs = row_activity(row, values);
  switch (row.sense) {
    case Sense::le: return std::max(0.0, lhs - row.rhs);
    case Sense::ge: return std::max(0.0, row.rhs - lhs);
    case Sense::eq: return std::abs(lhs - row.rhs);
  }
  return 0.0;
}

std::array<Constraint, 3> product_rows(const std::string& suffix, std::array<int, 3> eq, int z,
                                       const LinExpr& x, const LinExpr& a, double big_m) {
  const LinExpr zv = LinExpr::var(z);
  return {
      make_row("c" + std::to_string(eq[0]) + "_" + suffix, eq[0], zv, Sense::le, big_m * x),
      make_row("c" + std::to_string(eq[1]) + "_" + suffix, eq[1], zv, Sense::le, a),
      make_row("c" + std::to_string(eq[2]) + "_" + suffix, eq[2], zv, Sense::ge,
               a - big_m * (LinExpr(1.0) - x)),
  };
}

int MilpModel::add_variable(std::string name, Family family, VarKind kind, double lb, double ub) {
  const int idx = static_cast<int>(variables.size());
  index_.emplace(name, idx);
  variables.push_back({std::move(name), family, kind, lb, ub});
  ++family_counts_[static_cast<int>(family)];
  return idx;
}

int MilpModel::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

int MilpModel::row_count(int equation) const {
  return static_cast<int>(std::count_if(constraints.begin(), constraints.end(),
                                        [&](const Constraint& c) { return c.equation == equation; }));
}

std::map<int, int> MilpModel::row_counts() const {
  std::map<int, int> out;
  for (const auto& c : constraints) ++out[c.equation];
  return out;
}

double compute_big_m(const Instance& inst) {
  const double diameter = inst.net().diameter_time();
  const double nr = static_cast<double>(inst.requests.size());
  const double nk = static_cast<double>(inst.vehicles.size());
  return diameter * (2.0 * nr + 2.0) + inst.d_max * nr * nk + 1.0;
}

namespace names {

std::string node(const Instance& inst, int i) {
  return i > inst.net().node_count() ? "D" : std::to_string(i);
}

namespace {
std::string join(std::initializer_list<std::string> parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += '_';
    out += p;
  }
  return out;
}
}  // namespace

std::string x(const Instance& inst, int i, int j, int k) {
  return join({"X", node(inst, i), node(inst, j), std::to_string(k)});
}
std::string y(const Instance& inst, int i, int j, int k, int r) {
  return join({"Y", node(inst, i), node(inst, j), std::to_string(k), std::to_string(r)});
}
std::string v(int k, int r) { return join({"V", std::to_string(k), std::to_string(r)}); }
std::string f(const Instance& inst, int r, int i, int k, int l) {
  return join({"F", std::to_string(r), node(inst, i), std::to_string(k), std::to_string(l)});
}
std::string tv(const Instance& inst, int i, int k) {
  return join({"TV", node(inst, i), std::to_string(k)});
}
std::string tp(const Instance& inst, int i, int r) {
  return join({"TP", node(inst, i), std::to_string(r)});
}
std::string u(const Instance& inst, int i, int k) {
  return join({"U", node(inst, i), std::to_string(k)});
}
std::string z(const Instance& inst, int i, int j, int k) {
  return join({"Z", node(inst, i), node(inst, j), std::to_string(k)});
}
std::string s(const Instance& inst, int i, int j, int k) {
  return join({"S", node(inst, i), node(inst, j), std::to_string(k)});
}
std::string w(int k, int r) { return join({"W", std::to_string(k), std::to_string(r)}); }

}  // namespace names

namespace {

struct ModelArc {
  int from;
  int to;  // n + 1 is the dummy depot
  double cost;
  double time;
};

// Arc layout shared by the builder: physical arcs plus one zero-cost,
// zero-time arc from every node into the shared depot, sorted by (from, to).
struct ArcIndex {
  int n = 0;
  int depot = 0;
  std::vector<ModelArc> arcs;        // with depot arcs
  std::vector<int> physical;         // positions in `arcs` of physical arcs
  std::vector<int> physical_pos;     // arcs position -> physical position or -1
  std::vector<std::vector<int>> out; // node -> arc positions
  std::vector<std::vector<int>> in;
  std::map<std::pair<int, int>, int> by_ends;

  explicit ArcIndex(const GridNetwork& net) {
    n = net.node_count();
    depot = n + 1;
    out.resize(n + 2);
    in.resize(n + 2);
    for (int i = 1; i <= n; ++i) {
      std::vector<ModelArc> local;
      for (std::size_t a : net.outbound(i)) {
        const Arc& arc = net.arcs()[a];
        local.push_back({arc.from, arc.to, arc.cost, arc.time});
      }
      std::sort(local.begin(), local.end(),
                [](const ModelArc& l, const ModelArc& r) { return l.to < r.to; });
      local.push_back({i, depot, 0.0, 0.0});
      for (const auto& arc : local) {
        const int pos = static_cast<int>(arcs.size());
        arcs.push_back(arc);
        out[arc.from].push_back(pos);
        in[arc.to].push_back(pos);
        by_ends[{arc.from, arc.to}] = pos;
        if (arc.to != depot) {
          physical_pos.push_back(static_cast<int>(physical.size()));
          physical.push_back(pos);
        } else {
          physical_pos.push_back(-1);
        }
      }
    }
  }
};

struct Layout {
  int n, nk, nr;
  int bx, by, bv, bf, btv, btp, bu, bz, bs, bw;
  int X(int a, int k) const { return bx + a * nk + k; }
  int Y(int a, int k, int r) const { return by + (a * nk + k) * nr + r; }
  int V(int k, int r) const { return bv + k * nr + r; }
  int F(int r, int i, int k, int l) const {
    return bf + ((r * n + (i - 1)) * nk + k) * (nk - 1) + (l < k ? l : l - 1);
  }
  int TV(int i, int k) const { return btv + (i - 1) * nk + k; }
  int TP(int i, int r) const { return btp + (i - 1) * nr + r; }
  int U(int i, int k) const { return bu + (i - 1) * nk + k; }
  int Z(int pa, int k) const { return bz + pa * nk + k; }
  int S(int pa, int k) const { return bs + pa * nk + k; }
  int W(int k, int r) const { return bw + k * nr + r; }
};

std::string idx_name(std::initializer_list<std::string> parts) {
  std::string out;
  for (const auto& p : parts) {
    out += '_';
    out += p;
  }
  return out;
}

}  // namespace

MilpModel build_model(const Instance& inst) {
  for (const auto& v : inst.vehicles) {
    if (v.destination) {
      throw Error(ErrorCode::unsupported,
                  "model export supports only the dummy depot as vehicle destination");
    }
  }
  const GridNetwork& net = inst.net();
  const ArcIndex ai(net);
  const int n = ai.n;
  const int nk = static_cast<int>(inst.vehicles.size());
  const int nr = static_cast<int>(inst.requests.size());
  const double M = compute_big_m(inst);
  const double inf = std::numeric_limits<double>::infinity();
  auto vid = [&](int k) { return inst.vehicles[k].id; };
  auto rid = [&](int r) { return inst.requests[r].id; };
  auto nd = [&](int i) { return names::node(inst, i); };
  auto ks = [&](int k) { return std::to_string(vid(k)); };
  auto rs = [&](int r) { return std::to_string(rid(r)); };

  MilpModel m;
  m.big_m = M;
  Layout L{};
  L.n = n;
  L.nk = nk;
  L.nr = nr;
  const int na = static_cast<int>(ai.arcs.size());
  const int np = static_cast<int>(ai.physical.size());

  L.bx = static_cast<int>(m.variables.size());
  for (int a = 0; a < na; ++a) {
    for (int k = 0; k < nk; ++k) {
      m.add_variable(names::x(inst, ai.arcs[a].from, ai.arcs[a].to, vid(k)), Family::X,
                     VarKind::binary, 0.0, 1.0);
    }
  }
  L.by = static_cast<int>(m.variables.size());
  for (int a = 0; a < na; ++a) {
    for (int k = 0; k < nk; ++k) {
      for (int r = 0; r < nr; ++r) {
        m.add_variable(names::y(inst, ai.arcs[a].from, ai.arcs[a].to, vid(k), rid(r)),
                       Family::Y, VarKind::binary, 0.0, 1.0);
      }
    }
  }
  L.bv = static_cast<int>(m.variables.size());
  for (int k = 0; k < nk; ++k) {
    for (int r = 0; r < nr; ++r) {
      m.add_variable(names::v(vid(k), rid(r)), Family::V, VarKind::binary, 0.0, 1.0);
    }
  }
  L.bf = static_cast<int>(m.variables.size());
  for (int r = 0; r < nr; ++r) {
    for (int i = 1; i <= n; ++i) {
      for (int k = 0; k < nk; ++k) {
        for (int l = 0; l < nk; ++l) {
          if (l == k) continue;
          m.add_variable(names::f(inst, rid(r), i, vid(k), vid(l)), Family::F, VarKind::binary,
                         0.0, 1.0);
        }
      }
    }
  }
  L.btv = static_cast<int>(m.variables.size());
  for (int i = 1; i <= n; ++i) {
    for (int k = 0; k < nk; ++k) {
      m.add_variable(names::tv(inst, i, vid(k)), Family::TV, VarKind::continuous, 0.0, inf);
    }
  }
  L.btp = static_cast<int>(m.variables.size());
  for (int i = 1; i <= n; ++i) {
    for (int r = 0; r < nr; ++r) {
      m.add_variable(names::tp(inst, i, rid(r)), Family::TP, VarKind::continuous, 0.0, inf);
    }
  }
  // Without a second vehicle no transfer exists, so no dwell is possible.
  const double dwell_ub = nk > 1 ? inst.d_max : 0.0;
  L.bu = static_cast<int>(m.variables.size());
  for (int i = 1; i <= n; ++i) {
    for (int k = 0; k < nk; ++k) {
      m.add_variable(names::u(inst, i, vid(k)), Family::U, VarKind::continuous, 0.0, dwell_ub);
    }
  }
  L.bz = static_cast<int>(m.variables.size());
  for (int p = 0; p < np; ++p) {
    const auto& arc = ai.arcs[ai.physical[p]];
    for (int k = 0; k < nk; ++k) {
      m.add_variable(names::z(inst, arc.from, arc.to, vid(k)), Family::Z, VarKind::continuous,
                     0.0, inf);
    }
  }
  L.bs = static_cast<int>(m.variables.size());
  for (int p = 0; p < np; ++p) {
    const auto& arc = ai.arcs[ai.physical[p]];
    for (int k = 0; k < nk; ++k) {
      m.add_variable(names::s(inst, arc.from, arc.to, vid(k)), Family::S, VarKind::continuous,
                     0.0, inst.d_max);
    }
  }
  L.bw = static_cast<int>(m.variables.size());
  for (int k = 0; k < nk; ++k) {
    for (int r = 0; r < nr; ++r) {
      m.add_variable(names::w(vid(k), rid(r)), Family::W, VarKind::continuous, 0.0, inf);
    }
  }

  // Objective.
  const Weights& wt = inst.weights;
  {
    LinExpr obj;
    for (int a = 0; a < na; ++a) {
      for (int k = 0; k < nk; ++k) obj.add(L.X(a, k), wt.alpha * ai.arcs[a].cost);
    }
    for (int r = 0; r < nr; ++r) {
      const Request& q = inst.requests[r];
      const int node = inst.wait_metric == WaitMetric::pickup ? q.pickup : q.dropoff;
      obj.add(L.TP(node, r), wt.beta * q.qty);
    }
    for (int a = 0; a < na; ++a) {
      for (int k = 0; k < nk; ++k) {
        for (int r = 0; r < nr; ++r) {
          obj.add(L.Y(a, k, r), wt.theta * ai.arcs[a].cost * inst.requests[r].qty);
        }
      }
    }
    for (int i = 1; i <= n; ++i) {
      for (int k = 0; k < nk; ++k) obj.add(L.U(i, k), wt.delta);
    }
    const Constraint folded = make_row("obj", 1, obj, Sense::eq, LinExpr(0.0));
    m.objective = folded.terms;
  }

  auto sum_x = [&](const std::vector<int>& arcs, int k) {
    LinExpr e;
    for (int a : arcs) e.add(L.X(a, k), 1.0);
    return e;
  };
  auto sum_y = [&](const std::vector<int>& arcs, int k, int r) {
    LinExpr e;
    for (int a : arcs) e.add(L.Y(a, k, r), 1.0);
    return e;
  };
  auto sum_y_all = [&](const std::vector<int>& arcs, int r) {
    LinExpr e;
    for (int k = 0; k < nk; ++k) e += sum_y(arcs, k, r);
    return e;
  };
  auto row = [&](int eq, const std::string& idx, const LinExpr& lhs, Sense s, const LinExpr& rhs) {
    m.add_constraint(make_row("c" + std::to_string(eq) + idx, eq, lhs, s, rhs));
  };

  // (2)-(4) vehicle flow.
  for (int k = 0; k < nk; ++k) {
    row(2, idx_name({ks(k)}), sum_x(ai.out[inst.vehicles[k].origin], k), Sense::eq, 1.0);
  }
  for (int k = 0; k < nk; ++k) {
    row(3, idx_name({ks(k)}), sum_x(ai.in[ai.depot], k), Sense::eq, 1.0);
  }
  for (int k = 0; k < nk; ++k) {
    for (int i = 1; i <= n; ++i) {
      if (i == inst.vehicles[k].origin) continue;
      row(4, idx_name({ks(k), nd(i)}), sum_x(ai.out[i], k) - sum_x(ai.in[i], k), Sense::eq, 0.0);
    }
  }
  // (5)-(7) passenger flow.
  for (int r = 0; r < nr; ++r) {
    row(5, idx_name({rs(r)}), sum_y_all(ai.out[inst.requests[r].pickup], r), Sense::eq, 1.0);
  }
  for (int r = 0; r < nr; ++r) {
    row(6, idx_name({rs(r)}), sum_y_all(ai.in[inst.requests[r].dropoff], r), Sense::eq, 1.0);
  }
  for (int r = 0; r < nr; ++r) {
    for (int i = 1; i <= n; ++i) {
      if (i == inst.requests[r].pickup || i == inst.requests[r].dropoff) continue;
      row(7, idx_name({rs(r), nd(i)}), sum_y_all(ai.out[i], r) - sum_y_all(ai.in[i], r),
          Sense::eq, 0.0);
    }
  }
  // (8) capacity linkage, (9) one vehicle per arc per request.
  for (int a = 0; a < na; ++a) {
    for (int k = 0; k < nk; ++k) {
      LinExpr load;
      for (int r = 0; r < nr; ++r) load.add(L.Y(a, k, r), inst.requests[r].qty);
      row(8, idx_name({nd(ai.arcs[a].from), nd(ai.arcs[a].to), ks(k)}), load, Sense::le,
          LinExpr::var(L.X(a, k), inst.vehicles[k].capacity));
    }
  }
  for (int a = 0; a < na; ++a) {
    for (int r = 0; r < nr; ++r) {
      LinExpr e;
      for (int k = 0; k < nk; ++k) e.add(L.Y(a, k, r), 1.0);
      row(9, idx_name({nd(ai.arcs[a].from), nd(ai.arcs[a].to), rs(r)}), e, Sense::le, 1.0);
    }
  }
  // (10) no passenger flow into the depot.
  for (int k = 0; k < nk; ++k) {
    LinExpr e;
    for (int r = 0; r < nr; ++r) e += sum_y(ai.in[ai.depot], k, r);
    row(10, idx_name({ks(k)}), e, Sense::eq, 0.0);
  }
  // (11) passenger time propagation, (12) precedence.
  for (int r = 0; r < nr; ++r) {
    for (int p = 0; p < np; ++p) {
      const int a = ai.physical[p];
      const auto& arc = ai.arcs[a];
      LinExpr carried;
      for (int k = 0; k < nk; ++k) carried.add(L.Y(a, k, r), 1.0);
      row(11, idx_name({nd(arc.from), nd(arc.to), rs(r)}),
          LinExpr::var(L.TP(arc.from, r)) + LinExpr(arc.time), Sense::le,
          LinExpr::var(L.TP(arc.to, r)) + M * (LinExpr(1.0) - carried));
    }
  }
  for (int r = 0; r < nr; ++r) {
    row(12, idx_name({rs(r)}), LinExpr::var(L.TP(inst.requests[r].pickup, r)), Sense::le,
        LinExpr::var(L.TP(inst.requests[r].dropoff, r)));
  }
  // (23) start at time zero, (24) zero time at untouched nodes.
  for (int k = 0; k < nk; ++k) {
    row(23, idx_name({ks(k)}), LinExpr::var(L.TV(inst.vehicles[k].origin, k)), Sense::eq, 0.0);
  }
  for (int i = 1; i <= n; ++i) {
    for (int k = 0; k < nk; ++k) {
      row(24, idx_name({nd(i), ks(k)}), LinExpr::var(L.TV(i, k)), Sense::le,
          M * (sum_x(ai.in[i], k) + sum_x(ai.out[i], k)));
    }
  }
  // (26)-(32) arrival-time continuity per undirected edge; (33)-(35) dwell
  // products per directed arc.
  for (int p = 0; p < np; ++p) {
    const int a = ai.physical[p];
    const auto& arc = ai.arcs[a];
    if (arc.from > arc.to) continue;
    const int rev = ai.by_ends.at({arc.to, arc.from});
    const int prev = ai.physical_pos[rev];
    const int i = arc.from;
    const int j = arc.to;
    for (int k = 0; k < nk; ++k) {
      const std::string suffix = nd(i) + "_" + nd(j) + "_" + ks(k);
      const LinExpr both = LinExpr::var(L.X(a, k)) + LinExpr::var(L.X(rev, k));
      row(26, "_" + suffix, LinExpr::var(L.Z(p, k)), Sense::eq, LinExpr::var(L.Z(prev, k)));
      const LinExpr side_i =
          LinExpr::var(L.TV(i, k)) + LinExpr::var(L.X(a, k), arc.time) + LinExpr::var(L.S(p, k));
      const LinExpr side_j = LinExpr::var(L.TV(j, k)) +
                             LinExpr::var(L.X(rev, k), ai.arcs[rev].time) +
                             LinExpr::var(L.S(prev, k));
      for (auto& c : product_rows(suffix, {27, 28, 29}, L.Z(p, k), both, side_i, M)) {
        m.add_constraint(std::move(c));
      }
      for (auto& c : product_rows(suffix, {30, 31, 32}, L.Z(prev, k), both, side_j, M)) {
        m.add_constraint(std::move(c));
      }
    }
  }
  for (int p = 0; p < np; ++p) {
    const int a = ai.physical[p];
    const auto& arc = ai.arcs[a];
    for (int k = 0; k < nk; ++k) {
      const std::string suffix = nd(arc.from) + "_" + nd(arc.to) + "_" + ks(k);
      for (auto& c : product_rows(suffix, {33, 34, 35}, L.S(p, k), LinExpr::var(L.X(a, k)),
                                  LinExpr::var(L.U(arc.from, k)), M)) {
        m.add_constraint(std::move(c));
      }
    }
  }
  // (39) pickup assignment, (40)-(43) wait time.
  for (int k = 0; k < nk; ++k) {
    for (int r = 0; r < nr; ++r) {
      row(39, idx_name({ks(k), rs(r)}), LinExpr::var(L.V(k, r)), Sense::eq,
          sum_y(ai.out[inst.requests[r].pickup], k, r));
    }
  }
  for (int r = 0; r < nr; ++r) {
    LinExpr e;
    for (int k = 0; k < nk; ++k) e.add(L.W(k, r), 1.0);
    row(40, idx_name({rs(r)}), LinExpr::var(L.TP(inst.requests[r].pickup, r)), Sense::eq, e);
  }
  for (int k = 0; k < nk; ++k) {
    for (int r = 0; r < nr; ++r) {
      for (auto& c : product_rows(ks(k) + "_" + rs(r), {41, 42, 43}, L.W(k, r),
                                  LinExpr::var(L.V(k, r)),
                                  LinExpr::var(L.TV(inst.requests[r].pickup, k)), M)) {
        m.add_constraint(std::move(c));
      }
    }
  }
  // (44)-(46) transfer capture.
  for (int r = 0; r < nr; ++r) {
    for (int i = 1; i <= n; ++i) {
      for (int k = 0; k < nk; ++k) {
        for (int l = 0; l < nk; ++l) {
          if (l == k) continue;
          const std::string idx = idx_name({rs(r), nd(i), ks(k), ks(l)});
          const LinExpr in_k = sum_y(ai.in[i], k, r);
          const LinExpr out_l = sum_y(ai.out[i], l, r);
          const LinExpr f = LinExpr::var(L.F(r, i, k, l));
          row(44, idx, in_k + out_l, Sense::le, f + LinExpr(1.0));
          row(45, idx, f, Sense::le, in_k);
          row(46, idx, f, Sense::le, out_l);
        }
      }
    }
  }
  // (47) dwell only where a transfer happens.
  if (nk > 1) {
    for (int i = 1; i <= n; ++i) {
      for (int k = 0; k < nk; ++k) {
        LinExpr e;
        for (int r = 0; r < nr; ++r) {
          for (int l = 0; l < nk; ++l) {
            if (l == k) continue;
            e.add(L.F(r, i, k, l), 1.0).add(L.F(r, i, l, k), 1.0);
          }
        }
        row(47, idx_name({nd(i), ks(k)}), LinExpr::var(L.U(i, k)), Sense::le, M * e);
      }
    }
  }
  // (48)-(49) synchronization windows.
  for (int i = 1; i <= n; ++i) {
    for (int k = 0; k < nk; ++k) {
      for (int l = 0; l < nk; ++l) {
        if (l == k) continue;
        for (int r = 0; r < nr; ++r) {
          const std::string idx = idx_name({nd(i), ks(k), ks(l), rs(r)});
          const LinExpr slack = M * (LinExpr(1.0) - LinExpr::var(L.F(r, i, k, l)));
          row(48, idx, LinExpr::var(L.TV(i, k)) - LinExpr::var(L.TV(i, l)) - LinExpr::var(L.U(i, l)),
              Sense::le, slack);
          row(49, idx, LinExpr::var(L.TV(i, l)) - LinExpr::var(L.TV(i, k)) - LinExpr::var(L.U(i, k)),
              Sense::le, slack);
        }
      }
    }
  }

  std::stable_sort(m.constraints.begin(), m.constraints.end(),
                   [](const Constraint& a, const Constraint& b) { return a.equation < b.equation; });
  return m;
}

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_terms(std::ostringstream& os, const MilpModel& model, const std::vector<Term>& terms) {
  if (terms.empty()) {
    os << " 0 " << model.variables.front().name;
    return;
  }
  int on_line = 0;
  bool first = true;
  for (const auto& [i, c] : terms) {
    if (on_line == 8) {
      os << "\n  ";
      on_line = 0;
    }
    const double mag = std::abs(c);
    os << (first ? (c < 0 ? " - " : " ") : (c < 0 ? " - " : " + "));
    if (mag != 1.0) os << fmt_num(mag) << ' ';
    os << model.variables[i].name;
    first = false;
    ++on_line;
  }
}

}  // namespace

std::string export_lp(const MilpModel& model) {
  std::ostringstream os;
  os << "\\ PDPSET model: " << model.variables.size() << " variables, "
     << model.constraints.size() << " constraints, M = " << fmt_num(model.big_m) << "\n";
  os << "Minimize\n obj:";
  write_terms(os, model, model.objective);
  os << "\nSubject To\n";
  for (const auto& row : model.constraints) {
    os << ' ' << row.name << ':';
    write_terms(os, model, row.terms);
    switch (row.sense) {
      case Sense::le: os << " <= "; break;
      case Sense::ge: os << " >= "; break;
      case Sense::eq: os << " = "; break;
    }
    os << fmt_num(row.rhs) << '\n';
  }
  os << "Bounds\n";
  for (const auto& v : model.variables) {
    if (v.kind == VarKind::binary) continue;
    if (std::isinf(v.ub)) {
      os << ' ' << v.name << " >= " << fmt_num(v.lb) << '\n';
    } else {
      os << ' ' << fmt_num(v.lb) << " <= " << v.name << " <= " << fmt_num(v.ub) << '\n';
    }
  }
  os << "Binaries\n";
  int on_line = 0;
  for (const auto& v : model.variables) {
    if (v.kind != VarKind::binary) continue;
    os << ' ' << v.name;
    if (++on_line == 8) {
      os << '\n';
      on_line = 0;
    }
  }
  if (on_line != 0) os << '\n';
  os << "End\n";
  return os.str();
}

namespace {

constexpr double kPathTol = 1e-9;
constexpr long kPathBudget = 2'000'000;

// One stop per run of consecutive events at the same node.
struct Stop {
  NodeId node;
  std::size_t first;
  std::size_t last;  // exclusive
};

std::vector<Stop> stops_of(const std::vector<Event>& route) {
  std::vector<Stop> out;
  for (std::size_t e = 0; e < route.size(); ++e) {
    if (!out.empty() && out.back().node == route[e].node) {
      out.back().last = e + 1;
    } else {
      out.push_back({route[e].node, e, e + 1});
    }
  }
  return out;
}

// Finds a node sequence through all stop locations along shortest paths that
// never revisits a node. Neighbors are tried in ascending id order.
bool expand_path(const GridNetwork& net, const std::vector<NodeId>& targets, std::size_t next,
                 std::vector<NodeId>& path, std::vector<char>& visited, long& budget) {
  if (next == targets.size()) return true;
  const NodeId at = path.back();
  const NodeId goal = targets[next];
  if (at == goal) return expand_path(net, targets, next + 1, path, visited, budget);
  if (--budget < 0) return false;
  const auto d = net.dist_row(goal);
  const auto t = net.time_row(goal);
  std::vector<const Arc*> steps;
  for (std::size_t a : net.outbound(at)) steps.push_back(&net.arcs()[a]);
  std::sort(steps.begin(), steps.end(), [](const Arc* x, const Arc* y) { return x->to < y->to; });
  for (const Arc* arc : steps) {
    if (visited[arc->to]) continue;
    if (std::abs(arc->cost + d[arc->to] - d[at]) > kPathTol) continue;
    if (std::abs(arc->time + t[arc->to] - t[at]) > kPathTol) continue;
    visited[arc->to] = 1;
    path.push_back(arc->to);
    if (expand_path(net, targets, next, path, visited, budget)) return true;
    path.pop_back();
    visited[arc->to] = 0;
  }
  return false;
}

}  // namespace

Assignment plan_to_assignment(const Instance& inst, const Plan& plan) {
  if (auto v = check_feasible(inst, plan); !v.empty()) {
    throw Error(ErrorCode::not_representable, "plan is not feasible: " + v.front().message);
  }
  for (const auto& v : inst.vehicles) {
    if (v.destination) {
      throw Error(ErrorCode::unsupported,
                  "model export supports only the dummy depot as vehicle destination");
    }
  }
  const GridNetwork& net = inst.net();
  const Schedule sched = simulate(inst, plan);
  const int n = net.node_count();
  const int depot = n + 1;
  const int nk = static_cast<int>(inst.vehicles.size());
  const int nr = static_cast<int>(inst.requests.size());
  Assignment asg;

  // Passenger arcs: request -> list of (from, to, vehicle).
  struct Carried {
    NodeId from;
    NodeId to;
    int vehicle;
  };
  std::vector<std::vector<Carried>> carried(nr);

  for (int k = 0; k < nk; ++k) {
    const int kid = inst.vehicles[k].id;
    const auto& route = plan.routes[k];
    const auto stops = stops_of(route);
    const NodeId origin = inst.vehicles[k].origin;

    std::vector<NodeId> targets;
    for (const auto& s : stops) targets.push_back(s.node);
    std::vector<NodeId> path{origin};
    std::vector<char> visited(n + 1, 0);
    visited[origin] = 1;
    long budget = kPathBudget;
    if (!expand_path(net, targets, 0, path, visited, budget)) {
      throw Error(ErrorCode::not_representable,
                  "vehicle " + std::to_string(kid) +
                      " cannot follow its stops along shortest paths without revisiting a node");
    }

    // Per-stop dwell and onboard set after the stop.
    std::map<NodeId, double> dwell_at;
    std::map<NodeId, std::vector<int>> onboard_after;
    std::vector<int> onboard;
    std::map<NodeId, std::vector<int>> onboard_before;
    for (const auto& s : stops) {
      onboard_before[s.node] = onboard;
      int transfers = 0;
      double dwell = 0.0;
      for (std::size_t e = s.first; e < s.last; ++e) {
        const Event& ev = route[e];
        dwell += sched.dwell[k][e];
        if (ev.kind == EventKind::transfer) {
          ++transfers;
          // Dwell is only expressible where some passenger changes vehicle.
          if (ev.out.empty() && ev.in.empty() && sched.dwell[k][e] != 0.0) {
            throw Error(ErrorCode::not_representable,
                        "vehicle " + std::to_string(kid) + " waits at node " +
                            std::to_string(ev.node) + " for a transfer that moves nobody");
          }
          for (const auto* list : {&ev.out, &ev.in}) {
            for (int r : *list) {
              const Request& q = inst.requests[r];
              if (q.pickup == ev.node || q.dropoff == ev.node) {
                throw Error(ErrorCode::not_representable,
                            "request " + std::to_string(q.id) +
                                " changes vehicle at its own pickup or dropoff node");
              }
            }
          }
          for (int r : ev.out) std::erase(onboard, r);
          for (int r : ev.in) onboard.push_back(r);
          for (int r : ev.out) {
            asg.set(names::f(inst, inst.requests[r].id, ev.node, kid,
                             inst.vehicles[ev.partner].id),
                    1.0);
          }
        } else if (ev.kind == EventKind::pickup) {
          if (transfers > 0) {
            throw Error(ErrorCode::not_representable,
                        "vehicle " + std::to_string(kid) +
                            " picks up after a transfer dwell at the same node");
          }
          onboard.push_back(ev.request);
          asg.set(names::v(kid, inst.requests[ev.request].id), 1.0);
        } else {
          if (transfers > 0 && inst.wait_metric == WaitMetric::journey) {
            throw Error(ErrorCode::not_representable,
                        "vehicle " + std::to_string(kid) +
                            " drops off after a transfer dwell at the same node");
          }
          std::erase(onboard, ev.request);
        }
      }
      if (transfers > 1) {
        throw Error(ErrorCode::not_representable,
                    "vehicle " + std::to_string(kid) + " has several transfers at node " +
                        std::to_string(s.node));
      }
      dwell_at[s.node] = dwell;
      onboard_after[s.node] = onboard;
    }

    // Walk the expanded path assigning arcs, times and carried requests.
    std::vector<int> aboard;
    if (!stops.empty() && stops.front().node == origin) {
      aboard = onboard_after[origin];
    }
    double clock = 0.0;
    for (std::size_t p = 0; p < path.size(); ++p) {
      const NodeId i = path[p];
      const double dwell = dwell_at.count(i) ? dwell_at[i] : 0.0;
      asg.set(names::tv(inst, i, kid), clock);
      if (dwell != 0.0) asg.set(names::u(inst, i, kid), dwell);
      if (p > 0 && onboard_after.count(i)) aboard = onboard_after[i];
      const NodeId j = p + 1 < path.size() ? path[p + 1] : depot;
      asg.set(names::x(inst, i, j, kid), 1.0);
      if (j == depot) break;
      for (int r : aboard) {
        asg.set(names::y(inst, i, j, kid, inst.requests[r].id), 1.0);
        carried[r].push_back({i, j, k});
      }
      const double leg = net.shortest_time(i, j);
      const double side = clock + leg + dwell;
      asg.set(names::z(inst, i, j, kid), side);
      asg.set(names::z(inst, j, i, kid), side);
      if (dwell != 0.0) asg.set(names::s(inst, i, j, kid), dwell);
      clock = side;
    }
  }

  // Passenger times along each request's carried path.
  for (int r = 0; r < nr; ++r) {
    const Request& q = inst.requests[r];
    std::set<NodeId> heads;
    std::set<NodeId> tails;
    for (const auto& c : carried[r]) {
      if (!heads.insert(c.to).second || !tails.insert(c.from).second || c.to == q.pickup) {
        throw Error(ErrorCode::not_representable,
                    "request " + std::to_string(q.id) + " passes through a node twice");
      }
    }
    const int pk = sched.pickup_vehicle[r];
    const double t_pick = asg.get(names::tv(inst, q.pickup, inst.vehicles[pk].id));
    asg.set(names::w(inst.vehicles[pk].id, q.id), t_pick);
    asg.set(names::tp(inst, q.pickup, q.id), t_pick);
    for (const auto& c : carried[r]) {
      asg.set(names::tp(inst, c.to, q.id),
              asg.get(names::tv(inst, c.to, inst.vehicles[c.vehicle].id)));
    }
  }
  std::erase_if(asg.values, [](const auto& kv) { return kv.second == 0.0; });
  return asg;
}

bool route_representable(const Instance& inst, int vehicle, const std::vector<Event>& route) {
  const GridNetwork& net = inst.net();
  std::vector<NodeId> targets;
  for (const auto& s : stops_of(route)) targets.push_back(s.node);
  const NodeId origin = inst.vehicles[vehicle].origin;
  std::vector<NodeId> path{origin};
  std::vector<char> visited(net.node_count() + 1, 0);
  visited[origin] = 1;
  long budget = kPathBudget;
  return expand_path(net, targets, 0, path, visited, budget);
}

bool representable(const Instance& inst, const Plan& plan) {
  try {
    plan_to_assignment(inst, plan);
    return true;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::not_representable) return false;
    throw;
  }
}

std::vector<RowViolation> check_assignment(const MilpModel& model, const Assignment& asg,
                                           double tol) {
  std::vector<double> values(model.variables.size(), 0.0);
  for (const auto& [name, value] : asg.values) {
    const int idx = model.find(name);
    if (idx >= 0) values[idx] = value;
  }
  std::vector<RowViolation> out;
  for (const auto& row : model.constraints) {
    const double amount = row_violation(row, values);
    if (amount > tol) {
      out.push_back({row.name, row.equation, row_activity(row, values), row.rhs, amount});
    }
  }
  for (std::size_t i = 0; i < model.variables.size(); ++i) {
    const Variable& v = model.variables[i];
    const double x = values[i];
    if (x < v.lb - tol) out.push_back({v.name, 0, x, v.lb, v.lb - x});
    if (x > v.ub + tol) out.push_back({v.name, 0, x, v.ub, x - v.ub});
    if (v.kind == VarKind::binary) {
      const double frac = std::abs(x - std::round(x));
      if (frac > tol) out.push_back({v.name, 0, x, std::round(x), frac});
    }
  }
  return out;
}

double objective_value(const MilpModel& model, const Assignment& asg) {
  double total = 0.0;
  for (const auto& [i, c] : model.objective) total += c * asg.get(model.variables[i].name);
  return total;
}

SolutionImport parse_solution(const MilpModel& model, const std::string& text) {
  SolutionImport res;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name) || name.front() == '#') continue;
    double value = 0.0;
    if (!(ls >> value)) {
      res.warnings.push_back("line " + std::to_string(lineno) + ": missing value for " + name);
      continue;
    }
    if (model.find(name) < 0) {
      res.warnings.push_back("line " + std::to_string(lineno) + ": unknown variable " + name);
      continue;
    }
    res.assignment.set(name, value);
  }
  return res;
}

}  // namespace pdpset::milp

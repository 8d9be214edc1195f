#include "pdpset/graph.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <utility>

#include "pdpset/error.hpp"

namespace pdpset {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_dimension: return "invalid-dimension";
    case ErrorCode::invalid_node: return "invalid-node";
    case ErrorCode::generation: return "generation";
    case ErrorCode::parse: return "parse";
    case ErrorCode::structural: return "structural";
    case ErrorCode::sync_window: return "sync-window";
    case ErrorCode::construction: return "construction";
    case ErrorCode::not_representable: return "not-representable";
    case ErrorCode::oracle_limit: return "oracle-limit";
    case ErrorCode::unsupported: return "unsupported";
  }
  return "unknown";
}

GridNetwork::GridNetwork(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1 || static_cast<long long>(rows) * cols < 2) {
    throw Error(ErrorCode::invalid_dimension,
                "grid must have rows >= 1, cols >= 1 and at least 2 nodes (got " +
                    std::to_string(rows) + "x" + std::to_string(cols) + ")");
  }
  const int n = node_count();
  out_.resize(n + 1);
  in_.resize(n + 1);
  auto add = [this](NodeId a, NodeId b) {
    out_[a].push_back(arcs_.size());
    in_[b].push_back(arcs_.size());
    arcs_.push_back({a, b, 1.0, 1.0});
  };
  for (int r = 1; r <= rows; ++r) {
    for (int c = 1; c <= cols; ++c) {
      const NodeId i = node_at(r, c);
      if (c < cols) {
        add(i, i + 1);
        add(i + 1, i);
      }
      if (r < rows) {
        add(i, i + cols);
        add(i + cols, i);
      }
    }
  }
  dist_cache_ = std::make_unique<Cache>(n + 1);
  time_cache_ = std::make_unique<Cache>(n + 1);
}

void GridNetwork::check_node(NodeId i) const {
  if (!valid(i)) {
    throw Error(ErrorCode::invalid_node, "node " + std::to_string(i) +
                                             " outside 1.." +
                                             std::to_string(node_count()));
  }
}

std::span<const std::size_t> GridNetwork::outbound(NodeId i) const {
  check_node(i);
  return out_[i];
}

std::span<const std::size_t> GridNetwork::inbound(NodeId i) const {
  check_node(i);
  return in_[i];
}

void GridNetwork::set_edge(NodeId i, NodeId j, double cost, double time) {
  check_node(i);
  check_node(j);
  if (!(cost > 0.0) || !(time > 0.0)) {
    throw Error(ErrorCode::invalid_dimension, "arc cost and time must be positive");
  }
  bool found = false;
  for (auto& arc : arcs_) {
    if ((arc.from == i && arc.to == j) || (arc.from == j && arc.to == i)) {
      arc.cost = cost;
      arc.time = time;
      found = true;
    }
  }
  if (!found) {
    throw Error(ErrorCode::invalid_node, "no grid edge between " + std::to_string(i) +
                                             " and " + std::to_string(j));
  }
  unit_ = std::all_of(arcs_.begin(), arcs_.end(),
                      [](const Arc& a) { return a.cost == 1.0 && a.time == 1.0; });
  dist_cache_ = std::make_unique<Cache>(node_count() + 1);
  time_cache_ = std::make_unique<Cache>(node_count() + 1);
}

const std::vector<double>& GridNetwork::row(Cache& cache, NodeId source,
                                            bool by_time) const {
  check_node(source);
  std::call_once(cache.once[source], [&] {
    const int n = node_count();
    std::vector<double> dist(n + 1, std::numeric_limits<double>::infinity());
    dist[0] = 0.0;
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      for (std::size_t a : out_[u]) {
        const Arc& arc = arcs_[a];
        const double nd = d + (by_time ? arc.time : arc.cost);
        if (nd < dist[arc.to]) {
          dist[arc.to] = nd;
          heap.emplace(nd, arc.to);
        }
      }
    }
    cache.rows[source] = std::move(dist);
  });
  return cache.rows[source];
}

std::span<const double> GridNetwork::dist_row(NodeId source) const {
  return row(*dist_cache_, source, false);
}

std::span<const double> GridNetwork::time_row(NodeId source) const {
  return row(*time_cache_, source, true);
}

double GridNetwork::shortest_dist(NodeId i, NodeId j) const {
  check_node(j);
  return dist_row(i)[j];
}

double GridNetwork::shortest_time(NodeId i, NodeId j) const {
  check_node(j);
  return time_row(i)[j];
}

std::vector<NodeId> GridNetwork::nodes_within(NodeId i, double range) const {
  if (range < 0.0) throw Error(ErrorCode::invalid_dimension, "search range must be >= 0");
  const auto d = dist_row(i);
  std::vector<NodeId> out;
  for (NodeId j = 1; j <= node_count(); ++j) {
    if (d[j] <= range) out.push_back(j);
  }
  return out;
}

double GridNetwork::diameter_time() const {
  if (unit_) return static_cast<double>((rows_ - 1) + (cols_ - 1));
  double best = 0.0;
  for (NodeId i = 1; i <= node_count(); ++i) {
    const auto t = time_row(i);
    best = std::max(best, *std::max_element(t.begin() + 1, t.end()));
  }
  return best;
}

std::shared_ptr<GridNetwork> build_grid(int rows, int cols) {
  return std::make_shared<GridNetwork>(rows, cols);
}

}  // namespace pdpset

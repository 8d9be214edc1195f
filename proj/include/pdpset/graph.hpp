#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace pdpset {

// 1-based, row-major node id.
using NodeId = int;

struct Arc {
  NodeId from;
  NodeId to;
  double cost;
  double time;
};

// Undirected grid with both directions of every edge stored as arcs.
// Shortest-path rows are computed lazily per source and cached; the cache is
// internally synchronized so a network can be shared across threads.
class GridNetwork {
 public:
  GridNetwork(int rows, int cols);

  GridNetwork(const GridNetwork&) = delete;
  GridNetwork& operator=(const GridNetwork&) = delete;

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int node_count() const noexcept { return rows_ * cols_; }
  bool valid(NodeId i) const noexcept { return i >= 1 && i <= node_count(); }

  int row_of(NodeId i) const { return (i - 1) / cols_ + 1; }
  int col_of(NodeId i) const { return (i - 1) % cols_ + 1; }
  NodeId node_at(int row, int col) const { return (row - 1) * cols_ + col; }

  std::span<const Arc> arcs() const noexcept { return arcs_; }
  // Indices into arcs() leaving / entering node i.
  std::span<const std::size_t> outbound(NodeId i) const;
  std::span<const std::size_t> inbound(NodeId i) const;

  // Overrides the cost and time of both directions of edge {i, j}. Only legal
  // before the first distance query.
  void set_edge(NodeId i, NodeId j, double cost, double time);
  bool unit_weights() const noexcept { return unit_; }

  double shortest_dist(NodeId i, NodeId j) const;
  double shortest_time(NodeId i, NodeId j) const;
  std::span<const double> dist_row(NodeId source) const;
  std::span<const double> time_row(NodeId source) const;

  // All nodes within `range` shortest-path distance of i, ascending.
  std::vector<NodeId> nodes_within(NodeId i, double range) const;

  // Largest pairwise shortest travel time.
  double diameter_time() const;

 private:
  struct Cache {
    explicit Cache(std::size_t n) : rows(n), once(n) {}
    std::vector<std::vector<double>> rows;
    std::vector<std::once_flag> once;
  };

  void check_node(NodeId i) const;
  const std::vector<double>& row(Cache& cache, NodeId source, bool by_time) const;

  int rows_;
  int cols_;
  bool unit_ = true;
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  mutable std::unique_ptr<Cache> dist_cache_;
  mutable std::unique_ptr<Cache> time_cache_;
};

std::shared_ptr<GridNetwork> build_grid(int rows, int cols);

}  // namespace pdpset

#include "gridsens/bridges.hpp"

#include <algorithm>

namespace gridsens {
namespace {

struct Edge {
  std::size_t to;
  std::size_t id;
};

std::vector<std::vector<Edge>> adjacency(const GridCase& grid, std::optional<std::size_t> skip) {
  std::vector<std::vector<Edge>> adj(grid.bus_count());
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    if (!grid.branches()[l].closed() || (skip && *skip == l)) continue;
    const std::size_t f = grid.from_index(l);
    const std::size_t t = grid.to_index(l);
    adj[f].push_back({t, l});
    adj[t].push_back({f, l});
  }
  return adj;
}

}  // namespace

std::vector<std::size_t> find_bridges(const GridCase& grid) {
  const auto adj = adjacency(grid, std::nullopt);
  const std::size_t n = grid.bus_count();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> order(n, kUnvisited);
  std::vector<std::size_t> low(n, 0);
  std::vector<std::size_t> bridges;
  std::size_t counter = 0;

  struct Frame {
    std::size_t bus;
    std::size_t parent_edge;
    std::size_t next;
  };
  std::vector<Frame> stack;

  for (std::size_t root = 0; root < n; ++root) {
    if (order[root] != kUnvisited) continue;
    order[root] = low[root] = counter++;
    stack.push_back({root, kUnvisited, 0});
    while (!stack.empty()) {
      Frame& frame = stack.back();
      if (frame.next < adj[frame.bus].size()) {
        const Edge edge = adj[frame.bus][frame.next++];
        if (edge.id == frame.parent_edge) continue;
        if (order[edge.to] == kUnvisited) {
          order[edge.to] = low[edge.to] = counter++;
          stack.push_back({edge.to, edge.id, 0});
        } else {
          low[frame.bus] = std::min(low[frame.bus], order[edge.to]);
        }
        continue;
      }
      const Frame done = frame;
      stack.pop_back();
      if (stack.empty()) break;
      const std::size_t parent = stack.back().bus;
      low[parent] = std::min(low[parent], low[done.bus]);
      if (low[done.bus] > order[parent]) bridges.push_back(done.parent_edge);
    }
  }
  std::sort(bridges.begin(), bridges.end());
  return bridges;
}

bool is_connected(const GridCase& grid, std::optional<std::size_t> skip_branch) {
  const auto adj = adjacency(grid, skip_branch);
  std::vector<bool> seen(grid.bus_count(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    for (const Edge& e : adj[k]) {
      if (!seen[e.to]) {
        seen[e.to] = true;
        ++reached;
        stack.push_back(e.to);
      }
    }
  }
  return reached == grid.bus_count();
}

}  // namespace gridsens

#include "kernelpf/graph.hpp"

#include <numeric>
#include <queue>

#include "kernelpf/errors.hpp"

namespace kernelpf {

std::vector<std::vector<std::size_t>> support_graph(const Matrix& m, double threshold) {
  std::vector<std::vector<std::size_t>> graph(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) > threshold) graph[i].push_back(j);
  return graph;
}

namespace {

std::vector<bool> reachable_from(const std::vector<std::vector<std::size_t>>& graph,
                                 std::size_t start) {
  std::vector<bool> seen(graph.size(), false);
  std::queue<std::size_t> frontier;
  seen[start] = true;
  frontier.push(start);
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop();
    for (std::size_t w : graph[v])
      if (!seen[w]) {
        seen[w] = true;
        frontier.push(w);
      }
  }
  return seen;
}

std::vector<std::vector<std::size_t>> reversed(
    const std::vector<std::vector<std::size_t>>& graph) {
  std::vector<std::vector<std::size_t>> rev(graph.size());
  for (std::size_t v = 0; v < graph.size(); ++v)
    for (std::size_t w : graph[v]) rev[w].push_back(v);
  return rev;
}

}  // namespace

bool strongly_connected(const std::vector<std::vector<std::size_t>>& graph) {
  if (graph.empty()) return false;
  for (bool ok : reachable_from(graph, 0))
    if (!ok) return false;
  for (bool ok : reachable_from(reversed(graph), 0))
    if (!ok) return false;
  return true;
}

PeriodResult detect_period_graph(const std::vector<std::vector<std::size_t>>& graph) {
  if (!strongly_connected(graph))
    throw PreconditionError("reducible-kernel", "period is defined for irreducible kernels");

  // BFS levels from state 0; the period is the gcd of level differences
  // (level(v) + 1 - level(w)) over all edges v -> w, which equals the gcd
  // of all cycle lengths through state 0.
  const std::size_t n = graph.size();
  std::vector<long long> level(n, -1);
  std::queue<std::size_t> frontier;
  level[0] = 0;
  frontier.push(0);
  long long d = 0;
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop();
    for (std::size_t w : graph[v]) {
      if (level[w] < 0) {
        level[w] = level[v] + 1;
        frontier.push(w);
      } else {
        d = std::gcd(d, level[v] + 1 - level[w]);
      }
    }
  }
  if (d == 0) d = 1;

  PeriodResult result;
  result.d = static_cast<std::size_t>(d < 0 ? -d : d);
  result.classes.resize(n);
  for (std::size_t v = 0; v < n; ++v)
    result.classes[v] = static_cast<std::size_t>(((level[v] % d) + d) % d);
  return result;
}

}  // namespace kernelpf

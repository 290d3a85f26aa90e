#include "mulearn/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "mulearn/core.hpp"

namespace mulearn {

FlowNetwork::FlowNetwork(int num_nodes, int source, int sink)
    : source_(source), sink_(sink), first_(num_nodes, -1) {
  if (num_nodes < 2 || source < 0 || sink < 0 || source >= num_nodes || sink >= num_nodes || source == sink)
    throw ValidationError("flow network needs distinct source and sink among its nodes");
}

int FlowNetwork::add_node() {
  first_.push_back(-1);
  return num_nodes() - 1;
}

void FlowNetwork::add_arc(int from, int to, double capacity, double reverse_capacity) {
  if (from < 0 || to < 0 || from >= num_nodes() || to >= num_nodes())
    throw ValidationError("arc endpoint out of range");
  if (!(capacity >= 0) || !(reverse_capacity >= 0)) throw ValidationError("arc capacities must be nonnegative");
  arcs_.push_back({to, first_[from], capacity});
  first_[from] = static_cast<int>(arcs_.size()) - 1;
  arcs_.push_back({from, first_[to], reverse_capacity});
  first_[to] = static_cast<int>(arcs_.size()) - 1;
}

double FlowNetwork::infinity_sentinel() const {
  double total = 0.0;
  for (const auto& a : arcs_)
    if (std::isfinite(a.capacity)) total += a.capacity;
  return total + 1.0;
}

struct MaxFlowSolver {
  explicit MaxFlowSolver(const FlowNetwork& net) : n(net.num_nodes()), s(net.source()), t(net.sink()) {
    head = net.first_;
    const double inf = net.infinity_sentinel();
    for (const auto& a : net.arcs_) {
      to.push_back(a.to);
      next.push_back(a.next);
      residual.push_back(std::isfinite(a.capacity) ? a.capacity : inf);
    }
    tolerance = 1e-13 * inf;
  }

  bool build_levels() {
    level.assign(n, -1);
    std::queue<int> q;
    level[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int a = head[v]; a != -1; a = next[a]) {
        if (residual[a] > tolerance && level[to[a]] < 0) {
          level[to[a]] = level[v] + 1;
          q.push(to[a]);
        }
      }
    }
    return level[t] >= 0;
  }

  double push(int v, double limit) {
    if (v == t) return limit;
    for (int& a = cursor[v]; a != -1; a = next[a]) {
      const int w = to[a];
      if (residual[a] <= tolerance || level[w] != level[v] + 1) continue;
      const double got = push(w, std::min(limit, residual[a]));
      if (got > 0) {
        residual[a] -= got;
        residual[a ^ 1] += got;
        return got;
      }
    }
    return 0.0;
  }

  MinCut run() {
    MinCut out;
    while (build_levels()) {
      cursor = head;
      for (double f; (f = push(s, std::numeric_limits<double>::infinity())) > 0;) out.value += f;
    }
    // Residual reachability from the source defines the canonical cut.
    out.source_side.assign(n, false);
    std::queue<int> q;
    out.source_side[s] = true;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int a = head[v]; a != -1; a = next[a]) {
        if (residual[a] > tolerance && !out.source_side[to[a]]) {
          out.source_side[to[a]] = true;
          q.push(to[a]);
        }
      }
    }
    return out;
  }

  int n, s, t;
  double tolerance = 0.0;
  std::vector<int> head, next, to, level, cursor;
  std::vector<double> residual;
};

MinCut max_flow(const FlowNetwork& network) { return MaxFlowSolver(network).run(); }

double cut_capacity(const FlowNetwork& network, const std::vector<bool>& source_side) {
  const double inf = network.infinity_sentinel();
  double total = 0.0;
  const auto& arcs = network.arcs();
  for (int v = 0; v < network.num_nodes(); ++v) {
    if (!source_side[v]) continue;
    for (int a = network.first_arc(v); a != -1; a = arcs[a].next) {
      if (source_side[arcs[a].to]) continue;
      total += std::isfinite(arcs[a].capacity) ? arcs[a].capacity : inf;
    }
  }
  return total;
}

}  // namespace mulearn

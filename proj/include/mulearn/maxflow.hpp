#pragma once

#include <limits>
#include <vector>

namespace mulearn {

/// Directed capacitated network with explicit source and sink.
///
/// Arcs are stored together with their reverse arcs. An arc may be given
/// capacity `kInfinity`; at solve time it is replaced by the sentinel
/// (sum of all finite capacities + 1), which exceeds the capacity of every
/// cut avoiding infinite arcs.
class FlowNetwork {
 public:
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  FlowNetwork(int num_nodes, int source, int sink);

  int add_node();
  /// Adds from->to with `capacity` and to->from with `reverse_capacity`.
  void add_arc(int from, int to, double capacity, double reverse_capacity = 0.0);

  int num_nodes() const { return static_cast<int>(first_.size()); }
  int source() const { return source_; }
  int sink() const { return sink_; }

  double infinity_sentinel() const;

  struct Arc {
    int to;
    int next;  // next arc out of the same node, -1 terminates
    double capacity;
  };
  const std::vector<Arc>& arcs() const { return arcs_; }
  int first_arc(int node) const { return first_[node]; }

 private:
  friend struct MaxFlowSolver;
  int source_;
  int sink_;
  std::vector<int> first_;
  std::vector<Arc> arcs_;  // arc 2k and 2k+1 are mutual reverses
};

struct MinCut {
  double value = 0.0;
  /// source_side[v] is true iff v is reachable from the source in the final
  /// residual network (the minimal source set among all minimum cuts).
  std::vector<bool> source_side;
};

/// Exact maximum flow (Dinic's blocking-flow algorithm) and the canonical
/// minimum cut.
MinCut max_flow(const FlowNetwork& network);

/// Capacity of the cut (S, V \ S) in `network`, with infinite arcs replaced
/// by the sentinel.
double cut_capacity(const FlowNetwork& network, const std::vector<bool>& source_side);

}  // namespace mulearn

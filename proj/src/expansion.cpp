#include <algorithm>
#include <cmath>

#include "mulearn/inference.hpp"
#include "mulearn/maxflow.hpp"

namespace mulearn {

namespace {

// Binary move energy over x in {0 = keep, 1 = take alpha}. Graph nodes on the
// source side of the minimum cut take alpha, so the canonical minimal source
// set prefers keeping labels on ties.
class MoveGraph {
 public:
  explicit MoveGraph(int num_vars) : net_(num_vars + 2, 0, 1), to_keep_(num_vars + 2, 0.0), to_take_(num_vars + 2, 0.0) {}

  int var(int index) const { return index + 2; }

  int add_aux() {
    to_keep_.push_back(0.0);
    to_take_.push_back(0.0);
    return net_.add_node();
  }

  // cost0 if the node keeps its label, cost1 if it takes alpha.
  void add_unary(int node, double cost0, double cost1) {
    const double m = std::min(cost0, cost1);
    to_keep_[node] += cost0 - m;
    to_take_[node] += cost1 - m;
  }

  // Cost paid when `a` takes alpha while `b` keeps its label.
  void add_penalty(int a, int b, double cost) {
    if (cost > 0) net_.add_arc(a, b, cost);
  }

  // E(x_a, x_b) with e00 = E(0,0), e01 = E(0,1), e10 = E(1,0), e11 = E(1,1).
  void add_pair(int a, int b, double e00, double e01, double e10, double e11) {
    const double lambda = e01 + e10 - e00 - e11;
    if (lambda < -1e-9 * (1.0 + std::abs(e01) + std::abs(e10)))
      throw InvariantError("non-submodular pairwise term in expansion move");
    add_unary(a, 0.0, e10 - e00);
    add_unary(b, 0.0, e11 - e10);
    add_penalty(b, a, std::max(0.0, lambda));
  }

  // cost * [any of `nodes` takes alpha]
  void add_acquire_cost(const std::vector<int>& nodes, double cost) {
    if (nodes.empty() || cost <= 0) return;
    const int z = add_aux();
    add_unary(z, 0.0, cost);
    for (int v : nodes) add_penalty(v, z, cost);
  }

  // cost * [any of `nodes` keeps its label]
  void add_keep_cost(const std::vector<int>& nodes, double cost) {
    if (nodes.empty() || cost <= 0) return;
    const int z = add_aux();
    add_unary(z, cost, 0.0);
    for (int v : nodes) add_penalty(z, v, cost);
  }

  std::vector<bool> solve() {
    for (int v = 2; v < net_.num_nodes(); ++v) {
      if (to_keep_[v] > 0) net_.add_arc(net_.source(), v, to_keep_[v]);
      if (to_take_[v] > 0) net_.add_arc(v, net_.sink(), to_take_[v]);
    }
    return max_flow(net_).source_side;
  }

 private:
  FlowNetwork net_;
  std::vector<double> to_keep_;  // s -> v, cut when v keeps
  std::vector<double> to_take_;  // v -> t, cut when v takes alpha
};

}  // namespace

Labelling expand(const EnergyProblem& p, const Labelling& current, Label alpha) {
  if (static_cast<int>(current.size()) != p.num_nodes) throw ValidationError("labelling length does not match problem");
  if (alpha < 1 || alpha > p.num_labels) throw ValidationError("expansion label out of range");

  std::vector<int> var(p.num_nodes, -1);
  int num_vars = 0;
  bool alpha_present = false;
  for (int i = 0; i < p.num_nodes; ++i) {
    if (current[i] == alpha)
      alpha_present = true;
    else if (p.can_take(i, alpha))
      var[i] = num_vars++;
  }
  if (num_vars == 0) return current;

  MoveGraph g(num_vars);
  auto gvar = [&](int i) { return g.var(var[i]); };

  for (int i = 0; i < p.num_nodes; ++i)
    if (var[i] >= 0) g.add_unary(gvar(i), p.unary_at(i, current[i]), p.unary_at(i, alpha));

  for (const auto& t : p.pairwise) {
    const bool fi = var[t.i] >= 0, fj = var[t.j] >= 0;
    const Label a = current[t.i], b = current[t.j];
    auto cost = [&](Label li, Label lj) { return li == lj ? 0.0 : t.weight; };
    if (fi && fj) {
      g.add_pair(gvar(t.i), gvar(t.j), cost(a, b), cost(a, alpha), cost(alpha, b), 0.0);
    } else if (fi) {
      g.add_unary(gvar(t.i), cost(a, b), cost(alpha, b));
    } else if (fj) {
      g.add_unary(gvar(t.j), cost(a, b), cost(a, alpha));
    }
  }

  // Label costs: alpha may be acquired, any other used label may be vacated.
  std::vector<std::vector<int>> holders(p.num_labels + 1);
  std::vector<char> pinned(p.num_labels + 1, 0);
  for (int i = 0; i < p.num_nodes; ++i) {
    if (var[i] >= 0)
      holders[current[i]].push_back(gvar(i));
    else
      pinned[current[i]] = 1;
  }
  std::vector<int> all_vars;
  for (int i = 0; i < p.num_nodes; ++i)
    if (var[i] >= 0) all_vars.push_back(gvar(i));
  for (Label k = 1; k <= p.num_labels; ++k) {
    const double h = p.label_costs[k - 1];
    if (h <= 0) continue;
    if (k == alpha) {
      if (!alpha_present) g.add_acquire_cost(all_vars, h);
    } else if (!pinned[k]) {
      g.add_keep_cost(holders[k], h);
    }
  }

  for (const auto& c : p.cliques) {
    if (c.cost <= 0) continue;
    std::vector<int> movers;
    bool fixed_hit = false;
    for (int i : c.nodes) {
      if (c.label == alpha) {
        if (current[i] == alpha) fixed_hit = true;
        else if (var[i] >= 0) movers.push_back(gvar(i));
      } else if (current[i] == c.label) {
        if (var[i] >= 0) movers.push_back(gvar(i));
        else fixed_hit = true;
      }
    }
    if (fixed_hit) continue;  // constant for this move
    if (c.label == alpha)
      g.add_acquire_cost(movers, c.cost);
    else
      g.add_keep_cost(movers, c.cost);
  }

  const auto take = g.solve();
  Labelling out = current;
  for (int i = 0; i < p.num_nodes; ++i)
    if (var[i] >= 0 && take[gvar(i)]) out[i] = alpha;
  return out;
}

Labelling alpha_expansion(const EnergyProblem& p, const Labelling& init, ExpansionStats* stats) {
  Labelling y = init;
  double e = energy(p, y);
  ExpansionStats local;
  constexpr int kMaxSweeps = 1000;
  for (bool improved = true; improved && local.sweeps < kMaxSweeps;) {
    improved = false;
    ++local.sweeps;
    for (Label alpha = 1; alpha <= p.num_labels; ++alpha) {
      Labelling next = expand(p, y, alpha);
      if (next == y) continue;
      const double e_next = energy(p, next);
      if (e_next < e - 1e-9) {
        y = std::move(next);
        e = e_next;
        improved = true;
        ++local.accepted_moves;
      }
    }
  }
  if (stats) *stats = local;
  return y;
}

Labelling map_inference(const Model& model, const Instance& instance) {
  const EnergyProblem p = build_energy(model, instance);
  return alpha_expansion(p, unary_argmin(p));
}

}  // namespace mulearn

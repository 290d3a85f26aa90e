#include <algorithm>

#include "mulearn/inference.hpp"

namespace mulearn {

EnergyProblem::EnergyProblem(int nodes, int labels)
    : num_nodes(nodes),
      num_labels(labels),
      unary(static_cast<std::size_t>(nodes) * labels, 0.0),
      label_costs(labels, 0.0) {}

bool EnergyProblem::can_take(int i, Label k) const {
  if (k < 1 || k > num_labels) return false;
  if (!clamps.empty() && clamps[i] != kUnlabelled && clamps[i] != k) return false;
  if (!allowed.empty() && !allowed[static_cast<std::size_t>(i) * num_labels + (k - 1)]) return false;
  return true;
}

void EnergyProblem::restrict_labels(int i, const std::vector<Label>& labels) {
  if (allowed.empty()) allowed.assign(static_cast<std::size_t>(num_nodes) * num_labels, 1);
  char* row = allowed.data() + static_cast<std::size_t>(i) * num_labels;
  std::vector<char> keep(num_labels, 0);
  for (Label k : labels) keep.at(k - 1) = 1;
  for (int k = 0; k < num_labels; ++k) row[k] = row[k] && keep[k];
}

void EnergyProblem::disallow(int i, Label k) {
  if (allowed.empty()) allowed.assign(static_cast<std::size_t>(num_nodes) * num_labels, 1);
  allowed[static_cast<std::size_t>(i) * num_labels + (k - 1)] = 0;
}

void EnergyProblem::clamp(int i, Label k) {
  if (clamps.empty()) clamps.assign(num_nodes, kUnlabelled);
  clamps[i] = k;
}

EnergyProblem build_energy(const Model& model, const Instance& instance) {
  if (model.num_labels() != instance.num_labels || model.unary_dim() != instance.unary_dim() ||
      model.pairwise_dim() != instance.edge_dim)
    throw ValidationError("model dimensions do not match instance '" + instance.id + "'");
  EnergyProblem p(instance.num_nodes(), instance.num_labels);
  for (int i = 0; i < p.num_nodes; ++i)
    for (Label k = 1; k <= p.num_labels; ++k) p.unary_at(i, k) = -unary_score(model, instance, i, k);
  for (const auto& e : instance.edges) {
    const double reward = pairwise_reward(model, e);
    if (reward < 0) throw InvariantError("negative pairwise reward on edge of instance '" + instance.id + "'");
    if (reward == 0) continue;
    p.pairwise.push_back({e.u, e.v, reward});
    p.offset -= reward;
  }
  return p;
}

double energy(const EnergyProblem& p, const Labelling& y) {
  if (static_cast<int>(y.size()) != p.num_nodes) throw ValidationError("labelling length does not match problem");
  double total = 0.0;
  std::vector<char> used(p.num_labels + 1, 0);
  for (int i = 0; i < p.num_nodes; ++i) {
    if (!p.can_take(i, y[i]))
      throw ValidationError("node " + std::to_string(i) + " may not take label " + std::to_string(y[i]));
    total += p.unary_at(i, y[i]);
    used[y[i]] = 1;
  }
  for (const auto& t : p.pairwise)
    if (y[t.i] != y[t.j]) total += t.weight;
  for (Label k = 1; k <= p.num_labels; ++k)
    if (used[k]) total += p.label_costs[k - 1];
  for (const auto& c : p.cliques)
    if (std::any_of(c.nodes.begin(), c.nodes.end(), [&](int i) { return y[i] == c.label; })) total += c.cost;
  return total;
}

Labelling unary_argmin(const EnergyProblem& p) {
  Labelling y(p.num_nodes, kUnlabelled);
  for (int i = 0; i < p.num_nodes; ++i) {
    double best = 0.0;
    for (Label k = 1; k <= p.num_labels; ++k) {
      if (!p.can_take(i, k)) continue;
      if (y[i] == kUnlabelled || p.unary_at(i, k) < best) {
        best = p.unary_at(i, k);
        y[i] = k;
      }
    }
    if (y[i] == kUnlabelled) throw InfeasibleError("node " + std::to_string(i) + " has no permitted label");
  }
  return y;
}

}  // namespace mulearn

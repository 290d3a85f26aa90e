#pragma once

#include <vector>

#include "mulearn/core.hpp"

namespace mulearn {

/// Potts difference cost: `weight` is paid when the endpoints disagree.
struct PottsTerm {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

/// Paid once if any node in `nodes` takes `label`.
struct CliqueCost {
  std::vector<int> nodes;
  Label label = 1;
  double cost = 0.0;
};

/// A minimization problem over labellings of V nodes with K labels:
///
///   E(y) = sum_i unary(i, y_i) + sum_{(i,j)} w_ij [y_i != y_j]
///        + sum_k h_k [k used] + sum_c cost_c [some node of c takes label_c]
///
/// subject to optional clamps and per-node allowed label sets. `offset` is
/// bookkeeping for callers that build the problem from a maximization:
/// E(y) + offset equals the negated maximand.
struct EnergyProblem {
  EnergyProblem() = default;
  EnergyProblem(int num_nodes, int num_labels);

  int num_nodes = 0;
  int num_labels = 0;
  std::vector<double> unary;  // num_nodes x num_labels, row-major, label k at column k-1
  std::vector<PottsTerm> pairwise;
  std::vector<double> label_costs;  // index k-1
  std::vector<CliqueCost> cliques;
  std::vector<Label> clamps;        // empty, or per node: 0 = free
  std::vector<char> allowed;        // empty, or num_nodes x num_labels mask
  double offset = 0.0;

  double& unary_at(int i, Label k) { return unary[static_cast<std::size_t>(i) * num_labels + (k - 1)]; }
  double unary_at(int i, Label k) const { return unary[static_cast<std::size_t>(i) * num_labels + (k - 1)]; }

  /// Label k may be assigned to node i under clamps and allowed sets.
  bool can_take(int i, Label k) const;
  void restrict_labels(int i, const std::vector<Label>& labels);
  void disallow(int i, Label k);
  void clamp(int i, Label k);
};

/// Energy of the negated discriminant: E(y) + offset == -score(model, x, y).
/// Pairwise equality rewards r_ij become difference costs r_ij with
/// offset -sum r_ij.
EnergyProblem build_energy(const Model& model, const Instance& instance);

/// Literal evaluation of every term. Throws ValidationError when the
/// labelling breaks a clamp or an allowed set.
double energy(const EnergyProblem& problem, const Labelling& labelling);

/// One optimal alpha-expansion move computed by a single minimum cut,
/// label and clique costs included via auxiliary nodes.
Labelling expand(const EnergyProblem& problem, const Labelling& current, Label alpha);

struct ExpansionStats {
  int sweeps = 0;
  int accepted_moves = 0;
};

/// Cycles expansion moves over labels in ascending order until a full sweep
/// improves the energy by no more than 1e-9.
Labelling alpha_expansion(const EnergyProblem& problem, const Labelling& init, ExpansionStats* stats = nullptr);

/// Per-node minimum of the unary table among permitted labels (lowest label
/// wins ties).
Labelling unary_argmin(const EnergyProblem& problem);

/// Approximate argmax of the discriminant function.
Labelling map_inference(const Model& model, const Instance& instance);

/// Inside-box nodes take the box label (later boxes overwrite earlier ones),
/// seed nodes take the seed label, and every other node takes the lowest
/// image-level label (the lowest annotation label when there is none).
Labelling latent_initialization(const Instance& instance, const WeakAnnotation& weak);

struct ConsistentInferenceStats {
  /// Pinpointing iterations spent on each box, aligned with `weak.boxes`.
  std::vector<int> pinpoint_iterations;
  /// Insider-superpixel count of each box.
  std::vector<int> insider_counts;
  /// Boxes left loose because every remaining insider was clamped.
  std::vector<int> loose_boxes;
};

struct ConsistentInferenceOptions {
  /// Give up on a box that cannot be tightened instead of throwing. Boxes
  /// of different labels that overlap can compete for the same superpixels.
  bool allow_loose_boxes = false;
};

/// Best-scoring labelling found under the weak annotation's constraints:
/// labels restricted to the annotation, seed superpixels clamped, box labels
/// confined to their boxes, and box tightness restored by pinpointing.
/// `init` seeds the expansion and is repaired to satisfy the constraints.
/// Throws InfeasibleError when some node has no permitted label or a box
/// cannot be tightened (unless the options allow loose boxes).
Labelling annotation_consistent_inference(const Model& model, const Instance& instance, const WeakAnnotation& weak,
                                          const Labelling& init, ConsistentInferenceStats* stats = nullptr,
                                          ConsistentInferenceOptions options = {});

/// Same, starting from latent_initialization.
Labelling annotation_consistent_inference(const Model& model, const Instance& instance, const WeakAnnotation& weak,
                                          ConsistentInferenceStats* stats = nullptr,
                                          ConsistentInferenceOptions options = {});

}  // namespace mulearn

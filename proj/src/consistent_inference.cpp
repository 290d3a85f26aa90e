#include <algorithm>

#include "mulearn/geometry.hpp"
#include "mulearn/inference.hpp"

namespace mulearn {

Labelling latent_initialization(const Instance& instance, const WeakAnnotation& weak) {
  const auto labels = weak.all_labels();
  if (labels.empty()) throw ValidationError("instance '" + instance.id + "': empty weak annotation");
  const Label fill = weak.image_level.empty() ? labels.front() : weak.image_level.front();
  Labelling y(instance.num_nodes(), fill);
  for (const auto& box : weak.boxes)
    for (int i : box_insiders(*instance.grid, box)) y[i] = box.label;
  for (const auto& seed : weak.seeds) y[instance.grid->node_at(seed.row, seed.col)] = seed.label;
  return y;
}

namespace {

void constrain_to_annotation(EnergyProblem& p, const Instance& instance, const WeakAnnotation& weak) {
  const auto box_labels = weak.box_labels();
  std::vector<Label> everywhere = weak.image_level;
  for (Label k : weak.seed_labels())
    if (!std::binary_search(box_labels.begin(), box_labels.end(), k)) everywhere.push_back(k);

  std::vector<std::vector<Label>> permitted(p.num_nodes, everywhere);
  for (Label k : box_labels) {
    const auto region = label_region(instance, weak, k);
    for (int i = 0; i < p.num_nodes; ++i)
      if (region[i]) permitted[i].push_back(k);
  }
  for (int i = 0; i < p.num_nodes; ++i) {
    if (permitted[i].empty())
      throw InfeasibleError("instance '" + instance.id + "': node " + std::to_string(i) +
                            " lies outside every box and no image-level label is available");
    p.restrict_labels(i, permitted[i]);
  }
  for (const auto& seed : weak.seeds) {
    const int i = instance.grid->node_at(seed.row, seed.col);
    if (!p.can_take(i, seed.label))
      throw InfeasibleError("instance '" + instance.id + "': seed label " + std::to_string(seed.label) +
                            " is not permitted at node " + std::to_string(i));
    p.clamp(i, seed.label);
  }
}

}  // namespace

Labelling annotation_consistent_inference(const Model& model, const Instance& instance, const WeakAnnotation& weak,
                                          const Labelling& init, ConsistentInferenceStats* stats,
                                          ConsistentInferenceOptions options) {
  validate_weak_annotation(weak, instance);
  if (static_cast<int>(init.size()) != instance.num_nodes())
    throw ValidationError("initial labelling length does not match instance '" + instance.id + "'");
  EnergyProblem p = build_energy(model, instance);
  constrain_to_annotation(p, instance, weak);

  Labelling y = init;
  for (int i = 0; i < p.num_nodes; ++i) {
    if (p.can_take(i, y[i])) continue;
    for (Label k = 1; k <= p.num_labels; ++k) {
      if (p.can_take(i, k)) {
        y[i] = k;
        break;
      }
    }
  }
  y = alpha_expansion(p, y);

  // Pinpointing: clamp one more insider to the box label and re-expand until
  // every shrunk box is touched on all four sides.
  std::vector<std::vector<int>> insiders;
  for (const auto& box : weak.boxes) insiders.push_back(box_insiders(*instance.grid, box));
  std::vector<int> iterations(weak.boxes.size(), 0);
  std::vector<char> loose(weak.boxes.size(), 0);
  for (;;) {
    std::size_t b = 0;
    while (b < weak.boxes.size() && (loose[b] || box_is_tight(*instance.grid, y, weak.boxes[b]))) ++b;
    if (b == weak.boxes.size()) break;
    const Label k = weak.boxes[b].label;
    int pick = -1;
    double best = 0.0;
    for (int i : insiders[b]) {
      const bool clamped = !p.clamps.empty() && p.clamps[i] != kUnlabelled;
      if (clamped || y[i] == k) continue;
      const double gain = p.unary_at(i, y[i]) - p.unary_at(i, k);
      if (pick < 0 || gain > best) {
        pick = i;
        best = gain;
      }
    }
    if (pick < 0 && options.allow_loose_boxes) {
      loose[b] = 1;
      continue;
    }
    if (pick < 0)
      throw InfeasibleError("instance '" + instance.id + "': box " + std::to_string(b) +
                            " cannot be made tight under the remaining clamps");
    p.clamp(pick, k);
    y[pick] = k;
    y = expand(p, y, k);
    ++iterations[b];
  }

  if (stats) {
    stats->pinpoint_iterations = iterations;
    stats->insider_counts.clear();
    for (const auto& v : insiders) stats->insider_counts.push_back(static_cast<int>(v.size()));
    stats->loose_boxes.clear();
    for (std::size_t b = 0; b < loose.size(); ++b)
      if (loose[b]) stats->loose_boxes.push_back(static_cast<int>(b));
  }
  return y;
}

Labelling annotation_consistent_inference(const Model& model, const Instance& instance, const WeakAnnotation& weak,
                                          ConsistentInferenceStats* stats, ConsistentInferenceOptions options) {
  return annotation_consistent_inference(model, instance, weak, latent_initialization(instance, weak), stats, options);
}

}  // namespace mulearn

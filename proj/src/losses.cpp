#include "mulearn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "mulearn/geometry.hpp"

namespace mulearn {

namespace {

bool contains(const std::vector<Label>& sorted, Label k) { return std::binary_search(sorted.begin(), sorted.end(), k); }

std::vector<char> used_labels(const Labelling& y, int num_labels) {
  std::vector<char> used(num_labels + 1, 0);
  for (Label k : y)
    if (k >= 1 && k <= num_labels) used[k] = 1;
  return used;
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw ValidationError("labelling and pixel-count lengths differ");
}

double present_area(const LossConfig& config, Label k, double uniform) {
  return config.area_estimates ? (*config.area_estimates)[k - 1] : uniform;
}

// sigma_k shared by every present label when no estimates are supplied.
double uniform_present_area(const Instance& instance, const LabelPartition& part) {
  if (part.present_labels.empty()) return 0.0;
  double outside = 0.0;
  for (int i = 0; i < instance.num_nodes(); ++i)
    if (part.remainder[i]) outside += instance.nodes[i].pixel_count;
  return outside / static_cast<double>(part.present_labels.size());
}

void require_grid(const Instance& instance, const WeakAnnotation& weak) {
  if ((!weak.boxes.empty() || !weak.seeds.empty()) && !instance.grid)
    throw ValidationError("instance '" + instance.id + "': boxes and seeds require a pixel grid");
}

}  // namespace

void LossConfig::validate(int num_labels) const {
  if (!(beta >= 0)) throw ValidationError("beta must be nonnegative");
  if (area_estimates) {
    if (static_cast<int>(area_estimates->size()) != num_labels)
      throw ValidationError("area_estimates must have one entry per label");
    for (double s : *area_estimates)
      if (!(s > 0)) throw ValidationError("area estimates must be positive");
  }
}

LabelPartition partition_labels(const Instance& instance, const WeakAnnotation& weak) {
  require_grid(instance, weak);
  LabelPartition part;
  part.box_labels = weak.box_labels();
  part.present_labels = weak.image_level;
  for (Label k : weak.seed_labels())
    if (!contains(part.box_labels, k)) part.seed_labels.push_back(k);
  for (Label k = 1; k <= instance.num_labels; ++k)
    if (!contains(part.box_labels, k) && !contains(part.present_labels, k) && !contains(part.seed_labels, k))
      part.absent_labels.push_back(k);
  part.remainder = weak.boxes.empty() ? std::vector<char>(instance.nodes.size(), 1) : outside_all_boxes(instance, weak);
  return part;
}

double hamming_loss(const Labelling& y, const Labelling& gt, std::span<const double> c) {
  check_lengths(y.size(), gt.size());
  check_lengths(y.size(), c.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (gt[i] != kUnlabelled && y[i] != gt[i]) loss += c[i];
  return loss;
}

double proxy_il_loss(const Labelling& y, const Labelling& ref, std::span<const double> c) {
  check_lengths(y.size(), ref.size());
  check_lengths(y.size(), c.size());
  int top = 0;
  for (Label k : y) top = std::max(top, k);
  for (Label k : ref) top = std::max(top, k);
  const auto in_y = used_labels(y, top);
  const auto in_ref = used_labels(ref, top);
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!in_ref[y[i]] || !in_y[ref[i]]) loss += c[i];
  return loss;
}

double il_loss(const Labelling& y, const std::vector<Label>& z, std::span<const double> c, const LossConfig& config) {
  check_lengths(y.size(), c.size());
  if (z.empty()) throw ValidationError("image-level label set is empty");
  double total = 0.0;
  for (double ci : c) total += ci;
  int top = *std::max_element(z.begin(), z.end());
  for (Label k : y) top = std::max(top, k);
  const auto used = used_labels(y, top);
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!std::count(z.begin(), z.end(), y[i])) loss += c[i];
  const double uniform = total / static_cast<double>(z.size());
  for (Label k : z)
    if (!used[k]) loss += present_area(config, k, uniform);
  return loss;
}

double seed_tau(const Instance& instance, const WeakAnnotation& weak, Label k) {
  const auto seed_labels = weak.seed_labels();
  const auto objects = std::count_if(weak.seeds.begin(), weak.seeds.end(), [&](const Seed& s) { return s.label == k; });
  if (objects == 0) throw ValidationError("no seed carries label " + std::to_string(k));
  const double present = static_cast<double>(weak.image_level.size() + seed_labels.size());
  return instance.total_pixels() / (present * static_cast<double>(objects));
}

std::vector<double> seed_node_weights(const PixelGrid& grid, int num_nodes, const Seed& seed, double tau) {
  std::vector<double> w(num_nodes, 0.0);
  const double scale = std::numbers::pi / tau;
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      const double dr = r - seed.row, dc = c - seed.col;
      w[grid.node_at(r, c)] += std::exp(-scale * (dr * dr + dc * dc));
    }
  }
  return w;
}

double weak_loss(const Labelling& y, const WeakAnnotation& weak, const Instance& instance, const LossConfig& config) {
  validate_labelling(instance, y);
  const LabelPartition part = partition_labels(instance, weak);
  const auto used = used_labels(y, instance.num_labels);
  double loss = 0.0;

  for (int i = 0; i < instance.num_nodes(); ++i) {
    const double c = instance.nodes[i].pixel_count;
    if (contains(part.absent_labels, y[i])) loss += c;
    if (part.remainder[i] && contains(part.box_labels, y[i])) loss += c;
  }

  const double sigma = uniform_present_area(instance, part);
  for (Label k : part.present_labels)
    if (!used[k]) loss += present_area(config, k, sigma);

  for (const auto& box : weak.boxes) {
    const BoxCliques cliques = box_cliques(*instance.grid, box);
    auto empty = [&](const std::vector<int>& nodes) {
      return std::none_of(nodes.begin(), nodes.end(), [&](int i) { return y[i] == box.label; });
    };
    const double nu = box.width() / 2.0, omega = box.height() / 2.0;
    for (const auto& row : cliques.rows)
      if (empty(row)) loss += config.beta * nu;
    for (const auto& col : cliques.cols)
      if (empty(col)) loss += config.beta * omega;
  }

  for (const auto& seed : weak.seeds) {
    const auto w = seed_node_weights(*instance.grid, instance.num_nodes(), seed, seed_tau(instance, weak, seed.label));
    for (int i = 0; i < instance.num_nodes(); ++i)
      if (y[i] != seed.label) loss += config.beta * w[i];
  }
  return loss;
}

double il_bb_loss(const Labelling& y, const WeakAnnotation& weak, const Instance& instance, const LossConfig& config) {
  if (!instance.grid) throw ValidationError("instance '" + instance.id + "': box loss needs a pixel grid");
  if (!weak.seeds.empty()) throw ValidationError("il_bb_loss takes no seeds; use weak_loss for mixed annotations");
  return weak_loss(y, weak, instance, config);
}

double il_os_loss(const Labelling& y, const WeakAnnotation& weak, const Instance& instance, const LossConfig& config) {
  if (!instance.grid) throw ValidationError("instance '" + instance.id + "': seed loss needs a pixel grid");
  if (!weak.boxes.empty()) throw ValidationError("il_os_loss takes no boxes; use weak_loss for mixed annotations");
  return weak_loss(y, weak, instance, config);
}

double annotation_loss(const Labelling& y, const Annotation& annotation, const Instance& instance,
                       const LossConfig& config) {
  if (const auto* full = std::get_if<FullAnnotation>(&annotation))
    return hamming_loss(y, full->labels, instance.pixel_counts());
  return weak_loss(y, std::get<WeakAnnotation>(annotation), instance, config);
}

EnergyProblem build_loss_augmented_energy(const Model& model, const Instance& instance, const Annotation& annotation,
                                          const LossConfig& config) {
  config.validate(instance.num_labels);
  EnergyProblem p = build_energy(model, instance);

  if (const auto* full = std::get_if<FullAnnotation>(&annotation)) {
    if (static_cast<int>(full->labels.size()) != p.num_nodes)
      throw ValidationError("instance '" + instance.id + "': ground truth length mismatch");
    for (int i = 0; i < p.num_nodes; ++i) {
      if (full->labels[i] == kUnlabelled) continue;
      for (Label k = 1; k <= p.num_labels; ++k)
        if (k != full->labels[i]) p.unary_at(i, k) -= instance.nodes[i].pixel_count;
    }
    return p;
  }

  const auto& weak = std::get<WeakAnnotation>(annotation);
  const LabelPartition part = partition_labels(instance, weak);

  for (int i = 0; i < p.num_nodes; ++i) {
    const double c = instance.nodes[i].pixel_count;
    for (Label k : part.absent_labels) p.unary_at(i, k) -= c;
    if (part.remainder[i])
      for (Label k : part.box_labels) p.unary_at(i, k) -= c;
  }

  // -sigma [k unused] = sigma [k used] - sigma
  const double sigma = uniform_present_area(instance, part);
  for (Label k : part.present_labels) {
    const double s = present_area(config, k, sigma);
    p.label_costs[k - 1] += s;
    p.offset -= s;
  }

  // -nu [row empty] = nu [row holds the label] - nu; identical cliques merge.
  std::map<std::pair<Label, std::vector<int>>, double> merged;
  for (const auto& box : weak.boxes) {
    const BoxCliques cliques = box_cliques(*instance.grid, box);
    const double nu = config.beta * box.width() / 2.0, omega = config.beta * box.height() / 2.0;
    auto add = [&](const std::vector<int>& nodes, double cost) {
      p.offset -= cost;
      if (!nodes.empty() && cost > 0) merged[{box.label, nodes}] += cost;
    };
    for (const auto& row : cliques.rows) add(row, nu);
    for (const auto& col : cliques.cols) add(col, omega);
  }
  for (auto& [key, cost] : merged) p.cliques.push_back({key.second, key.first, cost});

  for (const auto& seed : weak.seeds) {
    const auto w = seed_node_weights(*instance.grid, p.num_nodes, seed, seed_tau(instance, weak, seed.label));
    for (int i = 0; i < p.num_nodes; ++i)
      for (Label k = 1; k <= p.num_labels; ++k)
        if (k != seed.label) p.unary_at(i, k) -= config.beta * w[i];
  }
  return p;
}

}  // namespace mulearn

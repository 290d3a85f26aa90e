#include "mulearn/core.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "mulearn/geometry.hpp"

namespace mulearn {

namespace {

std::vector<Label> sorted_unique(std::vector<Label> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

[[noreturn]] void fail(const Instance& instance, const std::string& what) {
  throw ValidationError("instance '" + instance.id + "': " + what);
}

}  // namespace

LabelSpace::LabelSpace(int num_labels) : num_labels_(num_labels) {
  if (num_labels < 2) throw ValidationError("label space needs at least 2 labels");
}

PixelGrid::PixelGrid(int height, int width, std::vector<int> node_map)
    : height_(height), width_(width), node_map_(std::move(node_map)) {
  if (height <= 0 || width <= 0) throw ValidationError("pixel grid must have positive size");
  if (node_map_.size() != static_cast<std::size_t>(height) * width)
    throw ValidationError("pixel grid node_map has " + std::to_string(node_map_.size()) + " entries, expected " +
                          std::to_string(static_cast<std::size_t>(height) * width));
}

std::vector<double> PixelGrid::pixel_counts(int num_nodes) const {
  std::vector<double> counts(num_nodes, 0.0);
  for (int node : node_map_) counts.at(node) += 1.0;
  return counts;
}

std::vector<Label> WeakAnnotation::box_labels() const {
  std::vector<Label> out;
  for (const auto& b : boxes) out.push_back(b.label);
  return sorted_unique(std::move(out));
}

std::vector<Label> WeakAnnotation::seed_labels() const {
  std::vector<Label> out;
  for (const auto& s : seeds) out.push_back(s.label);
  return sorted_unique(std::move(out));
}

std::vector<Label> WeakAnnotation::all_labels() const {
  std::vector<Label> out = image_level;
  for (const auto& b : boxes) out.push_back(b.label);
  for (const auto& s : seeds) out.push_back(s.label);
  return sorted_unique(std::move(out));
}

double Instance::total_pixels() const {
  double total = 0.0;
  for (const auto& n : nodes) total += n.pixel_count;
  return total;
}

std::vector<double> Instance::pixel_counts() const {
  std::vector<double> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back(n.pixel_count);
  return out;
}

void validate_weak_annotation(const WeakAnnotation& weak, const Instance& instance) {
  const LabelSpace space(instance.num_labels);
  if (weak.all_labels().empty()) fail(instance, "weak annotation names no labels");
  if (!std::is_sorted(weak.image_level.begin(), weak.image_level.end()) ||
      std::adjacent_find(weak.image_level.begin(), weak.image_level.end()) != weak.image_level.end())
    fail(instance, "image_level labels must be sorted and unique");
  for (Label k : weak.image_level)
    if (!space.contains(k)) fail(instance, "image_level label " + std::to_string(k) + " out of range");
  const auto box_labels = weak.box_labels();
  const auto seed_labels = weak.seed_labels();
  for (Label k : weak.image_level) {
    if (std::binary_search(box_labels.begin(), box_labels.end(), k))
      fail(instance, "label " + std::to_string(k) + " given both as image-level label and as box");
    if (std::binary_search(seed_labels.begin(), seed_labels.end(), k))
      fail(instance, "label " + std::to_string(k) + " given both as image-level label and as seed");
  }
  if ((!weak.boxes.empty() || !weak.seeds.empty()) && !instance.grid)
    fail(instance, "boxes and seeds require a pixel grid");
  for (std::size_t b = 0; b < weak.boxes.size(); ++b) {
    const auto& box = weak.boxes[b];
    const std::string where = "box " + std::to_string(b) + ": ";
    if (!space.contains(box.label)) fail(instance, where + "label out of range");
    if (box.left > box.right || box.top > box.bottom) fail(instance, where + "inverted extent");
    if (!instance.grid->contains(box.top, box.left) || !instance.grid->contains(box.bottom, box.right))
      fail(instance, where + "extends beyond the pixel grid");
  }
  for (std::size_t s = 0; s < weak.seeds.size(); ++s) {
    const auto& seed = weak.seeds[s];
    if (!space.contains(seed.label)) fail(instance, "seed " + std::to_string(s) + ": label out of range");
    if (!instance.grid->contains(seed.row, seed.col))
      fail(instance, "seed " + std::to_string(s) + ": point outside the pixel grid");
  }
}

void validate_instance(const Instance& instance, int unary_dim, int pairwise_dim) {
  const LabelSpace space(instance.num_labels);
  const int n = instance.num_nodes();
  if (instance.edge_dim != pairwise_dim)
    fail(instance, "edge_dim " + std::to_string(instance.edge_dim) + " differs from dataset " +
                       std::to_string(pairwise_dim));
  for (int i = 0; i < n; ++i) {
    const auto& node = instance.nodes[i];
    if (static_cast<int>(node.features.size()) != unary_dim)
      fail(instance, "node " + std::to_string(i) + " has " + std::to_string(node.features.size()) +
                         " features, expected " + std::to_string(unary_dim));
    if (!(node.pixel_count > 0)) fail(instance, "node " + std::to_string(i) + " has non-positive pixel_count");
  }
  std::set<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < instance.edges.size(); ++k) {
    const auto& e = instance.edges[k];
    const std::string where = "edge " + std::to_string(k) + ": ";
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) fail(instance, where + "endpoint out of range");
    if (e.u >= e.v) fail(instance, where + "requires u < v");
    if (!seen.emplace(e.u, e.v).second) fail(instance, where + "duplicate edge");
    if (static_cast<int>(e.features.size()) != pairwise_dim)
      fail(instance, where + "has " + std::to_string(e.features.size()) + " features, expected " +
                         std::to_string(pairwise_dim));
    for (double f : e.features)
      if (!(f >= 0)) fail(instance, where + "negative feature");
  }
  if (instance.grid) {
    const auto counts = [&] {
      for (int node : instance.grid->node_map())
        if (node < 0 || node >= n) fail(instance, "grid maps a pixel to missing node " + std::to_string(node));
      return instance.grid->pixel_counts(n);
    }();
    for (int i = 0; i < n; ++i)
      if (counts[i] != instance.nodes[i].pixel_count)
        fail(instance, "node " + std::to_string(i) + " pixel_count disagrees with the grid");
  }
  if (const auto* full = std::get_if<FullAnnotation>(&instance.annotation)) {
    if (static_cast<int>(full->labels.size()) != n) fail(instance, "full labelling length mismatch");
    for (int i = 0; i < n; ++i) {
      const Label k = full->labels[i];
      if (k != kUnlabelled && !space.contains(k))
        fail(instance, "labels[" + std::to_string(i) + "] = " + std::to_string(k) + " out of range");
    }
  } else {
    validate_weak_annotation(std::get<WeakAnnotation>(instance.annotation), instance);
  }
}

void validate_labelling(const Instance& instance, const Labelling& y) {
  if (static_cast<int>(y.size()) != instance.num_nodes())
    throw ValidationError("labelling has " + std::to_string(y.size()) + " entries, instance has " +
                          std::to_string(instance.num_nodes()) + " nodes");
  for (Label k : y)
    if (k < 1 || k > instance.num_labels) throw ValidationError("label " + std::to_string(k) + " out of range");
}

Model::Model(int num_labels, int unary_dim, int pairwise_dim)
    : Model(num_labels, unary_dim, pairwise_dim,
            std::vector<double>(static_cast<std::size_t>(num_labels) * unary_dim + pairwise_dim, 0.0)) {}

Model::Model(int num_labels, int unary_dim, int pairwise_dim, std::vector<double> weights)
    : num_labels_(num_labels), unary_dim_(unary_dim), pairwise_dim_(pairwise_dim), weights_(std::move(weights)) {
  LabelSpace{num_labels};
  if (unary_dim < 0 || pairwise_dim < 0) throw ValidationError("negative model dimension");
  if (weights_.size() != static_cast<std::size_t>(num_labels) * unary_dim + pairwise_dim)
    throw ValidationError("model weight vector has wrong length");
  for (double w : pairwise())
    if (!(w >= 0)) throw ValidationError("pairwise weights must be nonnegative");
}

std::span<const double> Model::unary(Label k) const {
  return std::span<const double>(weights_).subspan(static_cast<std::size_t>(k - 1) * unary_dim_, unary_dim_);
}

std::span<const double> Model::pairwise() const {
  return std::span<const double>(weights_).subspan(static_cast<std::size_t>(num_labels_) * unary_dim_);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("dimension mismatch between features and weights");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double unary_score(const Model& model, const Instance& instance, int node, Label k) {
  return dot(instance.nodes[node].features, model.unary(k));
}

double pairwise_reward(const Model& model, const Edge& edge) { return dot(edge.features, model.pairwise()); }

double score(const Model& model, const Instance& instance, const Labelling& y) {
  validate_labelling(instance, y);
  if (model.num_labels() != instance.num_labels) throw ValidationError("model and instance label counts differ");
  double s = 0.0;
  for (int i = 0; i < instance.num_nodes(); ++i) s += unary_score(model, instance, i, y[i]);
  for (const auto& e : instance.edges)
    if (y[e.u] == y[e.v]) s += pairwise_reward(model, e);
  return s;
}

std::vector<double> generalized_features(const Instance& instance, const Labelling& y) {
  validate_labelling(instance, y);
  const int d = instance.unary_dim();
  const int e = instance.edge_dim;
  std::vector<double> psi(static_cast<std::size_t>(instance.num_labels) * d + e, 0.0);
  for (int i = 0; i < instance.num_nodes(); ++i) {
    const auto& x = instance.nodes[i].features;
    double* block = psi.data() + static_cast<std::size_t>(y[i] - 1) * d;
    for (int j = 0; j < d; ++j) block[j] += x[j];
  }
  double* pair = psi.data() + static_cast<std::size_t>(instance.num_labels) * d;
  for (const auto& edge : instance.edges) {
    if (y[edge.u] != y[edge.v]) continue;
    for (int j = 0; j < e; ++j) pair[j] += edge.features[j];
  }
  return psi;
}

ConsistencyReport check_consistency(const Instance& instance, const WeakAnnotation& weak, const Labelling& y) {
  validate_labelling(instance, y);
  if ((!weak.boxes.empty() || !weak.seeds.empty()) && !instance.grid)
    throw ValidationError("instance '" + instance.id + "': boxes and seeds require a pixel grid");
  ConsistencyReport report;
  const auto allowed = weak.all_labels();
  std::vector<char> used(instance.num_labels + 1, 0);
  for (Label k : y) used[k] = 1;
  for (int k = 1; k <= instance.num_labels; ++k) {
    const bool is_allowed = std::binary_search(allowed.begin(), allowed.end(), k);
    if (used[k] && !is_allowed) report.labels_allowed = false;
    if (!used[k] && is_allowed) report.labels_present = false;
  }
  for (const auto& seed : weak.seeds)
    if (y[instance.grid->node_at(seed.row, seed.col)] != seed.label) report.seeds_respected = false;
  for (Label k : weak.box_labels()) {
    const auto region = label_region(instance, weak, k);
    for (int i = 0; i < instance.num_nodes(); ++i)
      if (y[i] == k && !region[i]) report.boxes_contained = false;
  }
  for (const auto& box : weak.boxes)
    if (!box_is_tight(*instance.grid, y, box)) report.boxes_tight = false;
  return report;
}

bool consistent_set_membership(const Instance& instance, const WeakAnnotation& weak, const Labelling& y) {
  return check_consistency(instance, weak, y).all();
}

}  // namespace mulearn

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mulearn {

// Labels are 1-based: a problem with K labels uses 1..K. Zero marks an
// unlabelled ground-truth node and is never a valid prediction.
using Label = int;
using Labelling = std::vector<Label>;
inline constexpr Label kUnlabelled = 0;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad dimensions, out-of-range labels, schema problems.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A weak annotation admits no labelling under the inference constraints.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// An internal guarantee was broken (e.g. a non-monotone CCCP step).
class InvariantError : public Error {
 public:
  using Error::Error;
};

class LabelSpace {
 public:
  explicit LabelSpace(int num_labels);

  int size() const { return num_labels_; }
  bool contains(Label k) const { return k >= 1 && k <= num_labels_; }

 private:
  int num_labels_;
};

struct Node {
  std::vector<double> features;
  double pixel_count = 1.0;
};

struct Edge {
  int u = 0;
  int v = 0;
  std::vector<double> features;
};

/// Row-major map from image pixels to superpixel (node) ids.
class PixelGrid {
 public:
  PixelGrid(int height, int width, std::vector<int> node_map);

  int height() const { return height_; }
  int width() const { return width_; }
  int node_at(int row, int col) const { return node_map_[static_cast<std::size_t>(row) * width_ + col]; }
  std::span<const int> node_map() const { return node_map_; }
  bool contains(int row, int col) const { return row >= 0 && row < height_ && col >= 0 && col < width_; }

  /// Number of pixels mapped to each node id in [0, num_nodes).
  std::vector<double> pixel_counts(int num_nodes) const;

 private:
  int height_;
  int width_;
  std::vector<int> node_map_;
};

/// Inclusive pixel rectangle.
struct BoundingBox {
  Label label = 1;
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;

  int width() const { return right - left + 1; }
  int height() const { return bottom - top + 1; }
  bool operator==(const BoundingBox&) const = default;
};

struct Seed {
  Label label = 1;
  int row = 0;
  int col = 0;
  bool operator==(const Seed&) const = default;
};

struct FullAnnotation {
  Labelling labels;  // kUnlabelled allowed
};

struct WeakAnnotation {
  std::vector<Label> image_level;  // sorted, unique
  std::vector<BoundingBox> boxes;
  std::vector<Seed> seeds;

  std::vector<Label> box_labels() const;   // sorted, unique
  std::vector<Label> seed_labels() const;  // sorted, unique
  /// image_level ∪ box labels ∪ seed labels, sorted.
  std::vector<Label> all_labels() const;
};

using Annotation = std::variant<FullAnnotation, WeakAnnotation>;

inline bool is_weak(const Annotation& a) { return std::holds_alternative<WeakAnnotation>(a); }

struct Instance {
  std::string id;
  int num_labels = 2;
  int edge_dim = 0;  // pairwise feature length e, fixed per dataset
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::optional<PixelGrid> grid;
  Annotation annotation;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int unary_dim() const { return nodes.empty() ? 0 : static_cast<int>(nodes.front().features.size()); }
  double total_pixels() const;
  std::vector<double> pixel_counts() const;
};

/// Throws ValidationError describing the first violated invariant. `unary_dim`
/// and `pairwise_dim` are the dataset-wide feature lengths.
void validate_instance(const Instance& instance, int unary_dim, int pairwise_dim);
void validate_weak_annotation(const WeakAnnotation& weak, const Instance& instance);
void validate_labelling(const Instance& instance, const Labelling& labelling);

/// Weight vector laid out as K unary blocks of length d followed by the
/// pairwise block of length e.
class Model {
 public:
  Model() = default;
  Model(int num_labels, int unary_dim, int pairwise_dim);
  Model(int num_labels, int unary_dim, int pairwise_dim, std::vector<double> weights);

  int num_labels() const { return num_labels_; }
  int unary_dim() const { return unary_dim_; }
  int pairwise_dim() const { return pairwise_dim_; }
  std::size_t size() const { return weights_.size(); }

  std::span<const double> unary(Label k) const;
  std::span<const double> pairwise() const;
  std::span<const double> weights() const { return weights_; }

  bool operator==(const Model&) const = default;

 private:
  int num_labels_ = 0;
  int unary_dim_ = 0;
  int pairwise_dim_ = 0;
  std::vector<double> weights_;
};

double dot(std::span<const double> a, std::span<const double> b);

double unary_score(const Model& model, const Instance& instance, int node, Label k);
double pairwise_reward(const Model& model, const Edge& edge);

/// Discriminant function: sum of unary scores plus pairwise rewards of
/// equally labelled edges.
double score(const Model& model, const Instance& instance, const Labelling& labelling);

/// Joint feature map; score(model, x, y) == <model.weights(), result>.
std::vector<double> generalized_features(const Instance& instance, const Labelling& labelling);

/// Per-clause outcome of testing a labelling against a weak annotation.
struct ConsistencyReport {
  bool labels_allowed = true;   // only annotation labels used
  bool labels_present = true;   // every annotation label used
  bool seeds_respected = true;  // seed superpixels carry the seed label
  bool boxes_contained = true;  // box labels only inside boxes of that label
  bool boxes_tight = true;      // each shrunk box touched on all four sides

  bool all() const { return labels_allowed && labels_present && seeds_respected && boxes_contained && boxes_tight; }
};

ConsistencyReport check_consistency(const Instance& instance, const WeakAnnotation& weak,
                                    const Labelling& labelling);

bool consistent_set_membership(const Instance& instance, const WeakAnnotation& weak,
                               const Labelling& labelling);

}  // namespace mulearn

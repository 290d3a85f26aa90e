#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mulearn/core.hpp"

namespace mulearn {

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;

struct DatasetHeader {
  int num_labels = 2;
  int unary_dim = 0;
  int edge_dim = 0;
  std::vector<std::string> label_names;  // empty or one per label
  std::vector<Label> background_labels;  // "stuff" labels, sorted

  /// Label reserved for unlabelled or unexplained regions.
  Label other_label() const { return num_labels; }
  std::vector<Label> thing_labels() const;
};

struct Dataset {
  DatasetHeader header;
  std::vector<Instance> instances;
};

/// JSON Lines: header object on the first line, one instance per line after
/// it. Labels are stored 0-based with -1 marking unlabelled nodes.
std::string dataset_to_jsonl(const Dataset& dataset);
Dataset dataset_from_jsonl(std::istream& in);
Dataset load_dataset(const std::string& path);
void save_dataset(const std::string& path, const Dataset& dataset);

std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);
Model load_model(const std::string& path);
void save_model(const std::string& path, const Model& model);

struct SynthConfig {
  int grid_size = 8;     // superpixels per side
  int pixel_scale = 4;   // pixels per superpixel side
  int num_stuff = 2;
  int num_things = 2;
  int extra_dims = 0;    // pure-noise feature dimensions
  double noise = 0.5;
  int count = 10;
  std::uint64_t seed = 0;

  int num_labels() const { return num_stuff + num_things; }
  void validate() const;
};

/// Fully labelled instances: horizontal bands of stuff labels with thing
/// rectangles painted over them. Things take labels 1..T, stuff T+1..K, so
/// the reserved "other" label K is a stuff label.
Dataset synth_generate(const SynthConfig& config);

/// Labels present in `y`; adds `other` when only one label is present or at
/// least 30% of the pixels are unlabelled.
std::vector<Label> derive_image_level(const Labelling& y, std::span<const double> pixel_counts, Label other);

/// Per-pixel label map of a node labelling.
std::vector<Label> pixel_labels(const PixelGrid& grid, const Labelling& y);

/// Tight pixel box of every 4-connected component of each thing label.
std::vector<BoundingBox> derive_boxes(const PixelGrid& grid, const Labelling& y, const std::vector<Label>& things);

/// One seed per 4-connected thing component at its pole of inaccessibility:
/// the pixel farthest (Euclidean) from the component's complement, pixels
/// beyond the image border counting as complement. Ties go to the pixel
/// nearest the component centroid, then to the smallest (row, col).
std::vector<Seed> derive_seeds(const PixelGrid& grid, const Labelling& y, const std::vector<Label>& things);

enum class WeakKind { ImageLevel, Boxes, Seeds };

/// Weak annotation derived from a full labelling. With boxes or seeds, thing
/// labels move from the image-level set into the boxes or seeds.
WeakAnnotation derive_weak(const Instance& instance, const Labelling& y, const DatasetHeader& header, WeakKind kind);

struct SubsetSampler {
  double lambda = 200.0;       // inverse temperature on the KL divergence
  int burn_in_per_item = 50;   // chain steps per dataset instance
};

/// Label distribution of a set of instances: image-level occurrence counts
/// per label, normalized.
std::vector<double> label_count_distribution(const Dataset& dataset, std::span<const std::size_t> subset);

/// KL(subset distribution || full-set distribution) with additive smoothing.
double subset_divergence(const Dataset& dataset, std::span<const std::size_t> subset);

/// Metropolis-Hastings over fixed-size subsets with swap proposals and
/// stationary density proportional to exp(-lambda * KL). Returns sorted
/// instance indices.
std::vector<std::size_t> sample_subset(const Dataset& dataset, std::size_t target, std::uint64_t seed,
                                       SubsetSampler sampler = {});

struct Metrics {
  double accuracy = 0.0;
  double recall = 0.0;
  std::vector<std::optional<double>> per_label_recall;  // index k-1, empty when no GT area
};

Metrics evaluate(std::span<const Labelling> predictions, std::span<const Labelling> ground_truths,
                 std::span<const std::vector<double>> pixel_counts, int num_labels,
                 const std::vector<Label>& excluded = {});

struct MetricsRow {
  std::string experiment_id;
  std::string split;
  Metrics metrics;
};

/// Columns: experiment_id, split, accuracy, recall, then one recall column
/// per label (empty cell when the label has no ground-truth area).
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows, int num_labels,
                       const std::vector<std::string>& label_names = {});

}  // namespace mulearn

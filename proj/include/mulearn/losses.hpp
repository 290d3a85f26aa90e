#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mulearn/core.hpp"
#include "mulearn/inference.hpp"

namespace mulearn {

struct LossConfig {
  /// Weight of the box row/column term and the seed term relative to the
  /// image-level terms.
  double beta = 1.0;
  /// Optional per-label area estimates S_k in pixels (index k-1). When set
  /// they replace the uniform area estimate for every present label.
  std::optional<std::vector<double>> area_estimates;

  void validate(int num_labels) const;
};

/// Labels and nodes split by a weak annotation.
struct LabelPartition {
  std::vector<Label> box_labels;      // K_b
  std::vector<Label> present_labels;  // K_p (image-level)
  std::vector<Label> seed_labels;     // labels named only through seeds
  std::vector<Label> absent_labels;   // K_a: everything else
  std::vector<char> remainder;        // V_0: nodes outside every box
};

LabelPartition partition_labels(const Instance& instance, const WeakAnnotation& weak);

/// Pixel-weighted Hamming distance; unlabelled ground-truth nodes are skipped.
double hamming_loss(const Labelling& y, const Labelling& ground_truth, std::span<const double> pixel_counts);

/// Symmetric label-set proxy loss: node i is charged when y_i is missing
/// from the reference's label set or the reference label is missing from y.
double proxy_il_loss(const Labelling& y, const Labelling& reference, std::span<const double> pixel_counts);

/// Image-level loss: pixels with labels outside z plus the estimated area of
/// every label of z that y omits.
double il_loss(const Labelling& y, const std::vector<Label>& image_level, std::span<const double> pixel_counts,
               const LossConfig& config);

/// Loss for image-level labels combined with bounding boxes.
double il_bb_loss(const Labelling& y, const WeakAnnotation& weak, const Instance& instance, const LossConfig& config);

/// Loss for image-level labels combined with object seeds.
double il_os_loss(const Labelling& y, const WeakAnnotation& weak, const Instance& instance, const LossConfig& config);

/// Loss for any weak annotation; sums whichever of the image-level, box and
/// seed terms the annotation supports.
double weak_loss(const Labelling& y, const WeakAnnotation& weak, const Instance& instance, const LossConfig& config);

/// Hamming loss for full labellings, weak_loss otherwise.
double annotation_loss(const Labelling& y, const Annotation& annotation, const Instance& instance,
                       const LossConfig& config);

/// Gaussian width of seeds with label k: total pixels divided by the number
/// of present labels times the number of seeds of k.
double seed_tau(const Instance& instance, const WeakAnnotation& weak, Label k);

/// Per-node sum of exp(-pi |p - p'|^2 / tau) over the node's pixels p.
std::vector<double> seed_node_weights(const PixelGrid& grid, int num_nodes, const Seed& seed, double tau);

/// Energy whose minimizer maximizes score + loss:
/// energy(problem, y) + problem.offset == -(score(y) + loss(y)).
EnergyProblem build_loss_augmented_energy(const Model& model, const Instance& instance, const Annotation& annotation,
                                          const LossConfig& config);

}  // namespace mulearn

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mulearn/core.hpp"
#include "mulearn/losses.hpp"

namespace mulearn {

struct TrainConfig {
  double C = 10.0;
  /// Weight of weak-instance slacks relative to fully labelled ones.
  double alpha_balance = 0.1;
  /// Cutting-plane tolerance in pixels; defaults to 1e-3 times the mean
  /// number of pixels per training instance.
  std::optional<double> epsilon;
  int max_cutting_plane_iters = 200;
  int max_cccp_iters = 10;
  bool warm_start = true;
  LossConfig loss;
  int threads = 1;
  double qp_tolerance = 1e-6;
  int qp_max_sweeps = 20000;

  void validate() const;
};

/// One cutting plane <w, psi(positive) - psi(labelling)> >= loss - slack.
struct Cut {
  Labelling labelling;
  double loss = 0.0;
  std::vector<double> psi;   // psi(x, labelling)
  std::vector<double> dpsi;  // psi(x, positive) - psi
  double dual = 0.0;
};

/// Constraints of one training instance, sharing a single slack.
struct CutBlock {
  bool weak = false;  // slack weighted by alpha_balance
  std::vector<double> positive_psi;
  std::vector<Cut> cuts;

  /// Replaces the positive labelling's features and refreshes every dpsi.
  void set_positive(std::vector<double> psi);
};

struct WorkingSet {
  std::vector<CutBlock> blocks;
  std::size_t total_cuts() const;
};

struct QpSettings {
  double C = 1.0;
  double alpha_balance = 1.0;
  double tolerance = 1e-6;
  int max_sweeps = 20000;
  int num_nonnegative = 0;  // trailing coordinates constrained to be >= 0
};

struct QpResult {
  std::vector<double> weights;
  std::vector<double> slacks;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int sweeps = 0;
  bool converged = false;
};

/// Per-block slack weight C/(N+M), times alpha_balance for weak blocks.
double slack_weight(const WorkingSet& ws, const CutBlock& block, const QpSettings& settings);

/// Minimizes 1/2 |w|^2 + sum_n C_n xi_n over the stored constraints with the
/// trailing `num_nonnegative` weights kept nonnegative. Dual coordinate
/// ascent over each block's simplex; duals in `ws` are the warm start and
/// are updated in place.
QpResult solve_qp(WorkingSet& ws, int dim, const QpSettings& settings);

/// Primal objective of the restricted problem at `w`. `positives`, when
/// given, overrides each block's positive features.
double primal_objective(const WorkingSet& ws, std::span<const double> w, const QpSettings& settings,
                        const std::vector<std::vector<double>>* positives = nullptr);

/// A training instance with its positive labelling (ground truth or
/// imputation) and the annotation that defines its loss.
struct TrainItem {
  const Instance* instance = nullptr;
  Labelling positive;
  Annotation target;
  bool weak_slack = false;
};

/// Items for every fully labelled instance, unlabelled nodes included in
/// the ground truth as-is.
std::vector<TrainItem> strong_items(std::span<const Instance> data);

struct Separation {
  Labelling labelling;
  double loss = 0.0;
  double violation = 0.0;  // score(labelling) + loss - score(positive)
};

/// Loss-augmented inference: approximately the most violated constraint.
Separation separation_oracle(const Model& model, const Instance& instance, const Labelling& positive,
                             const Annotation& target, const LossConfig& config);

struct IterationRecord {
  std::string phase;
  int round = 0;
  int iteration = 0;
  double objective = 0.0;
  double max_violation = 0.0;
  int cuts_added = 0;
  int total_cuts = 0;
  double kkt_residual = 0.0;
  bool qp_converged = true;
  std::vector<std::string> loss_kinds;  // per item: "hamming" or "weak"
};

struct CccpRecord {
  int round = 0;
  double objective = 0.0;
  /// Previous round's (model, imputations) evaluated on this round's cuts.
  std::optional<double> previous_reevaluated;
  int imputation_changes = 0;
  int imputations_rejected = 0;
  bool monotone = true;
};

struct TrainReport {
  std::vector<IterationRecord> iterations;
  std::vector<CccpRecord> cccp;
  bool capped_out = false;
  bool cccp_monotone = true;
  int qp_nonconverged = 0;
  /// Imputed boxes that pinpointing could not tighten.
  int loose_boxes = 0;
  double final_objective = 0.0;
  double final_max_violation = 0.0;
  double epsilon = 0.0;
  std::optional<double> wall_seconds;
};

struct TrainResult {
  Model model;
  TrainReport report;
  /// Final positive labellings of weak instances, in dataset order.
  std::vector<Labelling> imputations;
};

double default_epsilon(std::span<const TrainItem> items);

/// n-slack margin-rescaling cutting plane starting from `init`.
TrainResult train_ssvm(const std::vector<TrainItem>& items, const TrainConfig& config, const Model& init);

/// Fully labelled plus weakly annotated instances: optional warm start on the
/// fully labelled part, then CCCP alternating imputation and cutting-plane
/// training with annotation-specific losses.
TrainResult train_multi_utility(std::span<const Instance> data, const TrainConfig& config);

/// Three-step baseline: train on fully labelled data, impute once, retrain
/// with Hamming loss against the imputations.
TrainResult hallucinated_baseline(std::span<const Instance> data, const TrainConfig& config);

/// Shape (K, d, e) shared by every instance; throws on disagreement.
Model zero_model_for(std::span<const Instance> data);

}  // namespace mulearn

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "mulearn/inference.hpp"
#include "mulearn/learn.hpp"

namespace mulearn {

namespace {

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < count; i += threads) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

QpSettings qp_settings(const TrainConfig& config, const Model& shape) {
  QpSettings s;
  s.C = config.C;
  s.alpha_balance = config.alpha_balance;
  s.tolerance = config.qp_tolerance;
  s.max_sweeps = config.qp_max_sweeps;
  s.num_nonnegative = shape.pairwise_dim();
  return s;
}

Model with_weights(const Model& shape, std::vector<double> w) {
  return Model(shape.num_labels(), shape.unary_dim(), shape.pairwise_dim(), std::move(w));
}

std::string loss_kind(const TrainItem& item) { return is_weak(item.target) ? "weak" : "hamming"; }

// Cutting-plane trainer whose working set outlives a single run, so CCCP
// rounds can keep earlier cuts with refreshed positives.
class CuttingPlane {
 public:
  CuttingPlane(std::vector<TrainItem> items, const TrainConfig& config, const Model& shape)
      : items_(std::move(items)), config_(config), shape_(shape), settings_(qp_settings(config, shape)) {
    epsilon_ = config.epsilon.value_or(default_epsilon(items_));
    for (const auto& item : items_) {
      CutBlock block;
      block.weak = item.weak_slack;
      block.positive_psi = generalized_features(*item.instance, item.positive);
      ws_.blocks.push_back(std::move(block));
    }
  }

  double epsilon() const { return epsilon_; }
  const std::vector<TrainItem>& items() const { return items_; }
  const QpSettings& settings() const { return settings_; }

  void set_positive(std::size_t n, Labelling positive) {
    ws_.blocks[n].set_positive(generalized_features(*items_[n].instance, positive));
    items_[n].positive = std::move(positive);
  }

  double objective(const Model& model, const std::vector<std::vector<double>>* positives = nullptr) const {
    return primal_objective(ws_, model.weights(), settings_, positives);
  }

  std::vector<std::vector<double>> positives() const {
    std::vector<std::vector<double>> out;
    for (const auto& b : ws_.blocks) out.push_back(b.positive_psi);
    return out;
  }

  Model run(const Model& start, TrainReport& report, const std::string& phase, int round) {
    Model model = start;
    std::vector<std::string> kinds;
    for (const auto& item : items_) kinds.push_back(loss_kind(item));
    const int count = static_cast<int>(items_.size());
    bool converged = false;
    for (int iter = 1; iter <= config_.max_cutting_plane_iters; ++iter) {
      std::vector<Separation> found(count);
      parallel_for(count, config_.threads, [&](int n) {
        const auto& item = items_[n];
        found[n] = separation_oracle(model, *item.instance, item.positive, item.target, config_.loss);
      });

      IterationRecord rec;
      rec.phase = phase;
      rec.round = round;
      rec.iteration = iter;
      rec.loss_kinds = kinds;
      rec.max_violation = -std::numeric_limits<double>::infinity();
      for (int n = 0; n < count; ++n) {
        auto& block = ws_.blocks[n];
        const double slack = block_slack(block, model);
        const double excess = found[n].violation - slack;
        rec.max_violation = std::max(rec.max_violation, excess);
        if (excess <= epsilon_) continue;
        const bool duplicate = std::any_of(block.cuts.begin(), block.cuts.end(),
                                           [&](const Cut& c) { return c.labelling == found[n].labelling; });
        if (duplicate) continue;
        Cut cut;
        cut.labelling = std::move(found[n].labelling);
        cut.loss = found[n].loss;
        cut.psi = generalized_features(*items_[n].instance, cut.labelling);
        cut.dpsi.resize(cut.psi.size());
        for (std::size_t j = 0; j < cut.psi.size(); ++j) cut.dpsi[j] = block.positive_psi[j] - cut.psi[j];
        block.cuts.push_back(std::move(cut));
        ++rec.cuts_added;
      }
      if (count == 0) rec.max_violation = 0.0;
      report.final_max_violation = rec.max_violation;

      if (rec.cuts_added == 0) {
        rec.objective = objective(model);
        rec.total_cuts = static_cast<int>(ws_.total_cuts());
        report.iterations.push_back(std::move(rec));
        converged = true;
        break;
      }
      QpResult qp = solve_qp(ws_, static_cast<int>(shape_.size()), settings_);
      model = with_weights(shape_, std::move(qp.weights));
      rec.objective = qp.objective;
      rec.kkt_residual = qp.kkt_residual;
      rec.qp_converged = qp.converged;
      if (!qp.converged) ++report.qp_nonconverged;
      rec.total_cuts = static_cast<int>(ws_.total_cuts());
      report.iterations.push_back(std::move(rec));
    }
    if (!converged) report.capped_out = true;
    report.final_objective = objective(model);
    report.epsilon = epsilon_;
    return model;
  }

 private:
  static double block_slack(const CutBlock& block, const Model& model) {
    double xi = 0.0;
    for (const auto& cut : block.cuts) xi = std::max(xi, cut.loss - dot(model.weights(), cut.dpsi));
    return xi;
  }

  std::vector<TrainItem> items_;
  TrainConfig config_;
  Model shape_;
  QpSettings settings_;
  double epsilon_ = 0.0;
  WorkingSet ws_;
};

bool is_strong(const Instance& instance) { return !is_weak(instance.annotation); }

Labelling impute(const Model& model, const Instance& instance, const WeakAnnotation& weak, const Labelling* init,
                 TrainReport& report) {
  ConsistentInferenceStats stats;
  const ConsistentInferenceOptions options{.allow_loose_boxes = true};
  Labelling y = init ? annotation_consistent_inference(model, instance, weak, *init, &stats, options)
                     : annotation_consistent_inference(model, instance, weak, &stats, options);
  report.loose_boxes += static_cast<int>(stats.loose_boxes.size());
  return y;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(C >= 0) || !std::isfinite(C)) throw ValidationError("C must be a finite nonnegative number");
  if (!(alpha_balance >= 0) || !std::isfinite(alpha_balance))
    throw ValidationError("alpha_balance must be a finite nonnegative number");
  if (epsilon && !(*epsilon > 0)) throw ValidationError("epsilon must be positive");
  if (max_cutting_plane_iters < 1) throw ValidationError("max_cutting_plane_iters must be at least 1");
  if (max_cccp_iters < 1) throw ValidationError("max_cccp_iters must be at least 1");
  if (threads < 1) throw ValidationError("threads must be at least 1");
  if (!(qp_tolerance > 0)) throw ValidationError("qp_tolerance must be positive");
  if (qp_max_sweeps < 1) throw ValidationError("qp_max_sweeps must be at least 1");
  if (!(loss.beta >= 0)) throw ValidationError("beta must be nonnegative");
}

std::vector<TrainItem> strong_items(std::span<const Instance> data) {
  std::vector<TrainItem> items;
  for (const auto& inst : data) {
    const auto* full = std::get_if<FullAnnotation>(&inst.annotation);
    if (!full) continue;
    TrainItem item;
    item.instance = &inst;
    item.positive = full->labels;
    // Unlabelled nodes join the reserved "other" label, the last one.
    for (Label& k : item.positive)
      if (k == kUnlabelled) k = inst.num_labels;
    item.target = *full;
    items.push_back(std::move(item));
  }
  return items;
}

Separation separation_oracle(const Model& model, const Instance& instance, const Labelling& positive,
                             const Annotation& target, const LossConfig& config) {
  EnergyProblem p = build_loss_augmented_energy(model, instance, target, config);
  Separation out;
  out.labelling = alpha_expansion(p, unary_argmin(p));
  out.loss = annotation_loss(out.labelling, target, instance, config);
  out.violation = score(model, instance, out.labelling) + out.loss - score(model, instance, positive);
  return out;
}

double default_epsilon(std::span<const TrainItem> items) {
  if (items.empty()) return 1e-3;
  double total = 0.0;
  for (const auto& item : items) total += item.instance->total_pixels();
  return 1e-3 * total / static_cast<double>(items.size());
}

Model zero_model_for(std::span<const Instance> data) {
  if (data.empty()) throw ValidationError("dataset is empty");
  const auto& first = data.front();
  const int K = first.num_labels, d = first.unary_dim(), e = first.edge_dim;
  for (const auto& inst : data) {
    if (inst.num_labels != K || inst.unary_dim() != d || inst.edge_dim != e)
      throw ValidationError("instance '" + inst.id + "' disagrees with the dataset's (K, d, e)");
    validate_instance(inst, d, e);
  }
  return Model(K, d, e);
}

TrainResult train_ssvm(const std::vector<TrainItem>& items, const TrainConfig& config, const Model& init) {
  config.validate();
  for (const auto& item : items) {
    if (!item.instance) throw ValidationError("training item without an instance");
    validate_labelling(*item.instance, item.positive);
    if (item.instance->num_labels != init.num_labels() || item.instance->unary_dim() != init.unary_dim() ||
        item.instance->edge_dim != init.pairwise_dim())
      throw ValidationError("instance '" + item.instance->id + "' does not match the model shape");
  }
  TrainResult result;
  CuttingPlane cp(items, config, init);
  result.model = cp.run(init, result.report, "ssvm", 0);
  return result;
}

TrainResult train_multi_utility(std::span<const Instance> data, const TrainConfig& config) {
  config.validate();
  const Model zero = zero_model_for(data);
  std::vector<TrainItem> strong = strong_items(data);
  std::vector<std::size_t> weak_index;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!is_strong(data[i])) weak_index.push_back(i);
  if (weak_index.empty()) return train_ssvm(strong, config, zero);

  TrainResult result;
  TrainReport& report = result.report;
  Model model = zero;
  if (!strong.empty() && config.warm_start) {
    CuttingPlane warm(strong, config, zero);
    model = warm.run(zero, report, "warm_start", 0);
  }

  std::vector<TrainItem> items = strong;
  const std::size_t first_weak = items.size();
  for (std::size_t i : weak_index) {
    const auto& weak = std::get<WeakAnnotation>(data[i].annotation);
    TrainItem item;
    item.instance = &data[i];
    item.target = weak;
    item.weak_slack = true;
    item.positive = impute(model, data[i], weak, nullptr, report);
    items.push_back(std::move(item));
  }
  CuttingPlane cp(std::move(items), config, zero);

  std::optional<double> last_objective;
  for (int round = 1; round <= config.max_cccp_iters; ++round) {
    CccpRecord rec;
    rec.round = round;
    const Model previous = model;
    const auto previous_positives = cp.positives();
    if (round > 1) {
      for (std::size_t n = first_weak; n < cp.items().size(); ++n) {
        const auto& item = cp.items()[n];
        const auto& weak = std::get<WeakAnnotation>(item.target);
        Labelling next = impute(model, *item.instance, weak, &item.positive, report);
        if (next == item.positive) continue;
        // Keep the old imputation unless the new one scores at least as well.
        if (score(model, *item.instance, next) < score(model, *item.instance, item.positive)) {
          ++rec.imputations_rejected;
          continue;
        }
        ++rec.imputation_changes;
        cp.set_positive(n, std::move(next));
      }
      if (rec.imputation_changes == 0) {
        rec.objective = *last_objective;
        report.cccp.push_back(rec);
        break;
      }
    }

    model = cp.run(model, report, "cccp", round);
    rec.objective = cp.objective(model);
    if (round > 1) {
      // Safeguard against the restricted problem ending above the previous
      // weights under the new imputations.
      const double at_previous = cp.objective(previous);
      if (at_previous < rec.objective) {
        model = previous;
        rec.objective = at_previous;
      }
      const double reevaluated = cp.objective(previous, &previous_positives);
      rec.previous_reevaluated = reevaluated;
      rec.monotone = rec.objective <= reevaluated + 1e-6 * std::max(1.0, std::abs(reevaluated));
      if (!rec.monotone) {
        report.cccp_monotone = false;
        report.cccp.push_back(rec);
        throw InvariantError("CCCP objective increased from " + std::to_string(reevaluated) + " to " +
                             std::to_string(rec.objective) + " in round " + std::to_string(round));
      }
    }
    report.cccp.push_back(rec);
    const bool stalled =
        last_objective && (*last_objective - rec.objective) < 1e-4 * std::max(1.0, std::abs(*last_objective));
    last_objective = rec.objective;
    if (stalled) break;
  }

  report.final_objective = cp.objective(model);
  report.epsilon = cp.epsilon();
  result.model = model;
  for (std::size_t n = first_weak; n < cp.items().size(); ++n) result.imputations.push_back(cp.items()[n].positive);
  return result;
}

TrainResult hallucinated_baseline(std::span<const Instance> data, const TrainConfig& config) {
  config.validate();
  const Model zero = zero_model_for(data);
  std::vector<TrainItem> strong = strong_items(data);
  if (strong.empty()) throw ValidationError("the hallucinated baseline needs fully labelled instances");

  TrainResult result;
  CuttingPlane warm(strong, config, zero);
  const Model init = warm.run(zero, result.report, "warm_start", 0);

  std::vector<TrainItem> items = strong;
  bool any_weak = false;
  for (const auto& inst : data) {
    if (is_strong(inst)) continue;
    any_weak = true;
    TrainItem item;
    item.instance = &inst;
    item.positive = impute(init, inst, std::get<WeakAnnotation>(inst.annotation), nullptr, result.report);
    item.target = FullAnnotation{item.positive};
    item.weak_slack = true;
    result.imputations.push_back(item.positive);
    items.push_back(std::move(item));
  }
  if (!any_weak) {
    result.model = init;
    return result;
  }
  CuttingPlane cp(std::move(items), config, zero);
  result.model = cp.run(init, result.report, "cccp", 1);
  result.report.epsilon = cp.epsilon();
  return result;
}

}  // namespace mulearn

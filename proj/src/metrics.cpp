#include <algorithm>
#include <cstdio>
#include <ostream>

#include "mulearn/data.hpp"

namespace mulearn {

Metrics evaluate(std::span<const Labelling> predictions, std::span<const Labelling> ground_truths,
                 std::span<const std::vector<double>> pixel_counts, int num_labels, const std::vector<Label>& excluded) {
  if (predictions.empty()) throw ValidationError("nothing to evaluate");
  if (predictions.size() != ground_truths.size() || predictions.size() != pixel_counts.size())
    throw ValidationError("predictions, ground truths and pixel counts must align");
  std::vector<double> correct(num_labels + 1, 0.0), area(num_labels + 1, 0.0);
  double hits = 0.0, labelled = 0.0;
  for (std::size_t n = 0; n < predictions.size(); ++n) {
    const auto& y = predictions[n];
    const auto& gt = ground_truths[n];
    const auto& c = pixel_counts[n];
    if (y.size() != gt.size() || y.size() != c.size()) throw ValidationError("instance " + std::to_string(n) + ": length mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (gt[i] == kUnlabelled) continue;
      if (gt[i] < 1 || gt[i] > num_labels) throw ValidationError("ground-truth label out of range");
      labelled += c[i];
      area[gt[i]] += c[i];
      if (y[i] == gt[i]) {
        hits += c[i];
        correct[gt[i]] += c[i];
      }
    }
  }
  if (labelled == 0) throw ValidationError("no labelled pixels to evaluate");
  Metrics m;
  m.accuracy = hits / labelled;
  double recall_sum = 0.0;
  int recall_count = 0;
  m.per_label_recall.resize(num_labels);
  for (Label k = 1; k <= num_labels; ++k) {
    if (area[k] == 0) continue;
    m.per_label_recall[k - 1] = correct[k] / area[k];
    if (std::count(excluded.begin(), excluded.end(), k)) continue;
    recall_sum += correct[k] / area[k];
    ++recall_count;
  }
  m.recall = recall_count ? recall_sum / recall_count : 0.0;
  return m;
}

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows, int num_labels,
                       const std::vector<std::string>& label_names) {
  out << "experiment_id,split,accuracy,recall";
  for (int k = 1; k <= num_labels; ++k)
    out << ",recall_" << (label_names.empty() ? std::to_string(k - 1) : label_names[k - 1]);
  out << "\n";
  for (const auto& row : rows) {
    out << row.experiment_id << "," << row.split << "," << fixed(row.metrics.accuracy) << ","
        << fixed(row.metrics.recall);
    for (int k = 0; k < num_labels; ++k) {
      out << ",";
      if (k < static_cast<int>(row.metrics.per_label_recall.size()) && row.metrics.per_label_recall[k])
        out << fixed(*row.metrics.per_label_recall[k]);
    }
    out << "\n";
  }
}

}  // namespace mulearn

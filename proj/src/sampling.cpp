#include <algorithm>
#include <cmath>
#include <random>

#include "mulearn/data.hpp"

namespace mulearn {

namespace {

std::vector<Label> instance_labels(const Instance& inst) {
  std::vector<Label> out;
  if (const auto* full = std::get_if<FullAnnotation>(&inst.annotation)) {
    for (Label k : full->labels)
      if (k != kUnlabelled) out.push_back(k);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  } else {
    out = std::get<WeakAnnotation>(inst.annotation).all_labels();
  }
  return out;
}

constexpr double kSmoothing = 1e-3;

double divergence(const std::vector<double>& counts, const std::vector<double>& reference) {
  double total = 0.0, ref_total = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    total += counts[k] + kSmoothing;
    ref_total += reference[k] + kSmoothing;
  }
  double kl = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double p = (counts[k] + kSmoothing) / total, q = (reference[k] + kSmoothing) / ref_total;
    kl += p * std::log(p / q);
  }
  return kl;
}

std::vector<double> raw_counts(const std::vector<std::vector<Label>>& labels, std::span<const std::size_t> subset,
                               int num_labels) {
  std::vector<double> counts(num_labels, 0.0);
  for (std::size_t i : subset)
    for (Label k : labels.at(i)) counts[k - 1] += 1.0;
  return counts;
}

}  // namespace

std::vector<double> label_count_distribution(const Dataset& dataset, std::span<const std::size_t> subset) {
  std::vector<std::vector<Label>> labels;
  for (const auto& inst : dataset.instances) labels.push_back(instance_labels(inst));
  auto counts = raw_counts(labels, subset, dataset.header.num_labels);
  double total = 0.0;
  for (double c : counts) total += c;
  if (total > 0)
    for (double& c : counts) c /= total;
  return counts;
}

double subset_divergence(const Dataset& dataset, std::span<const std::size_t> subset) {
  std::vector<std::vector<Label>> labels;
  for (const auto& inst : dataset.instances) labels.push_back(instance_labels(inst));
  std::vector<std::size_t> all(dataset.instances.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const int K = dataset.header.num_labels;
  return divergence(raw_counts(labels, subset, K), raw_counts(labels, all, K));
}

std::vector<std::size_t> sample_subset(const Dataset& dataset, std::size_t target, std::uint64_t seed,
                                       SubsetSampler sampler) {
  const std::size_t n = dataset.instances.size();
  if (target > n) throw ValidationError("subset size exceeds dataset size");
  if (!(sampler.lambda >= 0) || sampler.burn_in_per_item < 0) throw ValidationError("invalid sampler settings");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (target == n || target == 0) {
    order.resize(target);
    return order;
  }

  const int K = dataset.header.num_labels;
  std::vector<std::vector<Label>> labels;
  for (const auto& inst : dataset.instances) labels.push_back(instance_labels(inst));
  const auto reference = raw_counts(labels, order, K);

  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  // order[0, target) is the current subset, the rest its complement.
  auto counts = raw_counts(labels, std::span(order).first(target), K);
  double energy = divergence(counts, reference);
  std::uniform_int_distribution<std::size_t> pick_in(0, target - 1), pick_out(target, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const long long steps = static_cast<long long>(sampler.burn_in_per_item) * static_cast<long long>(n);
  for (long long step = 0; step < steps; ++step) {
    const std::size_t a = pick_in(rng), b = pick_out(rng);
    auto proposal = counts;
    for (Label k : labels[order[a]]) proposal[k - 1] -= 1.0;
    for (Label k : labels[order[b]]) proposal[k - 1] += 1.0;
    const double next = divergence(proposal, reference);
    const double u = unit(rng);
    if (next <= energy || u < std::exp(-sampler.lambda * (next - energy))) {
      std::swap(order[a], order[b]);
      counts = std::move(proposal);
      energy = next;
    }
  }
  std::vector<std::size_t> out(order.begin(), order.begin() + target);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mulearn

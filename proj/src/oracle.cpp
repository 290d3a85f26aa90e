#include "mulearn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace mulearn {

namespace {

// Visits labellings in lexicographic order; choices[i] lists node i's labels.
template <typename Fn>
void for_each_labelling(const std::vector<std::vector<Label>>& choices, EnumerationBudget budget, Fn&& fn) {
  double count = 1.0;
  for (const auto& c : choices) count *= static_cast<double>(c.size());
  if (count > static_cast<double>(budget.max_labellings))
    throw ValidationError("enumeration of " + std::to_string(count) + " labellings exceeds the budget");
  if (count == 0) return;
  const std::size_t n = choices.size();
  std::vector<std::size_t> digit(n, 0);
  Labelling y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = choices[i][0];
  for (;;) {
    fn(y);
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++digit[i] < choices[i].size()) {
        y[i] = choices[i][digit[i]];
        break;
      }
      digit[i] = 0;
      y[i] = choices[i][0];
      if (i == 0) return;
    }
    if (n == 0) return;
  }
}

std::vector<std::vector<Label>> all_labels(int num_nodes, int num_labels) {
  std::vector<Label> every;
  for (Label k = 1; k <= num_labels; ++k) every.push_back(k);
  return std::vector<std::vector<Label>>(num_nodes, every);
}

double literal_energy(const EnergyProblem& p, const Labelling& y) {
  double e = 0.0;
  for (int i = 0; i < p.num_nodes; ++i) e += p.unary[static_cast<std::size_t>(i) * p.num_labels + y[i] - 1];
  for (const auto& t : p.pairwise)
    if (y[t.i] != y[t.j]) e += t.weight;
  for (Label k = 1; k <= p.num_labels; ++k)
    if (std::find(y.begin(), y.end(), k) != y.end()) e += p.label_costs[k - 1];
  for (const auto& c : p.cliques)
    if (std::any_of(c.nodes.begin(), c.nodes.end(), [&](int i) { return y[i] == c.label; })) e += c.cost;
  return e;
}

// Pixels of the box after trimming floor(6%) of each dimension per side.
struct Trimmed {
  int left, top, right, bottom;
  bool contains(int r, int c) const { return r >= top && r <= bottom && c >= left && c <= right; }
};

Trimmed trim(const BoundingBox& b) {
  const int w = b.right - b.left + 1, h = b.bottom - b.top + 1;
  const int mx = (6 * w) / 100, my = (6 * h) / 100;
  return {b.left + mx, b.top + my, b.right - mx, b.bottom - my};
}

bool in_set(const std::vector<Label>& v, Label k) { return std::find(v.begin(), v.end(), k) != v.end(); }

}  // namespace

Enumerated brute_force_min_energy(const EnergyProblem& p, EnumerationBudget budget) {
  std::vector<std::vector<Label>> choices(p.num_nodes);
  for (int i = 0; i < p.num_nodes; ++i) {
    for (Label k = 1; k <= p.num_labels; ++k) {
      if (!p.clamps.empty() && p.clamps[i] != kUnlabelled && p.clamps[i] != k) continue;
      if (!p.allowed.empty() && !p.allowed[static_cast<std::size_t>(i) * p.num_labels + k - 1]) continue;
      choices[i].push_back(k);
    }
    if (choices[i].empty()) throw InfeasibleError("node " + std::to_string(i) + " has no admissible label");
  }
  Enumerated best;
  bool found = false;
  for_each_labelling(choices, budget, [&](const Labelling& y) {
    const double e = literal_energy(p, y);
    if (!found || e < best.value) {
      best = {y, e};
      found = true;
    }
  });
  return best;
}

double literal_loss(const Labelling& y, const Annotation& annotation, const Instance& instance,
                    const LossConfig& config) {
  const int n = instance.num_nodes();
  if (const auto* full = std::get_if<FullAnnotation>(&annotation)) {
    double loss = 0.0;
    for (int i = 0; i < n; ++i)
      if (full->labels[i] != kUnlabelled && full->labels[i] != y[i]) loss += instance.nodes[i].pixel_count;
    return loss;
  }
  const auto& z = std::get<WeakAnnotation>(annotation);
  const auto& grid = *instance.grid;
  std::set<Label> box_labels, seed_only;
  for (const auto& b : z.boxes) box_labels.insert(b.label);
  for (const auto& s : z.seeds)
    if (!box_labels.count(s.label)) seed_only.insert(s.label);

  // Node i lies in V_0 when none of its pixels is inside a trimmed box.
  std::vector<char> in_box(n, 0);
  for (int r = 0; r < grid.height(); ++r)
    for (int c = 0; c < grid.width(); ++c)
      for (const auto& b : z.boxes)
        if (trim(b).contains(r, c)) in_box[grid.node_at(r, c)] = 1;

  double loss = 0.0, outside = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = instance.nodes[i].pixel_count;
    const Label k = y[i];
    const bool known = box_labels.count(k) || seed_only.count(k) || in_set(z.image_level, k);
    if (!known) loss += c;
    if (!in_box[i]) {
      outside += c;
      if (box_labels.count(k)) loss += c;
    }
  }
  for (Label k : z.image_level) {
    if (in_set(y, k)) continue;
    loss += config.area_estimates ? (*config.area_estimates)[k - 1] : outside / z.image_level.size();
  }

  for (const auto& b : z.boxes) {
    const int w = b.right - b.left + 1, h = b.bottom - b.top + 1;
    auto hit = [&](int r, int c) {
      const int i = grid.node_at(r, c);
      if (y[i] != b.label) return false;
      // Only insiders of this box count towards filling a row or column.
      for (int rr = 0; rr < grid.height(); ++rr)
        for (int cc = 0; cc < grid.width(); ++cc)
          if (grid.node_at(rr, cc) == i && trim(b).contains(rr, cc)) return true;
      return false;
    };
    for (int r = b.top; r <= b.bottom; ++r) {
      bool filled = false;
      for (int c = b.left; c <= b.right && !filled; ++c) filled = hit(r, c);
      if (!filled) loss += config.beta * w / 2.0;
    }
    for (int c = b.left; c <= b.right; ++c) {
      bool filled = false;
      for (int r = b.top; r <= b.bottom && !filled; ++r) filled = hit(r, c);
      if (!filled) loss += config.beta * h / 2.0;
    }
  }

  std::set<Label> seeded;
  for (const auto& sd : z.seeds) seeded.insert(sd.label);
  const double present = static_cast<double>(z.image_level.size() + seeded.size());
  for (const auto& s : z.seeds) {
    double objects = 0;
    for (const auto& t : z.seeds) objects += (t.label == s.label);
    const double tau = static_cast<double>(grid.height()) * grid.width() / (present * objects);
    for (int r = 0; r < grid.height(); ++r) {
      for (int c = 0; c < grid.width(); ++c) {
        if (y[grid.node_at(r, c)] == s.label) continue;
        const double d2 = double(r - s.row) * (r - s.row) + double(c - s.col) * (c - s.col);
        loss += config.beta * std::exp(-std::numbers::pi * d2 / tau);
      }
    }
  }
  return loss;
}

Enumerated brute_force_max_score_plus_loss(const Model& model, const Instance& instance, const Annotation& annotation,
                                           const LossConfig& config, EnumerationBudget budget) {
  Enumerated best;
  bool found = false;
  for_each_labelling(all_labels(instance.num_nodes(), instance.num_labels), budget, [&](const Labelling& y) {
    double s = 0.0;
    for (int i = 0; i < instance.num_nodes(); ++i) s += dot(model.unary(y[i]), instance.nodes[i].features);
    for (const auto& e : instance.edges)
      if (y[e.u] == y[e.v]) s += dot(model.pairwise(), e.features);
    const double v = s + literal_loss(y, annotation, instance, config);
    if (!found || v > best.value) {
      best = {y, v};
      found = true;
    }
  });
  return best;
}

std::vector<Labelling> enumerate_consistent(const WeakAnnotation& weak, const Instance& instance,
                                            EnumerationBudget budget) {
  std::vector<Labelling> out;
  for_each_labelling(all_labels(instance.num_nodes(), instance.num_labels), budget, [&](const Labelling& y) {
    if (consistent_set_membership(instance, weak, y)) out.push_back(y);
  });
  return out;
}

}  // namespace mulearn

#pragma once

#include <vector>

#include "mulearn/core.hpp"
#include "mulearn/inference.hpp"
#include "mulearn/losses.hpp"

namespace mulearn {

/// Reference implementations by exhaustive enumeration. They evaluate every
/// definition directly and share no code with the inference and loss paths.
struct EnumerationBudget {
  long long max_labellings = 1'000'000;
};

struct Enumerated {
  Labelling labelling;
  double value = 0.0;
};

/// Global energy minimizer over labellings that respect clamps and allowed
/// masks; ties go to the lexicographically smallest labelling.
Enumerated brute_force_min_energy(const EnergyProblem& problem, EnumerationBudget budget = {});

/// Literal pixel-level evaluation of the annotation-specific loss.
double literal_loss(const Labelling& y, const Annotation& annotation, const Instance& instance,
                    const LossConfig& config);

/// Maximizer of score + literal_loss; ties to the lexicographically smallest.
Enumerated brute_force_max_score_plus_loss(const Model& model, const Instance& instance, const Annotation& annotation,
                                           const LossConfig& config, EnumerationBudget budget = {});

/// Every labelling in the consistent set of `weak`, in lexicographic order.
std::vector<Labelling> enumerate_consistent(const WeakAnnotation& weak, const Instance& instance,
                                            EnumerationBudget budget = {});

}  // namespace mulearn

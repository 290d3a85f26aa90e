#include <random>

#include "doctest.h"
#include "mulearn/oracle.hpp"
#include "support.hpp"

using namespace mulearn;

TEST_CASE("brute-force minimum energy") {
  EnergyProblem p(1, 3);
  p.unary = {2.0, 1.0, 5.0};
  const Enumerated e = brute_force_min_energy(p);
  CHECK(e.labelling == Labelling{2});
  CHECK(e.value == 1.0);

  p.clamp(0, 3);
  CHECK(brute_force_min_energy(p).labelling == Labelling{3});

  // Ties resolve to the lexicographically smallest labelling.
  EnergyProblem flat(2, 2);
  CHECK(brute_force_min_energy(flat).labelling == Labelling{1, 1});

  EnergyProblem big(20, 3);
  CHECK_THROWS_AS(brute_force_min_energy(big), ValidationError);
}

TEST_CASE("brute force agrees with binary expansion") {
  std::mt19937_64 rng(100);
  for (int t = 0; t < 100; ++t) {
    const EnergyProblem p = testing::random_grid_problem(2, 3, 2, rng);
    CHECK(energy(p, alpha_expansion(p, Labelling(6, 1))) == doctest::Approx(brute_force_min_energy(p).value));
  }
}

TEST_CASE("brute-force score plus loss") {
  std::mt19937_64 rng(101);
  Instance inst = testing::grid_instance(2, 2, 2, 1, rng);
  const Annotation full = FullAnnotation{{1, 2, 2, 1}};
  const auto best = brute_force_max_score_plus_loss(Model(2, 1, 1), inst, full, {});
  CHECK(best.labelling == Labelling{2, 1, 1, 2});
  CHECK(best.value == 4.0);

  for (int t = 0; t < 20; ++t) {
    const Model m = testing::random_model(2, 1, 1, rng);
    const Annotation z = WeakAnnotation{{1}, {}, {}};
    const auto b = brute_force_max_score_plus_loss(m, inst, z, {});
    for (int s = 0; s < 10; ++s) {
      const auto y = testing::random_labelling(4, 2, rng);
      CHECK(b.value >= score(m, inst, y) + literal_loss(y, z, inst, {}) - 1e-12);
    }
    // Binary Hamming case against the energy form.
    const Annotation gt = FullAnnotation{testing::random_labelling(4, 2, rng)};
    const EnergyProblem p = build_loss_augmented_energy(m, inst, gt, {});
    const auto y = alpha_expansion(p, unary_argmin(p));
    CHECK(score(m, inst, y) + literal_loss(y, gt, inst, {}) ==
          doctest::Approx(brute_force_max_score_plus_loss(m, inst, gt, {}).value));
  }
}

TEST_CASE("consistent-set enumeration") {
  Instance two;
  two.num_labels = 2;
  two.nodes = {{{1.0}, 1.0}, {{1.0}, 1.0}};
  two.annotation = FullAnnotation{{1, 2}};
  CHECK(enumerate_consistent(WeakAnnotation{{1, 2}, {}, {}}, two) == std::vector<Labelling>{{1, 2}, {2, 1}});
  CHECK(enumerate_consistent(WeakAnnotation{{2}, {}, {}}, two) == std::vector<Labelling>{{2, 2}});

  std::mt19937_64 rng(102);
  const Instance inst = testing::grid_instance(2, 3, 3, 1, rng);
  const WeakAnnotation seeds{{1, 2}, {}, {{3, 1, 2}}};
  const auto all = enumerate_consistent(seeds, inst);
  CHECK(!all.empty());
  for (const auto& y : all) {
    CHECK(y[5] == 3);
    CHECK(consistent_set_membership(inst, seeds, y));
  }
}

#include <random>

#include "doctest.h"
#include "mulearn/geometry.hpp"
#include "mulearn/inference.hpp"
#include "mulearn/oracle.hpp"
#include "support.hpp"

using namespace mulearn;

TEST_CASE("energy evaluation examples") {
  CHECK(energy(EnergyProblem(0, 2), {}) == 0.0);
  EnergyProblem p(1, 2);
  p.unary = {0.0, 5.0};
  p.label_costs = {0.0, 3.0};
  CHECK(energy(p, {2}) == doctest::Approx(8.0));

  EnergyProblem q(2, 2);
  q.cliques.push_back({{0, 1}, 1, 4.0});
  CHECK(energy(q, {1, 2}) == doctest::Approx(4.0));
  CHECK(energy(q, {2, 2}) == doctest::Approx(0.0));

  q.clamp(0, 2);
  CHECK_THROWS_AS(energy(q, {1, 2}), ValidationError);
}

TEST_CASE("build_energy negates the score") {
  const Instance inst = testing::two_node_instance();
  const Model m(2, 1, 1, {1.0, 0.0, 5.0});
  const EnergyProblem p = build_energy(m, inst);
  const auto best = brute_force_min_energy(p);
  CHECK(best.labelling == Labelling{1, 1});
  for (const Labelling& y : {Labelling{1, 1}, Labelling{1, 2}, Labelling{2, 1}, Labelling{2, 2}})
    CHECK(energy(p, y) + p.offset == doctest::Approx(-score(m, inst, y)));

  const EnergyProblem zero = build_energy(Model(2, 1, 1), inst);
  for (double u : zero.unary) CHECK(u == 0.0);
  for (const auto& t : zero.pairwise) CHECK(t.weight == 0.0);

  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    const Instance g = testing::grid_instance(3, 3, 3, 2, rng);
    const Model mm = testing::random_model(3, 2, 1, rng);
    const EnergyProblem pp = build_energy(mm, g);
    const Labelling a = testing::random_labelling(9, 3, rng), b = testing::random_labelling(9, 3, rng);
    CHECK(energy(pp, a) - energy(pp, b) == doctest::Approx(score(mm, g, b) - score(mm, g, a)).epsilon(1e-9));
  }
}

TEST_CASE("binary expansion reaches the global minimum") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    const EnergyProblem p = testing::random_grid_problem(3, 3, 2, rng);
    const Labelling y = expand(p, Labelling(9, 1), 2);
    CHECK(energy(p, y) == doctest::Approx(brute_force_min_energy(p).value).epsilon(1e-12));
  }
}

TEST_CASE("expansion never increases energy and fixed points stay put") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 50; ++t) {
    EnergyProblem p = testing::random_grid_problem(3, 3, 3, rng);
    p.label_costs = {0.5, 1.0, 2.0};
    p.cliques.push_back({{0, 1, 2}, 2, 1.5});
    Labelling y = testing::random_labelling(9, 3, rng);
    for (Label k = 1; k <= 3; ++k) {
      const Labelling next = expand(p, y, k);
      CHECK(energy(p, next) <= energy(p, y) + 1e-12);
      y = next;
    }
    const Labelling opt = alpha_expansion(p, y);
    for (Label k = 1; k <= 3; ++k) CHECK(expand(p, opt, k) == opt);
  }
}

TEST_CASE("a large label cost keeps a label out unless already present") {
  EnergyProblem p(3, 2);
  p.unary = {1.0, 0.0, 1.0, 0.0, 1.0, 0.0};  // label 2 is 1 cheaper per node
  p.label_costs = {0.0, 3.5};
  CHECK(expand(p, {1, 1, 1}, 2) == Labelling{1, 1, 1});
  p.label_costs = {0.0, 2.5};
  CHECK(expand(p, {1, 1, 1}, 2) == Labelling{2, 2, 2});
  // Already present: the cost is sunk and the rest follow.
  p.label_costs = {0.0, 100.0};
  CHECK(expand(p, {2, 1, 1}, 2) == Labelling{2, 2, 2});
}

TEST_CASE("clique costs steer expansion") {
  EnergyProblem p(2, 2);
  p.unary = {1.0, 0.0, 1.0, 0.0};
  p.cliques.push_back({{0, 1}, 2, 1.5});
  // Gap of the all-1 alternative is 2, cheaper than avoiding the clique (cost 1.5 < 2).
  CHECK(alpha_expansion(p, {1, 1}) == Labelling{2, 2});
  p.cliques[0].cost = 2.5;
  CHECK(alpha_expansion(p, {1, 1}) == Labelling{1, 1});
  CHECK(alpha_expansion(p, {2, 2}) == Labelling{1, 1});
}

TEST_CASE("multi-label expansion against enumeration") {
  std::mt19937_64 rng(31);
  int matched = 0;
  const int trials = 60;
  for (int t = 0; t < trials; ++t) {
    EnergyProblem p = testing::random_grid_problem(3, 3, 3, rng);
    if (t % 2) p.label_costs = {1.0, 0.5, 1.5};
    const Labelling y = alpha_expansion(p, unary_argmin(p));
    const double best = brute_force_min_energy(p).value;
    CHECK(energy(p, y) >= best - 1e-9);
    CHECK(testing::expansion_local_optimum(p, y));
    matched += energy(p, y) <= best + 1e-9;
  }
  CHECK(matched >= trials * 9 / 10);
}

TEST_CASE("decomposable problems resolve to the unary argmin") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    EnergyProblem p(6, 4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& u : p.unary) u = unit(rng);
    CHECK(alpha_expansion(p, Labelling(6, 1)) == unary_argmin(p));
  }
}

TEST_CASE("map inference maximizes the score on the two-node example") {
  const Instance inst = testing::two_node_instance();
  CHECK(map_inference(Model(2, 1, 1, {1.0, 0.0, 5.0}), inst) == Labelling{1, 1});
  CHECK(map_inference(Model(2, 1, 1, {0.0, 1.0, 0.0}), inst) == Labelling{2, 2});
}

TEST_CASE("latent initialization rules") {
  std::mt19937_64 rng(1);
  const Instance inst = testing::grid_instance(2, 3, 6, 1, rng);
  CHECK(latent_initialization(inst, WeakAnnotation{{2, 5}, {}, {}}) == Labelling(6, 2));
  // Box label 4 covering nodes 1 and 2 (top row, columns 1..2).
  CHECK(latent_initialization(inst, WeakAnnotation{{1}, {{4, 1, 0, 2, 0}}, {}}) == Labelling{1, 4, 4, 1, 1, 1});
  const auto y = latent_initialization(inst, WeakAnnotation{{1}, {{4, 1, 0, 2, 0}, {6, 2, 0, 2, 1}}, {}});
  CHECK(y[2] == 6);
  CHECK(y[1] == 4);
}

TEST_CASE("annotation-consistent inference") {
  std::mt19937_64 rng(2);
  Instance inst = testing::grid_instance(3, 3, 3, 1, rng);
  const Model prefer1(3, 1, 1, {0.0, 0.0, 0.0, 0.0});
  SUBCASE("single image-level label") {
    CHECK(annotation_consistent_inference(testing::random_model(3, 1, 1, rng), inst, WeakAnnotation{{2}, {}, {}}) ==
          Labelling(9, 2));
  }
  SUBCASE("seed clamps its node") {
    for (auto& n : inst.nodes) n.features = {1.0};
    const Model m(3, 1, 1, {1.0, 0.0, 0.0, 0.0});
    // Seed at pixel (1, 2) = node 5.
    const auto y = annotation_consistent_inference(m, inst, WeakAnnotation{{1}, {}, {{3, 1, 2}}});
    Labelling expected(9, 1);
    expected[5] = 3;
    CHECK(y == expected);
  }
  SUBCASE("pinpointing tightens a box the model dislikes") {
    std::mt19937_64 r(5);
    Instance big = testing::grid_instance(6, 6, 2, 1, r);
    for (auto& n : big.nodes) n.features = {1.0};
    const Model m(2, 1, 1, {1.0, -1.0, 0.5});
    const WeakAnnotation z{{1}, {{2, 1, 1, 4, 4}}, {}};
    ConsistentInferenceStats stats;
    const auto y = annotation_consistent_inference(m, big, z, &stats);
    const auto report = check_consistency(big, z, y);
    CHECK(report.boxes_tight);
    CHECK(report.boxes_contained);
    CHECK(report.labels_allowed);
    CHECK(stats.pinpoint_iterations[0] <= stats.insider_counts[0]);
  }
}

TEST_CASE("pinpointing on random boxes") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 40; ++t) {
    Instance inst = testing::grid_instance(8, 8, 3, 2, rng, 2);
    const Model m = testing::random_model(3, 2, 1, rng);
    std::uniform_int_distribution<int> coord(0, 7);
    int l = coord(rng), r = coord(rng), tp = coord(rng), b = coord(rng);
    if (l > r) std::swap(l, r);
    if (tp > b) std::swap(tp, b);
    const WeakAnnotation z{{1}, {{3, l, tp, r, b}}, {}};
    ConsistentInferenceStats stats;
    const auto y = annotation_consistent_inference(m, inst, z, &stats);
    CHECK(check_consistency(inst, z, y).boxes_tight);
    CHECK(stats.pinpoint_iterations[0] <= stats.insider_counts[0]);
  }
}

TEST_CASE("geometry: margin and insiders") {
  const PixelRect s = shrink_box({1, 0, 0, 49, 19});
  CHECK(s.left == 3);
  CHECK(s.right == 46);
  CHECK(s.top == 1);
  CHECK(s.bottom == 18);
  std::mt19937_64 rng(1);
  const Instance inst = testing::grid_instance(4, 4, 2, 1, rng, 2);
  CHECK(box_insiders(*inst.grid, {1, 1, 1, 2, 2}) == std::vector<int>{0, 1, 2, 3});
  CHECK(box_insiders(*inst.grid, {1, 0, 0, 1, 1}) == std::vector<int>{0});
}

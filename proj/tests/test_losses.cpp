#include <cmath>
#include <random>

#include "doctest.h"
#include "mulearn/losses.hpp"
#include "mulearn/oracle.hpp"
#include "support.hpp"

using namespace mulearn;

namespace {

const std::vector<double> kFour{4, 4, 4, 4};

// 4x4 image. Node 0 owns row 0 and the first three pixels of row 1 (7 pixels);
// every other pixel is its own node.
Instance seven_pixel_instance() {
  std::vector<int> map(16);
  int next = 1;
  for (int p = 0; p < 16; ++p) map[p] = p < 7 ? 0 : next++;
  Instance inst;
  inst.id = "seven";
  inst.num_labels = 2;
  inst.edge_dim = 1;
  inst.grid.emplace(4, 4, map);
  const auto counts = inst.grid->pixel_counts(next);
  for (int i = 0; i < next; ++i) inst.nodes.push_back({{1.0}, counts[i]});
  inst.annotation = FullAnnotation{Labelling(next, 1)};
  return inst;
}

}  // namespace

TEST_CASE("hamming loss") {
  CHECK(hamming_loss({1, 2, 2, 1}, {1, 2, 2, 1}, kFour) == 0.0);
  CHECK(hamming_loss({1, 1, 2, 2}, {1, 2, 2, 2}, kFour) == 4.0);
  CHECK(hamming_loss({1, 1, 2, 2}, {0, 0, 0, 0}, kFour) == 0.0);
  CHECK_THROWS_AS(hamming_loss({1, 1}, {1, 1, 1}, kFour), ValidationError);
}

TEST_CASE("proxy image-level loss") {
  CHECK(proxy_il_loss({1, 2, 2, 1}, {1, 2, 2, 1}, kFour) == 0.0);
  CHECK(proxy_il_loss({1, 1, 1, 1}, {1, 1, 2, 2}, kFour) == 8.0);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto a = testing::random_labelling(4, 3, rng), b = testing::random_labelling(4, 3, rng);
    CHECK(proxy_il_loss(a, b, kFour) == proxy_il_loss(b, a, kFour));
  }
}

TEST_CASE("image-level loss") {
  LossConfig config;
  CHECK(il_loss({1, 2, 2, 1}, {1, 2}, kFour, config) == 0.0);
  CHECK(il_loss({1, 1, 1, 1}, {1, 2}, kFour, config) == 8.0);
  CHECK(il_loss({3, 3, 1, 2}, {1, 2}, kFour, config) == 8.0);
  CHECK_THROWS_AS(il_loss({1}, {}, {kFour.data(), 1}, config), ValidationError);
  config.area_estimates = std::vector<double>{1.0, 5.0, 1.0};
  CHECK(il_loss({1, 1, 1, 1}, {1, 2}, kFour, config) == 5.0);
}

TEST_CASE("image-level loss bounds the proxy loss") {
  // For every consistent labelling, the loss with areas read off that
  // labelling dominates the proxy loss against it.
  std::mt19937_64 rng(11);
  const Instance inst = testing::grid_instance(2, 2, 3, 1, rng);
  const auto c = inst.pixel_counts();
  for (const std::vector<Label>& z : {std::vector<Label>{1}, {1, 2}, {2, 3}, {1, 2, 3}}) {
    const WeakAnnotation weak{z, {}, {}};
    for (const Labelling& truth : enumerate_consistent(weak, inst)) {
      LossConfig config;
      std::vector<double> areas(3, 0.0);
      for (std::size_t i = 0; i < truth.size(); ++i) areas[truth[i] - 1] += c[i];
      config.area_estimates = areas;
      for (int t = 0; t < 20; ++t) {
        const auto y = testing::random_labelling(4, 3, rng);
        CHECK(il_loss(y, z, c, config) >= proxy_il_loss(y, truth, c) - 1e-12);
      }
    }
  }
}

TEST_CASE("default areas are the uniform expectation") {
  std::mt19937_64 rng(4);
  const std::vector<double> c{1, 2, 3, 4, 5};
  for (int t = 0; t < 30; ++t) {
    const auto y = testing::random_labelling(5, 4, rng);
    const std::vector<Label> z{1, 3};
    LossConfig uniform;
    uniform.area_estimates = std::vector<double>(4, 15.0 / 2);
    CHECK(il_loss(y, z, c, {}) == doctest::Approx(il_loss(y, z, c, uniform)));
  }
}

TEST_CASE("box loss terms") {
  std::mt19937_64 rng(1);
  Instance inst = testing::grid_instance(4, 4, 2, 1, rng);
  const WeakAnnotation weak{{1}, {{2, 1, 1, 2, 2}}, {}};
  Labelling inside(16, 1);
  for (int r = 1; r <= 2; ++r)
    for (int col = 1; col <= 2; ++col) inside[r * 4 + col] = 2;
  CHECK(il_bb_loss(inside, weak, inst, {}) == 0.0);
  // Interior entirely non-2: two empty rows and two empty columns at half
  // the box extent each.
  CHECK(il_bb_loss(Labelling(16, 1), weak, inst, {}) == doctest::Approx(4.0));
  LossConfig half;
  half.beta = 0.5;
  CHECK(il_bb_loss(Labelling(16, 1), weak, inst, half) == doctest::Approx(2.0));

  const Instance seven = seven_pixel_instance();
  const WeakAnnotation box{{1}, {{2, 2, 2, 3, 3}}, {}};
  Labelling y(seven.num_nodes(), 1);
  for (int i = 0; i < seven.num_nodes(); ++i) {
    const int p = i == 0 ? 0 : i + 6;
    if (p / 4 >= 2 && p % 4 >= 2) y[i] = 2;
  }
  CHECK(il_bb_loss(y, box, seven, {}) == 0.0);
  y[0] = 2;
  CHECK(il_bb_loss(y, box, seven, {}) == doctest::Approx(7.0));
}

TEST_CASE("seed loss terms") {
  std::mt19937_64 rng(2);
  const Instance inst = testing::grid_instance(10, 12, 4, 1, rng);
  const WeakAnnotation weak{{1, 2}, {}, {{3, 1, 1}, {3, 8, 9}, {4, 5, 5}}};
  CHECK(seed_tau(inst, weak, 3) == doctest::Approx(15.0));
  CHECK(seed_tau(inst, weak, 4) == doctest::Approx(30.0));

  const auto weights = seed_node_weights(*inst.grid, inst.num_nodes(), {3, 4, 7}, 15.0);
  CHECK(weights[4 * 12 + 7] == 1.0);

  // Mislabelling only the centre pixel of a lone seed costs beta.
  const WeakAnnotation one{{1}, {}, {{2, 4, 4}}};
  Labelling y(inst.num_nodes(), 2);
  y[0] = 1;
  const double correct = il_os_loss(y, one, inst, {});
  y[4 * 12 + 4] = 1;
  LossConfig config;
  config.beta = 2.5;
  const double base = il_os_loss(y, one, inst, {}) - correct;
  CHECK(base == doctest::Approx(1.0));
  y[4 * 12 + 4] = 2;
  const double correct_beta = il_os_loss(y, one, inst, config);
  y[4 * 12 + 4] = 1;
  CHECK(il_os_loss(y, one, inst, config) - correct_beta == doctest::Approx(2.5));
}

TEST_CASE("losses vanish on consistent labellings and are nonnegative") {
  std::mt19937_64 rng(6);
  const Instance inst = testing::grid_instance(3, 3, 3, 1, rng);
  const WeakAnnotation weak{{1, 2}, {{3, 0, 0, 1, 1}}, {}};
  for (const Labelling& y : enumerate_consistent(weak, inst)) {
    if (check_consistency(inst, weak, y).labels_present) CHECK(weak_loss(y, weak, inst, {}) == 0.0);
  }
  for (int t = 0; t < 100; ++t) CHECK(weak_loss(testing::random_labelling(9, 3, rng), weak, inst, {}) >= 0.0);
}

TEST_CASE("loss implementations agree with the literal oracle") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const Instance inst = testing::grid_instance(6, 6, 3, 1, rng, 2);
    const std::vector<Annotation> annotations{
        FullAnnotation{testing::random_labelling(9, 3, rng)},
        WeakAnnotation{{1, 2}, {}, {}},
        WeakAnnotation{{1}, {{3, 1, 0, 4, 3}}, {}},
        WeakAnnotation{{1}, {}, {{2, 3, 3}, {3, 0, 5}}},
    };
    for (const auto& a : annotations) {
      const auto y = testing::random_labelling(9, 3, rng);
      CHECK(annotation_loss(y, a, inst, {}) == doctest::Approx(literal_loss(y, a, inst, {})).epsilon(1e-9));
    }
  }
}

TEST_CASE("loss-augmented energy identity") {
  std::mt19937_64 rng(12);
  const Instance inst = testing::grid_instance(6, 6, 3, 2, rng, 2);
  const Model m = testing::random_model(3, 2, 1, rng);
  const std::vector<Annotation> annotations{
      FullAnnotation{testing::random_labelling(9, 3, rng)},
      WeakAnnotation{{1, 2}, {}, {}},
      WeakAnnotation{{1}, {{3, 1, 0, 4, 3}, {2, 3, 2, 5, 5}}, {}},
      WeakAnnotation{{1}, {}, {{2, 3, 3}, {3, 0, 5}}},
  };
  for (const auto& a : annotations) {
    const EnergyProblem p = build_loss_augmented_energy(m, inst, a, {});
    for (int t = 0; t < 50; ++t) {
      const auto y = testing::random_labelling(9, 3, rng);
      CHECK(std::abs(energy(p, y) + p.offset + score(m, inst, y) + annotation_loss(y, a, inst, {})) <= 1e-9);
    }
  }
}

TEST_CASE("loss-augmented minimizers") {
  Instance one;
  one.num_labels = 2;
  one.edge_dim = 1;
  one.nodes = {{{1.0}, 1.0}};
  one.annotation = FullAnnotation{{1}};
  const EnergyProblem p = build_loss_augmented_energy(Model(2, 1, 1), one, one.annotation, {});
  CHECK(alpha_expansion(p, {1}) == Labelling{2});

  std::mt19937_64 rng(13);
  for (int t = 0; t < 20; ++t) {
    const Instance inst = testing::grid_instance(2, 2, 2, 1, rng);
    const Model m = testing::random_model(2, 1, 1, rng);
    const Annotation z = WeakAnnotation{{1, 2}, {}, {}};
    const EnergyProblem q = build_loss_augmented_energy(m, inst, z, {});
    const auto best = brute_force_max_score_plus_loss(m, inst, z, {});
    const auto y = alpha_expansion(q, unary_argmin(q));
    CHECK(score(m, inst, y) + annotation_loss(y, z, inst, {}) == doctest::Approx(best.value).epsilon(1e-9));
  }
}

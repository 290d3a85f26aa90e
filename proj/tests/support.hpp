#pragma once

#include <random>
#include <vector>

#include "mulearn/core.hpp"
#include "mulearn/inference.hpp"

namespace testing {

using namespace mulearn;

// Two nodes with features [2] and [3] joined by an edge with feature [1].
inline Instance two_node_instance() {
  Instance inst;
  inst.id = "two";
  inst.num_labels = 2;
  inst.edge_dim = 1;
  inst.nodes = {{{2.0}, 1.0}, {{3.0}, 1.0}};
  inst.edges = {{0, 1, {1.0}}};
  inst.annotation = FullAnnotation{{1, 1}};
  return inst;
}

// H x W pixels cut into block x block superpixels with random features and
// 4-neighbour edges.
inline Instance grid_instance(int H, int W, int K, int d, std::mt19937_64& rng, int block = 1, int e = 1) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int gh = (H + block - 1) / block, gw = (W + block - 1) / block;
  Instance inst;
  inst.id = "grid";
  inst.num_labels = K;
  inst.edge_dim = e;
  std::vector<int> map(static_cast<std::size_t>(H) * W);
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) map[r * W + c] = (r / block) * gw + c / block;
  inst.grid.emplace(H, W, map);
  const auto counts = inst.grid->pixel_counts(gh * gw);
  for (int i = 0; i < gh * gw; ++i) {
    Node n;
    n.pixel_count = counts[i];
    for (int j = 0; j < d; ++j) n.features.push_back(gauss(rng));
    inst.nodes.push_back(n);
  }
  for (int r = 0; r < gh; ++r) {
    for (int c = 0; c < gw; ++c) {
      const int u = r * gw + c;
      auto feats = [&] {
        std::vector<double> f;
        for (int j = 0; j < e; ++j) f.push_back(unit(rng));
        return f;
      };
      if (c + 1 < gw) inst.edges.push_back({u, u + 1, feats()});
      if (r + 1 < gh) inst.edges.push_back({u, u + gw, feats()});
    }
  }
  inst.annotation = FullAnnotation{Labelling(inst.nodes.size(), 1)};
  return inst;
}

inline Model random_model(int K, int d, int e, std::mt19937_64& rng, double pairwise_scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> w;
  for (int i = 0; i < K * d; ++i) w.push_back(gauss(rng));
  for (int i = 0; i < e; ++i) w.push_back(pairwise_scale * unit(rng));
  return Model(K, d, e, w);
}

inline Labelling random_labelling(int n, int K, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(1, K);
  Labelling y(n);
  for (auto& k : y) k = pick(rng);
  return y;
}

// Random associative problem on a rows x cols 4-connected grid.
inline EnergyProblem random_grid_problem(int rows, int cols, int K, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  EnergyProblem p(rows * cols, K);
  for (auto& u : p.unary) u = 4.0 * unit(rng);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int i = r * cols + c;
      if (c + 1 < cols) p.pairwise.push_back({i, i + 1, 1.5 * unit(rng)});
      if (r + 1 < rows) p.pairwise.push_back({i, i + cols, 1.5 * unit(rng)});
    }
  }
  return p;
}

// Every single expansion move from y leaves the energy unchanged.
inline bool expansion_local_optimum(const EnergyProblem& p, const Labelling& y) {
  const double e = energy(p, y);
  for (Label k = 1; k <= p.num_labels; ++k)
    if (energy(p, expand(p, y, k)) < e - 1e-9) return false;
  return true;
}

}  // namespace testing

#include <cmath>
#include <random>
#include <tuple>

#include "doctest.h"
#include "mulearn/maxflow.hpp"

using namespace mulearn;

namespace {

// Minimum cut by enumerating every partition with s on the source side and
// t on the sink side.
double brute_force_min_cut(const FlowNetwork& net) {
  const int n = net.num_nodes();
  std::vector<int> free;
  for (int v = 0; v < n; ++v)
    if (v != net.source() && v != net.sink()) free.push_back(v);
  double best = -1;
  for (unsigned mask = 0; mask < (1u << free.size()); ++mask) {
    std::vector<bool> side(n, false);
    side[net.source()] = true;
    for (std::size_t b = 0; b < free.size(); ++b) side[free[b]] = (mask >> b) & 1u;
    const double c = cut_capacity(net, side);
    if (best < 0 || c < best) best = c;
  }
  return best;
}

FlowNetwork random_network(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> node(0, n - 1), cap(0, 9);
  FlowNetwork net(n, 0, n - 1);
  const int arcs = n * 2;
  for (int a = 0; a < arcs; ++a) {
    const int u = node(rng), v = node(rng);
    if (u == v) continue;
    net.add_arc(u, v, cap(rng), rng() % 3 == 0 ? cap(rng) : 0.0);
  }
  return net;
}

}  // namespace

TEST_CASE("max flow: hand examples") {
  FlowNetwork empty(2, 0, 1);
  const MinCut none = max_flow(empty);
  CHECK(none.value == 0.0);
  CHECK(none.source_side == std::vector<bool>{true, false});

  // s=0, a=1, b=2, t=3
  FlowNetwork net(4, 0, 3);
  net.add_arc(0, 1, 3);
  net.add_arc(0, 2, 2);
  net.add_arc(1, 3, 2);
  net.add_arc(2, 3, 3);
  net.add_arc(1, 2, 1);
  const MinCut cut = max_flow(net);
  CHECK(cut.value == doctest::Approx(5.0));
  CHECK(cut.source_side[0]);
  CHECK_FALSE(cut.source_side[3]);
  CHECK(cut_capacity(net, cut.source_side) == doctest::Approx(cut.value));
}

TEST_CASE("max flow equals exhaustive minimum cut on random networks") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 100; ++t) {
    const FlowNetwork net = random_network(rng, 2 + t % 7);
    const MinCut cut = max_flow(net);
    CHECK(cut.value == doctest::Approx(brute_force_min_cut(net)).epsilon(1e-12));
    CHECK(std::abs(cut_capacity(net, cut.source_side) - cut.value) <= 1e-9);
  }
}

TEST_CASE("max flow scales with capacities and is monotone in arcs") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const int n = 6;
    std::vector<std::tuple<int, int, double>> arcs;
    std::uniform_int_distribution<int> node(0, n - 1);
    std::uniform_real_distribution<double> cap(0.0, 5.0);
    for (int a = 0; a < 12; ++a) {
      const int u = node(rng), v = node(rng);
      if (u != v) arcs.emplace_back(u, v, cap(rng));
    }
    auto build = [&](double scale, std::size_t count) {
      FlowNetwork net(n, 0, n - 1);
      for (std::size_t a = 0; a < count; ++a) net.add_arc(std::get<0>(arcs[a]), std::get<1>(arcs[a]), scale * std::get<2>(arcs[a]));
      return net;
    };
    const double base = max_flow(build(1.0, arcs.size())).value;
    CHECK(max_flow(build(3.5, arcs.size())).value == doctest::Approx(3.5 * base).epsilon(1e-9));
    if (!arcs.empty()) CHECK(max_flow(build(1.0, arcs.size() - 1)).value <= base + 1e-12);
  }
}

TEST_CASE("infinite arcs use the sentinel") {
  FlowNetwork net(3, 0, 2);
  net.add_arc(0, 1, FlowNetwork::kInfinity);
  net.add_arc(1, 2, 4);
  CHECK(net.infinity_sentinel() == doctest::Approx(5.0));
  CHECK(max_flow(net).value == doctest::Approx(4.0));
}

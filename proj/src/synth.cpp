#include <cmath>
#include <random>

#include "mulearn/data.hpp"

namespace mulearn {

void SynthConfig::validate() const {
  if (grid_size < 2) throw ValidationError("grid_size must be at least 2");
  if (pixel_scale < 1) throw ValidationError("pixel_scale must be positive");
  if (num_stuff < 1) throw ValidationError("need at least one stuff label");
  if (num_things < 0) throw ValidationError("num_things must be nonnegative");
  if (num_labels() < 2) throw ValidationError("need at least two labels");
  if (extra_dims < 0) throw ValidationError("extra_dims must be nonnegative");
  if (!(noise >= 0)) throw ValidationError("noise must be nonnegative");
  if (count < 0) throw ValidationError("count must be nonnegative");
}

namespace {

Instance generate_one(const SynthConfig& cfg, int index) {
  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(index) + 1);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int G = cfg.grid_size, s = cfg.pixel_scale, K = cfg.num_labels(), T = cfg.num_things;
  Labelling y(static_cast<std::size_t>(G) * G);

  // Stuff: one band, or two distinct labels split at a random row.
  const Label top = T + uniform_int(1, cfg.num_stuff);
  Label bottom = top;
  int split = G;
  if (cfg.num_stuff > 1 && uniform_int(0, 1) == 1) {
    while (bottom == top) bottom = T + uniform_int(1, cfg.num_stuff);
    split = uniform_int(1, G - 1);
  }
  for (int r = 0; r < G; ++r)
    for (int c = 0; c < G; ++c) y[r * G + c] = r < split ? top : bottom;

  if (T > 0) {
    const int objects = uniform_int(1, 2);
    const int max_side = std::max(2, G / 2);
    for (int o = 0; o < objects; ++o) {
      const Label k = uniform_int(1, T);
      const int h = uniform_int(2, max_side), w = uniform_int(2, max_side);
      const int r0 = uniform_int(0, G - h), c0 = uniform_int(0, G - w);
      for (int r = r0; r < r0 + h; ++r)
        for (int c = c0; c < c0 + w; ++c) y[r * G + c] = k;
    }
  }

  Instance inst;
  inst.id = "synth-" + std::to_string(cfg.seed) + "-" + std::to_string(index);
  inst.num_labels = K;
  inst.edge_dim = 2;
  const int d = K + cfg.extra_dims + 1;
  for (int i = 0; i < G * G; ++i) {
    Node n;
    n.pixel_count = static_cast<double>(s) * s;
    n.features.assign(d, 0.0);
    n.features[y[i] - 1] = 1.0;
    for (int j = 0; j < d - 1; ++j) n.features[j] += cfg.noise * gauss(rng);
    n.features[d - 1] = 1.0;
    inst.nodes.push_back(std::move(n));
  }
  auto contrast = [&](int u, int v) {
    double dist = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = inst.nodes[u].features[j] - inst.nodes[v].features[j];
      dist += diff * diff;
    }
    return std::exp(-dist / 4.0);
  };
  for (int r = 0; r < G; ++r) {
    for (int c = 0; c < G; ++c) {
      const int u = r * G + c;
      if (c + 1 < G) inst.edges.push_back({u, u + 1, {1.0, contrast(u, u + 1)}});
      if (r + 1 < G) inst.edges.push_back({u, u + G, {1.0, contrast(u, u + G)}});
    }
  }
  std::vector<int> node_map(static_cast<std::size_t>(G * s) * (G * s));
  for (int pr = 0; pr < G * s; ++pr)
    for (int pc = 0; pc < G * s; ++pc) node_map[static_cast<std::size_t>(pr) * G * s + pc] = (pr / s) * G + pc / s;
  inst.grid.emplace(G * s, G * s, std::move(node_map));
  inst.annotation = FullAnnotation{y};
  return inst;
}

}  // namespace

Dataset synth_generate(const SynthConfig& config) {
  config.validate();
  Dataset ds;
  ds.header.num_labels = config.num_labels();
  ds.header.unary_dim = config.num_labels() + config.extra_dims + 1;
  ds.header.edge_dim = 2;
  for (int t = 1; t <= config.num_things; ++t) ds.header.label_names.push_back("thing" + std::to_string(t));
  for (int s = 1; s <= config.num_stuff; ++s) {
    ds.header.label_names.push_back(s == config.num_stuff ? "other" : "stuff" + std::to_string(s));
    ds.header.background_labels.push_back(config.num_things + s);
  }
  for (int i = 0; i < config.count; ++i) ds.instances.push_back(generate_one(config, i));
  return ds;
}

}  // namespace mulearn

#include <algorithm>
#include <limits>

#include "mulearn/data.hpp"

namespace mulearn {

namespace {

struct Component {
  Label label;
  std::vector<std::pair<int, int>> pixels;  // (row, col) in BFS order
};

std::vector<Component> thing_components(const PixelGrid& grid, const Labelling& y, const std::vector<Label>& things) {
  const int H = grid.height(), W = grid.width();
  const auto map = pixel_labels(grid, y);
  std::vector<char> seen(map.size(), 0);
  std::vector<Component> out;
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      const Label k = map[r * W + c];
      if (seen[r * W + c] || !std::count(things.begin(), things.end(), k)) continue;
      Component comp{k, {}};
      std::vector<std::pair<int, int>> stack{{r, c}};
      seen[r * W + c] = 1;
      while (!stack.empty()) {
        const auto [pr, pc] = stack.back();
        stack.pop_back();
        comp.pixels.emplace_back(pr, pc);
        const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
        for (int n = 0; n < 4; ++n) {
          const int nr = pr + dr[n], nc = pc + dc[n];
          if (!grid.contains(nr, nc) || seen[nr * W + nc] || map[nr * W + nc] != k) continue;
          seen[nr * W + nc] = 1;
          stack.emplace_back(nr, nc);
        }
      }
      out.push_back(std::move(comp));
    }
  }
  return out;
}

// Squared Euclidean distance transform along one line (lower envelope of
// parabolas).
void distance_1d(const std::vector<double>& f, std::vector<double>& d) {
  const int n = static_cast<int>(f.size());
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    for (;;) {
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  d.assign(n, 0.0);
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    d[q] = double(q - v[k]) * (q - v[k]) + f[v[k]];
  }
}

// Squared distance of every pixel of `mask` to the nearest pixel outside it,
// with a one-pixel border of outside pixels around the image.
std::vector<double> squared_distance_transform(const std::vector<char>& mask, int H, int W) {
  const int PH = H + 2, PW = W + 2;
  const double inf = 1e18;
  std::vector<double> g(static_cast<std::size_t>(PH) * PW, 0.0);
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c)
      if (mask[r * W + c]) g[(r + 1) * PW + c + 1] = inf;
  std::vector<double> f, d;
  for (int c = 0; c < PW; ++c) {
    f.resize(PH);
    for (int r = 0; r < PH; ++r) f[r] = g[r * PW + c];
    distance_1d(f, d);
    for (int r = 0; r < PH; ++r) g[r * PW + c] = d[r];
  }
  for (int r = 0; r < PH; ++r) {
    f.assign(g.begin() + r * PW, g.begin() + (r + 1) * PW);
    distance_1d(f, d);
    std::copy(d.begin(), d.end(), g.begin() + r * PW);
  }
  std::vector<double> out(static_cast<std::size_t>(H) * W);
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) out[r * W + c] = g[(r + 1) * PW + c + 1];
  return out;
}

}  // namespace

std::vector<Label> derive_image_level(const Labelling& y, std::span<const double> pixel_counts, Label other) {
  if (y.size() != pixel_counts.size()) throw ValidationError("labelling and pixel-count lengths differ");
  std::vector<Label> present;
  double total = 0.0, unlabelled = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    total += pixel_counts[i];
    if (y[i] == kUnlabelled)
      unlabelled += pixel_counts[i];
    else
      present.push_back(y[i]);
  }
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  if (present.size() == 1 || (total > 0 && unlabelled >= 0.3 * total)) {
    present.push_back(other);
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
  }
  return present;
}

std::vector<Label> pixel_labels(const PixelGrid& grid, const Labelling& y) {
  std::vector<Label> out;
  out.reserve(grid.node_map().size());
  for (int node : grid.node_map()) out.push_back(y.at(node));
  return out;
}

std::vector<BoundingBox> derive_boxes(const PixelGrid& grid, const Labelling& y, const std::vector<Label>& things) {
  std::vector<BoundingBox> out;
  for (const auto& comp : thing_components(grid, y, things)) {
    BoundingBox b{comp.label, grid.width(), grid.height(), -1, -1};
    for (const auto& [r, c] : comp.pixels) {
      b.left = std::min(b.left, c);
      b.right = std::max(b.right, c);
      b.top = std::min(b.top, r);
      b.bottom = std::max(b.bottom, r);
    }
    out.push_back(b);
  }
  return out;
}

std::vector<Seed> derive_seeds(const PixelGrid& grid, const Labelling& y, const std::vector<Label>& things) {
  const int H = grid.height(), W = grid.width();
  std::vector<Seed> out;
  for (const auto& comp : thing_components(grid, y, things)) {
    std::vector<char> mask(static_cast<std::size_t>(H) * W, 0);
    double cr = 0.0, cc = 0.0;
    for (const auto& [r, c] : comp.pixels) {
      mask[r * W + c] = 1;
      cr += r;
      cc += c;
    }
    cr /= comp.pixels.size();
    cc /= comp.pixels.size();
    const auto dist = squared_distance_transform(mask, H, W);
    auto pixels = comp.pixels;
    std::sort(pixels.begin(), pixels.end());
    Seed best{comp.label, -1, -1};
    double best_dist = -1.0, best_centre = 0.0;
    for (const auto& [r, c] : pixels) {
      const double dd = dist[r * W + c];
      const double centre = (r - cr) * (r - cr) + (c - cc) * (c - cc);
      if (dd > best_dist || (dd == best_dist && centre < best_centre)) {
        best = {comp.label, r, c};
        best_dist = dd;
        best_centre = centre;
      }
    }
    out.push_back(best);
  }
  return out;
}

WeakAnnotation derive_weak(const Instance& instance, const Labelling& y, const DatasetHeader& header, WeakKind kind) {
  if (kind != WeakKind::ImageLevel && !instance.grid)
    throw ValidationError("instance '" + instance.id + "': boxes and seeds need a pixel grid");
  WeakAnnotation weak;
  auto il = derive_image_level(y, instance.pixel_counts(), header.other_label());
  const auto things = header.thing_labels();
  if (kind == WeakKind::Boxes) weak.boxes = derive_boxes(*instance.grid, y, things);
  if (kind == WeakKind::Seeds) weak.seeds = derive_seeds(*instance.grid, y, things);
  if (kind != WeakKind::ImageLevel)
    std::erase_if(il, [&](Label k) { return std::binary_search(things.begin(), things.end(), k); });
  weak.image_level = std::move(il);
  return weak;
}

}  // namespace mulearn

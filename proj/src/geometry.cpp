#include "mulearn/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mulearn {

PixelRect shrink_box(const BoundingBox& box) {
  const int mx = static_cast<int>(std::floor(kBoxMarginFraction * box.width()));
  const int my = static_cast<int>(std::floor(kBoxMarginFraction * box.height()));
  return {box.left + mx, box.top + my, box.right - mx, box.bottom - my};
}

std::vector<int> nodes_in_rect(const PixelGrid& grid, const PixelRect& rect) {
  std::vector<int> out;
  for (int r = rect.top; r <= rect.bottom; ++r)
    for (int c = rect.left; c <= rect.right; ++c) out.push_back(grid.node_at(r, c));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> box_insiders(const PixelGrid& grid, const BoundingBox& box) {
  return nodes_in_rect(grid, shrink_box(box));
}

std::vector<char> label_region(const Instance& instance, const WeakAnnotation& weak, Label label) {
  std::vector<char> region(instance.nodes.size(), 0);
  for (const auto& box : weak.boxes) {
    if (box.label != label) continue;
    for (int i : box_insiders(*instance.grid, box)) region[i] = 1;
  }
  return region;
}

std::vector<char> outside_all_boxes(const Instance& instance, const WeakAnnotation& weak) {
  std::vector<char> outside(instance.nodes.size(), 1);
  for (const auto& box : weak.boxes)
    for (int i : box_insiders(*instance.grid, box)) outside[i] = 0;
  return outside;
}

bool box_is_tight(const PixelGrid& grid, const Labelling& y, const BoundingBox& box) {
  const PixelRect s = shrink_box(box);
  const Label k = box.label;
  auto has = [&](int r, int c) { return y[grid.node_at(r, c)] == k; };
  bool top = false, bottom = false, left = false, right = false;
  for (int c = s.left; c <= s.right; ++c) {
    top = top || has(s.top, c);
    bottom = bottom || has(s.bottom, c);
  }
  for (int r = s.top; r <= s.bottom; ++r) {
    left = left || has(r, s.left);
    right = right || has(r, s.right);
  }
  return top && bottom && left && right;
}

BoxCliques box_cliques(const PixelGrid& grid, const BoundingBox& box) {
  const auto insiders = box_insiders(grid, box);
  auto is_insider = [&](int node) { return std::binary_search(insiders.begin(), insiders.end(), node); };
  auto finish = [](std::vector<int>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  BoxCliques out;
  out.rows.resize(box.height());
  out.cols.resize(box.width());
  for (int r = box.top; r <= box.bottom; ++r) {
    for (int c = box.left; c <= box.right; ++c) {
      const int node = grid.node_at(r, c);
      if (!is_insider(node)) continue;
      out.rows[r - box.top].push_back(node);
      out.cols[c - box.left].push_back(node);
    }
  }
  for (auto& v : out.rows) finish(v);
  for (auto& v : out.cols) finish(v);
  return out;
}

}  // namespace mulearn

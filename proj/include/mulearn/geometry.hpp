#pragma once

#include <vector>

#include "mulearn/core.hpp"

namespace mulearn {

/// Fraction of each box dimension trimmed from both sides before deciding
/// which superpixels are inside the box.
inline constexpr double kBoxMarginFraction = 0.06;

struct PixelRect {
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;
};

/// Shrinks by floor(0.06 * width) columns and floor(0.06 * height) rows on
/// each side. The result is never empty.
PixelRect shrink_box(const BoundingBox& box);

/// Nodes owning at least one pixel inside `rect`, ascending.
std::vector<int> nodes_in_rect(const PixelGrid& grid, const PixelRect& rect);

/// Nodes whose pixels intersect the shrunk box.
std::vector<int> box_insiders(const PixelGrid& grid, const BoundingBox& box);

/// For every node, whether it is an insider of some box with the given label.
std::vector<char> label_region(const Instance& instance, const WeakAnnotation& weak, Label label);

/// Nodes that are insiders of no box at all.
std::vector<char> outside_all_boxes(const Instance& instance, const WeakAnnotation& weak);

/// The labelling's classification map touches all four sides of the shrunk
/// box with the box label.
bool box_is_tight(const PixelGrid& grid, const Labelling& labelling, const BoundingBox& box);

/// Row and column cliques of a box. Each clique holds the insiders of the box
/// owning a pixel of that full (unshrunk) row or column segment.
struct BoxCliques {
  std::vector<std::vector<int>> rows;  // index p - top
  std::vector<std::vector<int>> cols;  // index q - left
};

BoxCliques box_cliques(const PixelGrid& grid, const BoundingBox& box);

}  // namespace mulearn

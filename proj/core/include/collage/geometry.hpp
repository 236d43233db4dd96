#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "collage/image.hpp"

namespace collage {

struct Canvas {
  int width_px = 0;
  int height_px = 0;

  double aspect_ratio() const { return static_cast<double>(width_px) / height_px; }

  /// Builds a canvas whose sides realize aspect_w:aspect_h exactly, with the
  /// longer side equal to base_px. Throws InvalidInputError for non-positive
  /// ratios or a result smaller than 64 px on either side.
  static Canvas from_aspect(int aspect_w, int aspect_h, int base_px = 480);
};

/// One placed image. width_px/height_px are the displayed size on the canvas;
/// the rasterizer resamples the source image into that rectangle.
struct ImagePlacement {
  int image_id = 0;
  double center_x_px = 0.0;
  double center_y_px = 0.0;
  double angle_deg = 0.0;  // clamped to [-45, 45]
  int layer = 0;           // z-order, higher on top; permutation of 0..N-1
  double width_px = 0.0;
  double height_px = 0.0;
};

enum class Phase { Layout, Detail };

struct CollageState {
  Canvas canvas;
  std::vector<ImagePlacement> placements;
  std::vector<int> order;  // permutation of image indices, manipulated by switch
  int step_index = 0;
  Phase phase = Phase::Layout;
};

struct RasterBuffers {
  static constexpr std::int32_t kBlank = -1;

  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> occupancy;   // H*W, 1 where covered
  std::vector<std::int32_t> top_index;   // H*W, topmost image id or kBlank
  std::vector<std::uint8_t> pixels;      // H*W*3 RGB, background where blank

  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

struct RectI {
  int x = 0, y = 0, w = 0, h = 0;

  bool operator==(const RectI&) const = default;
  long long area() const { return static_cast<long long>(w) * h; }
};

struct BlankArea {
  long long pixels = 0;
  double fraction = 0.0;
};

/// Paints placements in ascending layer order; a pixel belongs to a placement
/// when the pixel center falls inside the rotated rectangle.
RasterBuffers rasterize(const CollageState& state, std::span<const Image> images);

BlankArea blank_area(const RasterBuffers& buffers);

/// Blank pixels restricted to a sub-rectangle of the buffers.
BlankArea blank_area(const RasterBuffers& buffers, const RectI& rect);

/// Tightest rectangle containing all occupied pixels.
/// Throws InvalidInputError when nothing is occupied.
RectI content_bbox(const RasterBuffers& buffers);

// Table-driven detail action options.
inline constexpr int kDxOptions[4] = {-15, -5, 0, +5};
inline constexpr int kDyOptions[4] = {-15, -5, 0, +5};
inline constexpr double kAngleOptions[3] = {-0.5, 0.0, +0.5};

enum class LayerOp { Top, Bottom, None };
inline constexpr LayerOp kLayerOptions[3] = {LayerOp::Top, LayerOp::Bottom, LayerOp::None};

struct DetailMove {
  int dx_px = 0;
  int dy_px = 0;
  LayerOp layer_op = LayerOp::None;
  double dtheta_deg = 0.0;
};

/// Applies a local detail adjustment to one image: relative displacement,
/// layer promotion/demotion (with permutation renormalization), accumulated
/// clamped rotation. The resulting center is clamped onto the canvas so at
/// least a quarter of the image area stays visible.
CollageState apply_detail_action(const CollageState& state, int image_id, const DetailMove& move);

/// Swaps order[i] and order[j] and regenerates placements from the
/// deterministic strip-packing initializer on the new order.
CollageState apply_switch(const CollageState& state, int i, int j, std::span<const Image> images);

/// Deterministic strip-packing layout: images in `order` are split into rows,
/// each row scaled to span the canvas width at a common height, rows stacked
/// with zero overlap. The row count minimizing leftover vertical blank wins.
std::vector<ImagePlacement> strip_pack_layout(const Canvas& canvas, std::span<const Image> images,
                                              std::span<const int> order);

}  // namespace collage

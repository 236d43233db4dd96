#include "collage/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "collage/errors.hpp"

namespace collage {

namespace {

constexpr std::uint8_t kBackground = 255;  // white canvas

const ImagePlacement* find_placement(const CollageState& state, int image_id) {
  for (const auto& p : state.placements) {
    if (p.image_id == image_id) return &p;
  }
  return nullptr;
}

}  // namespace

Canvas Canvas::from_aspect(int aspect_w, int aspect_h, int base_px) {
  if (aspect_w <= 0 || aspect_h <= 0) {
    throw InvalidInputError("aspect ratio components must be positive");
  }
  Canvas c;
  if (aspect_w >= aspect_h) {
    c.width_px = base_px;
    c.height_px = static_cast<int>(std::lround(static_cast<double>(base_px) * aspect_h / aspect_w));
  } else {
    c.height_px = base_px;
    c.width_px = static_cast<int>(std::lround(static_cast<double>(base_px) * aspect_w / aspect_h));
  }
  if (c.width_px < 64 || c.height_px < 64) {
    throw InvalidInputError("canvas smaller than 64 px; increase base resolution");
  }
  return c;
}

RasterBuffers rasterize(const CollageState& state, std::span<const Image> images) {
  const int W = state.canvas.width_px;
  const int H = state.canvas.height_px;
  RasterBuffers buf;
  buf.width = W;
  buf.height = H;
  buf.occupancy.assign(static_cast<std::size_t>(W) * H, 0);
  buf.top_index.assign(static_cast<std::size_t>(W) * H, RasterBuffers::kBlank);
  buf.pixels.assign(static_cast<std::size_t>(W) * H * 3, kBackground);

  std::vector<const ImagePlacement*> by_layer;
  by_layer.reserve(state.placements.size());
  for (const auto& p : state.placements) {
    if (p.image_id < 0 || p.image_id >= static_cast<int>(images.size())) {
      throw InvalidInputError("placement references image_id out of range");
    }
    by_layer.push_back(&p);
  }
  std::stable_sort(by_layer.begin(), by_layer.end(),
                   [](const ImagePlacement* a, const ImagePlacement* b) { return a->layer < b->layer; });

  for (const ImagePlacement* p : by_layer) {
    const Image& img = images[p->image_id];
    const double hw = p->width_px / 2.0;
    const double hh = p->height_px / 2.0;
    const double rad = p->angle_deg * M_PI / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    // Axis-aligned bounds of the rotated rectangle, clipped to the canvas.
    const double ext_x = std::abs(c) * hw + std::abs(s) * hh;
    const double ext_y = std::abs(s) * hw + std::abs(c) * hh;
    const int x0 = std::max(0, static_cast<int>(std::floor(p->center_x_px - ext_x)));
    const int x1 = std::min(W - 1, static_cast<int>(std::ceil(p->center_x_px + ext_x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(p->center_y_px - ext_y)));
    const int y1 = std::min(H - 1, static_cast<int>(std::ceil(p->center_y_px + ext_y)));

    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5 - p->center_x_px;
        const double py = y + 0.5 - p->center_y_px;
        // Pixel center in the image's local (unrotated) frame.
        const double u = c * px + s * py;
        const double v = -s * px + c * py;
        if (std::abs(u) > hw || std::abs(v) > hh) continue;
        int sx = static_cast<int>((u + hw) / p->width_px * img.width);
        int sy = static_cast<int>((v + hh) / p->height_px * img.height);
        sx = std::clamp(sx, 0, img.width - 1);
        sy = std::clamp(sy, 0, img.height - 1);
        const std::size_t i = buf.idx(x, y);
        buf.occupancy[i] = 1;
        buf.top_index[i] = p->image_id;
        const std::uint8_t* src = img.at(sx, sy);
        std::uint8_t* dst = buf.pixels.data() + i * 3;
        dst[0] = src[0];
        dst[1] = src[1];
        dst[2] = src[2];
      }
    }
  }
  return buf;
}

BlankArea blank_area(const RasterBuffers& buffers) {
  return blank_area(buffers, RectI{0, 0, buffers.width, buffers.height});
}

BlankArea blank_area(const RasterBuffers& buffers, const RectI& rect) {
  long long blank = 0;
  for (int y = rect.y; y < rect.y + rect.h; ++y) {
    for (int x = rect.x; x < rect.x + rect.w; ++x) {
      if (!buffers.occupancy[buffers.idx(x, y)]) ++blank;
    }
  }
  BlankArea out;
  out.pixels = blank;
  out.fraction = static_cast<double>(blank) / static_cast<double>(rect.area());
  return out;
}

RectI content_bbox(const RasterBuffers& buffers) {
  int min_x = std::numeric_limits<int>::max(), min_y = min_x;
  int max_x = -1, max_y = -1;
  for (int y = 0; y < buffers.height; ++y) {
    for (int x = 0; x < buffers.width; ++x) {
      if (!buffers.occupancy[buffers.idx(x, y)]) continue;
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x < 0) throw InvalidInputError("content_bbox: collage has no occupied pixels");
  return RectI{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
}

CollageState apply_detail_action(const CollageState& state, int image_id, const DetailMove& move) {
  if (state.phase != Phase::Detail) {
    throw PhaseError("detail action applied outside Detail phase");
  }
  if (find_placement(state, image_id) == nullptr) {
    throw InvalidInputError("detail action targets unknown image_id");
  }
  CollageState next = state;
  for (auto& p : next.placements) {
    if (p.image_id != image_id) continue;
    p.center_x_px += move.dx_px;
    p.center_y_px += move.dy_px;
    // Keep the center on canvas: guarantees >= 25% of the (unrotated) image
    // area overlaps the canvas.
    p.center_x_px = std::clamp(p.center_x_px, 0.0, static_cast<double>(state.canvas.width_px));
    p.center_y_px = std::clamp(p.center_y_px, 0.0, static_cast<double>(state.canvas.height_px));
    p.angle_deg = std::clamp(p.angle_deg + move.dtheta_deg, -45.0, 45.0);
  }

  if (move.layer_op != LayerOp::None) {
    const int n = static_cast<int>(next.placements.size());
    int old_layer = 0;
    for (const auto& p : next.placements) {
      if (p.image_id == image_id) old_layer = p.layer;
    }
    for (auto& p : next.placements) {
      if (p.image_id == image_id) {
        p.layer = (move.layer_op == LayerOp::Top) ? n - 1 : 0;
      } else if (move.layer_op == LayerOp::Top && p.layer > old_layer) {
        --p.layer;  // close the gap, relative order preserved
      } else if (move.layer_op == LayerOp::Bottom && p.layer < old_layer) {
        ++p.layer;
      }
    }
  }
  ++next.step_index;
  return next;
}

CollageState apply_switch(const CollageState& state, int i, int j, std::span<const Image> images) {
  if (state.phase != Phase::Layout) {
    throw PhaseError("switch action applied outside Layout phase");
  }
  const int n = static_cast<int>(state.order.size());
  if (i == j || i < 0 || j < 0 || i >= n || j >= n) {
    throw InvalidInputError("switch pair must be two distinct valid indices");
  }
  CollageState next = state;
  std::swap(next.order[i], next.order[j]);
  next.placements = strip_pack_layout(next.canvas, images, next.order);
  ++next.step_index;
  return next;
}

std::vector<ImagePlacement> strip_pack_layout(const Canvas& canvas, std::span<const Image> images,
                                              std::span<const int> order) {
  const int n = static_cast<int>(order.size());
  if (n < 2) throw InvalidInputError("strip_pack_layout needs at least 2 images");
  const double W = canvas.width_px;
  const double H = canvas.height_px;

  std::vector<double> aspect(n);
  for (int k = 0; k < n; ++k) {
    const Image& img = images[order[k]];
    if (img.width <= 0 || img.height <= 0) throw InvalidInputError("empty source image");
    aspect[k] = static_cast<double>(img.width) / img.height;
  }

  // Row split: r rows of near-equal image counts; each row spans the canvas
  // width at a common height. Pick the row count whose stacked height best
  // matches the canvas height.
  auto total_height = [&](int rows, std::vector<double>* row_heights) {
    const int base = n / rows, rem = n % rows;
    double total = 0.0;
    int k = 0;
    for (int r = 0; r < rows; ++r) {
      const int count = base + (r < rem ? 1 : 0);
      double aspect_sum = 0.0;
      for (int c = 0; c < count; ++c) aspect_sum += aspect[k + c];
      const double h = W / aspect_sum;
      if (row_heights) row_heights->push_back(h);
      total += h;
      k += count;
    }
    return total;
  };

  int best_rows = 1;
  double best_diff = std::numeric_limits<double>::infinity();
  for (int rows = 1; rows <= n; ++rows) {
    const double diff = std::abs(total_height(rows, nullptr) - H);
    if (diff < best_diff) {
      best_diff = diff;
      best_rows = rows;
    }
  }

  std::vector<double> row_heights;
  const double total = total_height(best_rows, &row_heights);
  const double shrink = total > H ? H / total : 1.0;
  const double y_start = (H - total * shrink) / 2.0;

  std::vector<ImagePlacement> placements;
  placements.reserve(n);
  const int base = n / best_rows, rem = n % best_rows;
  int k = 0;
  double y = y_start;
  for (int r = 0; r < best_rows; ++r) {
    const int count = base + (r < rem ? 1 : 0);
    const double h = row_heights[r] * shrink;
    double row_w = 0.0;
    for (int c = 0; c < count; ++c) row_w += aspect[k + c] * h;
    double x = (W - row_w) / 2.0;
    for (int c = 0; c < count; ++c) {
      const double w = aspect[k + c] * h;
      ImagePlacement p;
      p.image_id = order[k + c];
      p.width_px = w;
      p.height_px = h;
      p.center_x_px = x + w / 2.0;
      p.center_y_px = y + h / 2.0;
      p.angle_deg = 0.0;
      p.layer = k + c;
      placements.push_back(p);
      x += w;
    }
    y += h;
    k += count;
  }
  return placements;
}

}  // namespace collage

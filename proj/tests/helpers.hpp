#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "collage/geometry.hpp"
#include "collage/image.hpp"

namespace collage::testing {

inline Image flat_image(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto* px = img.at(x, y);
      px[0] = r;
      px[1] = g;
      px[2] = b;
    }
  }
  return img;
}

inline Image checker_image(int w, int h, int cell = 8) {
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t v = ((x / cell) + (y / cell)) % 2 ? 220 : 30;
      auto* px = img.at(x, y);
      px[0] = v;
      px[1] = v;
      px[2] = v;
    }
  }
  return img;
}

inline Image gradient_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int r0 = static_cast<int>(rng() % 200), g0 = static_cast<int>(rng() % 200),
            b0 = static_cast<int>(rng() % 200);
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto* px = img.at(x, y);
      px[0] = static_cast<std::uint8_t>((r0 + 255 * x / w) % 256);
      px[1] = static_cast<std::uint8_t>((g0 + 255 * y / h) % 256);
      px[2] = static_cast<std::uint8_t>((b0 + 110 * (x + y) / (w + h)) % 256);
    }
  }
  return img;
}

inline Image noise_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Image img(w, h);
  for (auto& v : img.rgb) v = static_cast<std::uint8_t>(rng() % 256);
  return img;
}

/// Mixed synthetic photo stand-ins: gradients, checkers, noise.
inline std::vector<Image> synthetic_set(int n, std::uint64_t seed, int base = 60) {
  std::mt19937_64 rng(seed);
  std::vector<Image> images;
  for (int i = 0; i < n; ++i) {
    const int w = base + static_cast<int>(rng() % 40);
    const int h = base + static_cast<int>(rng() % 40);
    switch (rng() % 3) {
      case 0: images.push_back(gradient_image(w, h, rng())); break;
      case 1: images.push_back(checker_image(w, h, 4 + static_cast<int>(rng() % 8))); break;
      default: images.push_back(noise_image(w, h, rng())); break;
    }
  }
  return images;
}

/// Independent point-in-rotated-rectangle coverage oracle.
inline bool oracle_covered(const CollageState& state, double px, double py) {
  for (const auto& p : state.placements) {
    const double rad = p.angle_deg * M_PI / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    const double dx = px - p.center_x_px, dy = py - p.center_y_px;
    const double u = c * dx + s * dy;
    const double v = -s * dx + c * dy;
    if (std::abs(u) <= p.width_px / 2.0 && std::abs(v) <= p.height_px / 2.0) return true;
  }
  return false;
}

inline long long oracle_blank_pixels(const CollageState& state) {
  long long blank = 0;
  for (int y = 0; y < state.canvas.height_px; ++y) {
    for (int x = 0; x < state.canvas.width_px; ++x) {
      if (!oracle_covered(state, x + 0.5, y + 0.5)) ++blank;
    }
  }
  return blank;
}

}  // namespace collage::testing

#include <benchmark/benchmark.h>

#include <random>

#include "collage/geometry.hpp"

namespace {

using namespace collage;

std::vector<Image> make_images(int n, int side) {
  std::mt19937_64 rng(1);
  std::vector<Image> images;
  for (int i = 0; i < n; ++i) {
    Image img(side, side);
    for (auto& v : img.rgb) v = static_cast<std::uint8_t>(rng() % 256);
    images.push_back(std::move(img));
  }
  return images;
}

CollageState make_state(int n, int canvas_px, bool rotated) {
  std::mt19937_64 rng(2);
  CollageState s;
  s.canvas = Canvas{canvas_px, canvas_px};
  s.phase = Phase::Detail;
  std::uniform_real_distribution<double> pos(0, canvas_px), ang(-45, 45);
  for (int i = 0; i < n; ++i) {
    ImagePlacement p;
    p.image_id = i;
    p.center_x_px = pos(rng);
    p.center_y_px = pos(rng);
    p.width_px = canvas_px * 0.4;
    p.height_px = canvas_px * 0.35;
    p.angle_deg = rotated ? ang(rng) : 0.0;
    p.layer = i;
    s.placements.push_back(p);
  }
  return s;
}

void BM_Rasterize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto images = make_images(n, 96);
  const auto s = make_state(n, 480, state.range(1) != 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rasterize(s, images));
  }
}
BENCHMARK(BM_Rasterize)->Args({4, 0})->Args({4, 1})->Args({8, 1})->Args({14, 1});

void BM_BlankArea(benchmark::State& state) {
  const auto images = make_images(8, 96);
  const auto buf = rasterize(make_state(8, 480, true), images);
  for (auto _ : state) {
    benchmark::DoNotOptimize(blank_area(buf));
  }
}
BENCHMARK(BM_BlankArea);

}  // namespace

BENCHMARK_MAIN();

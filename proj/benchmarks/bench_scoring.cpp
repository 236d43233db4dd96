#include <benchmark/benchmark.h>

#include <random>

#include "collage/scoring.hpp"

namespace {

using namespace collage;

RasterBuffers make_buffers(int side) {
  std::mt19937_64 rng(3);
  RasterBuffers buf;
  buf.width = side;
  buf.height = side;
  buf.occupancy.assign(static_cast<std::size_t>(side) * side, 0);
  buf.top_index.assign(static_cast<std::size_t>(side) * side, RasterBuffers::kBlank);
  buf.pixels.assign(static_cast<std::size_t>(side) * side * 3, 255);
  for (std::size_t i = 0; i < buf.occupancy.size(); ++i) {
    if (rng() % 5) {
      buf.occupancy[i] = 1;
      buf.top_index[i] = 0;
      for (int c = 0; c < 3; ++c) buf.pixels[i * 3 + c] = static_cast<std::uint8_t>(rng() % 256);
    }
  }
  return buf;
}

void BM_GenerateProposals(benchmark::State& state) {
  const auto buf = make_buffers(static_cast<int>(state.range(0)));
  ScorerConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_proposals(buf, cfg));
  }
}
BENCHMARK(BM_GenerateProposals)->Arg(240)->Arg(480);

void BM_ScoreProposals(benchmark::State& state) {
  const auto buf = make_buffers(static_cast<int>(state.range(0)));
  ScorerConfig cfg;
  HeuristicScorer scorer(cfg.feature_dim);
  auto proposals = generate_proposals(buf, cfg);
  for (auto _ : state) {
    auto copy = proposals;
    score_proposals(copy, buf, scorer);
    benchmark::DoNotOptimize(copy);
  }
}
BENCHMARK(BM_ScoreProposals)->Arg(240);

void BM_Fuse(benchmark::State& state) {
  const auto buf = make_buffers(240);
  ScorerConfig cfg;
  HeuristicScorer scorer(cfg.feature_dim);
  auto proposals = generate_proposals(buf, cfg);
  score_proposals(proposals, buf, scorer);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fuse(proposals, buf.width, buf.height, cfg));
  }
}
BENCHMARK(BM_Fuse);

}  // namespace

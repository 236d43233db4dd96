#include "collage/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "collage/errors.hpp"

namespace collage {

namespace {

double luminance(const std::uint8_t* rgb) {
  return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
}

std::map<std::string, std::shared_ptr<const PatchScorer> (*)(const ScorerConfig&)>& scorer_registry() {
  static std::map<std::string, std::shared_ptr<const PatchScorer> (*)(const ScorerConfig&)> registry;
  return registry;
}

}  // namespace

void ScorerConfig::validate() const {
  if (eta <= 0.0 || eta >= 1.0) throw ConfigError("scorer.eta must be in (0, 1)");
  if (scales.empty()) throw ConfigError("scorer.scales must not be empty");
  if (aspect_ratios.empty()) throw ConfigError("scorer.aspect_ratios must not be empty");
  if (stride_fraction <= 0.0) throw ConfigError("scorer.stride_fraction must be positive");
  if (feature_dim < 7) throw ConfigError("scorer.feature_dim must be at least 7");
  for (double s : scales) {
    if (s <= 0.0 || s > 1.0) throw ConfigError("scorer.scales entries must be in (0, 1]");
  }
  for (double r : aspect_ratios) {
    if (r <= 0.0) throw ConfigError("scorer.aspect_ratios entries must be positive");
  }
}

HeuristicScorer::HeuristicScorer(int feature_dim) : feature_dim_(feature_dim) {
  if (feature_dim < 7) throw ConfigError("HeuristicScorer needs feature_dim >= 7");
  grid_side_ = static_cast<int>(std::floor(std::sqrt(feature_dim / 2.0)));
  hist_bins_ = std::clamp((feature_dim - grid_side_ * grid_side_) / 3, 1, 64);
}

PatchScore HeuristicScorer::score(const PatchView& patch) const {
  const int w = patch.rect.w, h = patch.rect.h;
  if (w <= 0 || h <= 0) throw InvalidInputError("score: empty patch");
  const double n = static_cast<double>(w) * h;

  // Pass 1: luminance moments, channel histograms, blank coverage.
  double lum_sum = 0.0, lum_sq = 0.0;
  long long occupied = 0;
  constexpr int kEntropyBins = 8;
  int hist[3][kEntropyBins] = {};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t* px = patch.pixel(x, y);
      const double lum = luminance(px);
      lum_sum += lum;
      lum_sq += lum * lum;
      for (int c = 0; c < 3; ++c) ++hist[c][px[c] * kEntropyBins / 256];
      if (patch.occupied(x, y)) ++occupied;
    }
  }
  const double mean = lum_sum / n;
  const double var = std::max(0.0, lum_sq / n - mean * mean);
  const double contrast = std::min(1.0, std::sqrt(var) / 128.0);

  double entropy = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (int b = 0; b < kEntropyBins; ++b) {
      if (hist[c][b] == 0) continue;
      const double p = hist[c][b] / n;
      entropy -= p * std::log(p);
    }
  }
  entropy /= 3.0 * std::log(static_cast<double>(kEntropyBins));

  // Pass 2: edge density from forward luminance differences.
  long long edges = 0;
  constexpr double kEdgeThreshold = 24.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double lum = luminance(patch.pixel(x, y));
      double grad = 0.0;
      if (x + 1 < w) grad += std::abs(luminance(patch.pixel(x + 1, y)) - lum);
      if (y + 1 < h) grad += std::abs(luminance(patch.pixel(x, y + 1)) - lum);
      if (grad > kEdgeThreshold) ++edges;
    }
  }
  const double edge_density = edges / n;
  const double non_blank = occupied / n;

  PatchScore out;
  out.score = 10.0 * (contrast + entropy + edge_density + non_blank) / 4.0;

  // Feature: grid_side^2 downsampled luminance cells, then hist_bins per
  // channel of normalized color histogram, zero padding to feature_dim.
  out.feature = Eigen::VectorXd::Zero(feature_dim_);
  int k = 0;
  for (int gy = 0; gy < grid_side_; ++gy) {
    for (int gx = 0; gx < grid_side_; ++gx) {
      const int x0 = gx * w / grid_side_, x1 = std::max(x0 + 1, (gx + 1) * w / grid_side_);
      const int y0 = gy * h / grid_side_, y1 = std::max(y0 + 1, (gy + 1) * h / grid_side_);
      double cell = 0.0;
      for (int y = y0; y < std::min(y1, h); ++y) {
        for (int x = x0; x < std::min(x1, w); ++x) cell += luminance(patch.pixel(x, y));
      }
      const double cell_n = static_cast<double>(std::min(x1, w) - x0) * (std::min(y1, h) - y0);
      out.feature[k++] = cell_n > 0 ? cell / cell_n / 255.0 : 0.0;
    }
  }
  for (int c = 0; c < 3 && k + hist_bins_ <= feature_dim_; ++c) {
    int coarse[64] = {};
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) ++coarse[patch.pixel(x, y)[c] * hist_bins_ / 256];
    }
    for (int b = 0; b < hist_bins_; ++b) out.feature[k++] = coarse[b] / n;
  }
  return out;
}

std::shared_ptr<const PatchScorer> make_scorer(const ScorerConfig& cfg) {
  if (cfg.scorer == "heuristic") {
    return std::make_shared<HeuristicScorer>(cfg.feature_dim);
  }
  auto it = scorer_registry().find(cfg.scorer);
  if (it == scorer_registry().end()) {
    throw ConfigError("unknown scorer key: " + cfg.scorer);
  }
  return it->second(cfg);
}

void register_scorer(const std::string& key,
                     std::shared_ptr<const PatchScorer> (*factory)(const ScorerConfig&)) {
  scorer_registry()[key] = factory;
}

std::vector<PatchProposal> generate_proposals(const RasterBuffers& buffers, const ScorerConfig& cfg) {
  return generate_proposals(buffers, RectI{0, 0, buffers.width, buffers.height}, cfg);
}

std::vector<PatchProposal> generate_proposals(const RasterBuffers& buffers, const RectI& view,
                                              const ScorerConfig& cfg) {
  cfg.validate();
  const int VW = view.w, VH = view.h;
  if (VW <= 0 || VH <= 0) throw InvalidInputError("generate_proposals: empty view");
  const double area = static_cast<double>(VW) * VH;
  const int stride_x = std::max(1, static_cast<int>(std::lround(cfg.stride_fraction * VW)));
  const int stride_y = std::max(1, static_cast<int>(std::lround(cfg.stride_fraction * VH)));

  std::set<std::tuple<int, int, int, int>> seen;
  std::vector<PatchProposal> out;
  for (double scale : cfg.scales) {
    for (double ar : cfg.aspect_ratios) {
      // Window with area scale^2 * view area and width:height = ar, clamped
      // to the view (clamped duplicates collapse in `seen`).
      int w = static_cast<int>(std::lround(scale * std::sqrt(area * ar)));
      int h = static_cast<int>(std::lround(scale * std::sqrt(area / ar)));
      w = std::clamp(w, 1, VW);
      h = std::clamp(h, 1, VH);
      const int nx = (VW - w) / stride_x + 1;
      const int ny = (VH - h) / stride_y + 1;
      for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
          const int x = view.x + ix * stride_x;
          const int y = view.y + iy * stride_y;
          if (!seen.insert({x, y, w, h}).second) continue;
          PatchProposal p;
          p.rect = RectI{x, y, w, h};
          p.area_px = p.rect.area();
          p.center_x = x + w / 2.0;
          p.center_y = y + h / 2.0;
          out.push_back(std::move(p));
        }
      }
    }
  }
  if (out.empty()) throw ConfigError("proposal config produced zero windows");
  (void)buffers;
  return out;
}

void score_proposals(std::vector<PatchProposal>& proposals, const RasterBuffers& buffers,
                     const PatchScorer& scorer) {
  for (auto& p : proposals) {
    const PatchScore s = scorer.score(PatchView{&buffers, p.rect});
    p.score = s.score;
    p.feature = s.feature;
  }
}

namespace {

// Shared gate + attention pass; view origin only shifts the normalized centers.
struct FuseAccum {
  double view_x0, view_y0;
  double view_w, view_h;
  double eta;
  bool center_attention;

  bool passes(const PatchProposal& p) const {
    return static_cast<double>(p.area_px) / (view_w * view_h) > eta;
  }
  double alpha(const PatchProposal& p) const {
    const double frac = static_cast<double>(p.area_px) / (view_w * view_h);
    if (!center_attention) return frac;
    const double l = std::abs((p.center_x - view_x0) / view_w - 0.5) +
                     std::abs((p.center_y - view_y0) / view_h - 0.5);
    return frac * (1.0 - l);
  }
};

}  // namespace

CollageFeature fuse(const std::vector<PatchProposal>& proposals, int view_w, int view_h,
                    const ScorerConfig& cfg) {
  double x0 = 0.0, y0 = 0.0;
  if (!proposals.empty()) {
    // Proposals may live in an offset view; recover its origin from the grid.
    x0 = static_cast<double>(proposals.front().rect.x);
    y0 = static_cast<double>(proposals.front().rect.y);
    for (const auto& p : proposals) {
      x0 = std::min(x0, static_cast<double>(p.rect.x));
      y0 = std::min(y0, static_cast<double>(p.rect.y));
    }
  }
  const FuseAccum acc{x0, y0, static_cast<double>(view_w), static_cast<double>(view_h),
                      cfg.eta, cfg.center_attention};

  CollageFeature out;
  out.fused_feature = Eigen::VectorXd::Zero(cfg.feature_dim);
  out.attention_weights.reserve(proposals.size());
  double alpha_sum = 0.0;
  for (const auto& p : proposals) {
    const double a = acc.alpha(p);
    out.attention_weights.push_back(a);
    if (!acc.passes(p)) continue;
    if (p.feature.size() != cfg.feature_dim) {
      throw InvalidInputError("fuse: proposal feature dimension mismatch");
    }
    out.fused_feature += a * p.feature;
    alpha_sum += a;
    out.aesthetic_score += static_cast<double>(p.area_px) / (acc.view_w * acc.view_h) * p.score;
    if (p.score >= cfg.score_threshold) ++out.proposal_count;
  }
  if (alpha_sum > 0.0) out.fused_feature /= alpha_sum;
  return out;
}

double aesthetic_metric(const std::vector<PatchProposal>& proposals, int view_w, int view_h,
                        const ScorerConfig& cfg) {
  const double area = static_cast<double>(view_w) * view_h;
  double total = 0.0;
  for (const auto& p : proposals) {
    const double frac = static_cast<double>(p.area_px) / area;
    if (frac > cfg.eta) total += frac * p.score;
  }
  return total;
}

}  // namespace collage

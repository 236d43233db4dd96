#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "collage/geometry.hpp"

namespace collage {

struct PatchProposal {
  RectI rect;              // canvas (or view-local) pixels
  long long area_px = 0;   // rect.w * rect.h
  double center_x = 0.0;
  double center_y = 0.0;
  double score = 0.0;      // in [0, 10]
  Eigen::VectorXd feature; // dimension D
};

struct CollageFeature {
  Eigen::VectorXd fused_feature;          // alpha-weighted mean over gated proposals
  std::vector<double> attention_weights;  // per proposal, >= 0
  int proposal_count = 0;                 // gate passed AND score >= tau
  double aesthetic_score = 0.0;           // gated area-weighted score sum
  double blank_fraction = 0.0;
};

struct ScorerConfig {
  double eta = 0.60;  // area-fraction gate threshold
  std::vector<double> scales = {0.4, 0.6, 0.8, 1.0};
  std::vector<double> aspect_ratios = {1.0, 4.0 / 3.0, 3.0 / 4.0, 16.0 / 9.0};
  double stride_fraction = 0.125;
  double score_threshold = 5.0;  // tau, half the score range
  int feature_dim = 32;
  bool center_attention = true;  // off reduces alpha_i to the bare area fraction
  std::string scorer = "heuristic";

  void validate() const;  // throws ConfigError
};

/// A rectangular window into rasterized collage buffers.
struct PatchView {
  const RasterBuffers* buffers = nullptr;
  RectI rect;

  const std::uint8_t* pixel(int lx, int ly) const {
    return buffers->pixels.data() + buffers->idx(rect.x + lx, rect.y + ly) * 3;
  }
  bool occupied(int lx, int ly) const {
    return buffers->occupancy[buffers->idx(rect.x + lx, rect.y + ly)] != 0;
  }
};

struct PatchScore {
  double score = 0.0;
  Eigen::VectorXd feature;
};

/// Pluggable per-patch scorer. Implementations must be pure: identical pixel
/// content yields identical (score, feature), safe to share across workers.
class PatchScorer {
 public:
  virtual ~PatchScorer() = default;
  virtual PatchScore score(const PatchView& patch) const = 0;
  virtual int feature_dim() const = 0;
};

/// Default content heuristic: equal-weight mix of luminance contrast,
/// color-channel entropy, edge density and non-blank coverage, mapped to
/// [0, 10]. Feature: downsampled luminance grid plus per-channel color
/// histograms, all entries in [0, 1].
class HeuristicScorer final : public PatchScorer {
 public:
  explicit HeuristicScorer(int feature_dim = 32);
  PatchScore score(const PatchView& patch) const override;
  int feature_dim() const override { return feature_dim_; }

 private:
  int feature_dim_;
  int grid_side_;
  int hist_bins_;  // per channel
};

/// Builds a scorer from ScorerConfig::scorer. Only "heuristic" is built in;
/// other keys must be registered first. Throws ConfigError on unknown keys.
std::shared_ptr<const PatchScorer> make_scorer(const ScorerConfig& cfg);
void register_scorer(const std::string& key,
                     std::shared_ptr<const PatchScorer> (*factory)(const ScorerConfig&));

/// Dense sliding-window proposal grid over a view of the buffers, every
/// (scale, aspect ratio) pair, duplicates removed, deterministic order.
std::vector<PatchProposal> generate_proposals(const RasterBuffers& buffers, const RectI& view,
                                              const ScorerConfig& cfg);
std::vector<PatchProposal> generate_proposals(const RasterBuffers& buffers, const ScorerConfig& cfg);

/// Scores every proposal in place with the given scorer.
void score_proposals(std::vector<PatchProposal>& proposals, const RasterBuffers& buffers,
                     const PatchScorer& scorer);

/// Gate + attention fusion over scored proposals. view_w/view_h give the
/// reference area for the fraction gate and the normalized patch centers.
CollageFeature fuse(const std::vector<PatchProposal>& proposals, int view_w, int view_h,
                    const ScorerConfig& cfg);

/// Gated area-weighted score sum over passing proposals (the evaluation
/// metric; area enters as a fraction of the view area).
double aesthetic_metric(const std::vector<PatchProposal>& proposals, int view_w, int view_h,
                        const ScorerConfig& cfg);

}  // namespace collage

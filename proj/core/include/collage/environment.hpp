#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "collage/geometry.hpp"
#include "collage/scoring.hpp"

namespace collage {

struct SwitchAction {
  int i = 0, j = 0;  // order indices, i != j
};
struct TerminateAction {};
struct DetailAction {
  int image_id = 0;
  int dx_idx = 0;     // into kDxOptions
  int dy_idx = 0;     // into kDyOptions
  int layer_idx = 2;  // into kLayerOptions (2 = none)
  int angle_idx = 1;  // into kAngleOptions (1 = 0 deg)
};
using Action = std::variant<SwitchAction, TerminateAction, DetailAction>;

/// Layout head size: all unordered pairs plus terminate.
int layout_action_count(int n_images);
/// Lexicographic pair <-> flat index; index n*(n-1)/2 is terminate.
int pair_to_index(int i, int j, int n_images);
std::pair<int, int> index_to_pair(int index, int n_images);

using Observation = Eigen::VectorXd;  // [current fused feature ; initial fused feature]

struct StepInfo {
  double score = 0.0;        // lambda_a * s_a - lambda_b * s_b
  int proposal_count = 0;    // s_a
  double blank_fraction = 0.0;
  double aesthetic_metric = 0.0;
  Phase phase = Phase::Layout;
  int step_index = 0;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct CropGrid {
  std::vector<double> scales = {0.8, 0.9, 1.0};
  int offsets_per_axis = 5;
};

struct EnvConfig {
  int max_step = 12;
  int layout_budget = 6;
  double lambda_a = 1.0;
  double lambda_b = 0.01;
  double step_penalty = 0.01;
  int target_aspect_w = 1;
  int target_aspect_h = 1;
  int canvas_base_px = 480;
  bool autocrop = true;
  CropGrid crop_grid;

  void validate() const;  // throws ConfigError
};

struct EvalResult {
  double aesthetic_score = 0.0;  // evaluation metric (gated area-weighted sum)
  int proposal_count = 0;
  double blank_fraction = 0.0;
  CollageFeature feature;
};

/// rasterize -> proposals -> score -> fuse/metric on the full canvas. Pure.
EvalResult evaluate_collage(const CollageState& state, std::span<const Image> images,
                            const ScorerConfig& scorer_cfg, const PatchScorer& scorer);

/// Collage score of Eq-form lambda_a * s_a - lambda_b * s_b, with s_b the blank
/// fraction in percentage points.
double collage_score(int proposal_count, double blank_fraction, const EnvConfig& cfg);

/// Selects the best-scoring aspect-ratio-conforming view from the candidate
/// grid and rescales it back to canvas resolution. Ties break toward larger
/// area, then smaller y, then smaller x. The full canvas is always a candidate.
std::pair<CollageState, double> autocrop(const CollageState& state, std::span<const Image> images,
                                         const EnvConfig& cfg, const ScorerConfig& scorer_cfg,
                                         const PatchScorer& scorer);

/// Salience-proxy greedy layout: images ranked by the scorer on their own
/// content; best image nearest the canvas center, the rest placed greedily to
/// maximize fresh coverage under a 30% pairwise overlap cap.
CollageState quick_init_baseline(std::span<const Image> images, const EnvConfig& cfg,
                                 const ScorerConfig& scorer_cfg, const PatchScorer& scorer,
                                 std::uint64_t seed);

/// Sequential decision environment over one image set. Single-threaded;
/// independent instances may run concurrently with a shared read-only scorer.
class CollageEnv {
 public:
  CollageEnv(std::vector<Image> images, EnvConfig cfg, ScorerConfig scorer_cfg,
             std::shared_ptr<const PatchScorer> scorer, std::uint64_t seed);

  Observation reset();
  StepResult step(const Action& action);

  bool done() const { return done_; }
  const CollageState& state() const { return state_; }
  const std::vector<Image>& images() const { return images_; }
  const EnvConfig& config() const { return cfg_; }
  int n_images() const { return static_cast<int>(images_.size()); }
  int observation_dim() const { return 2 * scorer_cfg_.feature_dim; }
  double last_score() const { return prev_score_; }
  const StepInfo& last_info() const { return last_info_; }

 private:
  StepInfo evaluate_current(Eigen::VectorXd* fused) const;

  std::vector<Image> images_;
  EnvConfig cfg_;
  ScorerConfig scorer_cfg_;
  std::shared_ptr<const PatchScorer> scorer_;
  std::uint64_t seed_;

  CollageState state_;
  Eigen::VectorXd initial_feature_;
  double prev_score_ = 0.0;
  StepInfo last_info_;
  bool terminated_ = false;
  bool done_ = true;  // step before reset is an error
};

}  // namespace collage

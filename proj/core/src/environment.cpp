#include "collage/environment.hpp"

#include <algorithm>
#include <cmath>

#include "collage/errors.hpp"

namespace collage {

int layout_action_count(int n_images) { return n_images * (n_images - 1) / 2 + 1; }

int pair_to_index(int i, int j, int n_images) {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= n_images || i == j) throw InvalidInputError("pair_to_index: bad pair");
  // Lexicographic over (i, j) with i < j.
  return i * n_images - i * (i + 1) / 2 + (j - i - 1);
}

std::pair<int, int> index_to_pair(int index, int n_images) {
  for (int i = 0; i < n_images - 1; ++i) {
    const int row = n_images - 1 - i;
    if (index < row) return {i, i + 1 + index};
    index -= row;
  }
  throw InvalidInputError("index_to_pair: index out of range");
}

void EnvConfig::validate() const {
  if (max_step < 1) throw ConfigError("env.max_step must be >= 1");
  if (layout_budget <= 0 || layout_budget >= max_step) {
    throw ConfigError("env.layout_budget must satisfy 0 < layout_budget < max_step");
  }
  if (lambda_a < 0 || lambda_b < 0) throw ConfigError("env lambdas must be >= 0");
  if (target_aspect_w <= 0 || target_aspect_h <= 0) {
    throw ConfigError("env.target_aspect must be two positive integers");
  }
  if (crop_grid.scales.empty() || crop_grid.offsets_per_axis < 1) {
    throw ConfigError("env.crop_grid must have scales and >= 1 offset per axis");
  }
}

double collage_score(int proposal_count, double blank_fraction, const EnvConfig& cfg) {
  // s_b carries percentage points so lambda_b = 0.01 weights blank at <= 1.
  return cfg.lambda_a * proposal_count - cfg.lambda_b * blank_fraction * 100.0;
}

EvalResult evaluate_collage(const CollageState& state, std::span<const Image> images,
                            const ScorerConfig& scorer_cfg, const PatchScorer& scorer) {
  const RasterBuffers buffers = rasterize(state, images);
  std::vector<PatchProposal> proposals = generate_proposals(buffers, scorer_cfg);
  score_proposals(proposals, buffers, scorer);
  EvalResult out;
  out.feature = fuse(proposals, buffers.width, buffers.height, scorer_cfg);
  out.aesthetic_score = out.feature.aesthetic_score;
  out.proposal_count = out.feature.proposal_count;
  out.blank_fraction = blank_area(buffers).fraction;
  out.feature.blank_fraction = out.blank_fraction;
  return out;
}

namespace {

struct ViewScore {
  int proposal_count = 0;
  double blank_fraction = 0.0;
};

ViewScore score_view(const RasterBuffers& buffers, const RectI& view,
                     const ScorerConfig& scorer_cfg, const PatchScorer& scorer) {
  std::vector<PatchProposal> proposals = generate_proposals(buffers, view, scorer_cfg);
  score_proposals(proposals, buffers, scorer);
  ViewScore out;
  const double area = static_cast<double>(view.w) * view.h;
  for (const auto& p : proposals) {
    if (p.area_px / area > scorer_cfg.eta && p.score >= scorer_cfg.score_threshold) {
      ++out.proposal_count;
    }
  }
  out.blank_fraction = blank_area(buffers, view).fraction;
  return out;
}

}  // namespace

std::pair<CollageState, double> autocrop(const CollageState& state, std::span<const Image> images,
                                         const EnvConfig& cfg, const ScorerConfig& scorer_cfg,
                                         const PatchScorer& scorer) {
  const RasterBuffers buffers = rasterize(state, images);
  const int W = state.canvas.width_px, H = state.canvas.height_px;

  std::vector<RectI> candidates;
  candidates.push_back(RectI{0, 0, W, H});
  for (double s : cfg.crop_grid.scales) {
    const int w = std::max(1, static_cast<int>(std::lround(W * s)));
    const int h = std::max(1, static_cast<int>(std::lround(H * s)));
    if (w == W && h == H) continue;  // full canvas already listed
    const int k = cfg.crop_grid.offsets_per_axis;
    for (int iy = 0; iy < k; ++iy) {
      for (int ix = 0; ix < k; ++ix) {
        const int x = k > 1 ? ix * (W - w) / (k - 1) : (W - w) / 2;
        const int y = k > 1 ? iy * (H - h) / (k - 1) : (H - h) / 2;
        candidates.push_back(RectI{x, y, w, h});
      }
    }
  }

  std::optional<RectI> best;
  double best_score = 0.0;
  for (const RectI& cand : candidates) {
    const ViewScore vs = score_view(buffers, cand, scorer_cfg, scorer);
    const double score = collage_score(vs.proposal_count, vs.blank_fraction, cfg);
    bool better = false;
    if (!best) {
      better = true;
    } else if (score != best_score) {
      better = score > best_score;
    } else if (cand.area() != best->area()) {
      better = cand.area() > best->area();
    } else if (cand.y != best->y) {
      better = cand.y < best->y;
    } else {
      better = cand.x < best->x;
    }
    if (better) {
      best = cand;
      best_score = score;
    }
  }

  if (*best == RectI{0, 0, W, H}) return {state, best_score};

  // Rescale the chosen view back to canvas resolution.
  const double fx = static_cast<double>(W) / best->w;
  const double fy = static_cast<double>(H) / best->h;
  CollageState next = state;
  for (auto& p : next.placements) {
    p.center_x_px = (p.center_x_px - best->x) * fx;
    p.center_y_px = (p.center_y_px - best->y) * fy;
    p.width_px *= fx;
    p.height_px *= fy;
  }
  return {next, best_score};
}

CollageEnv::CollageEnv(std::vector<Image> images, EnvConfig cfg, ScorerConfig scorer_cfg,
                       std::shared_ptr<const PatchScorer> scorer, std::uint64_t seed)
    : images_(std::move(images)),
      cfg_(cfg),
      scorer_cfg_(std::move(scorer_cfg)),
      scorer_(std::move(scorer)),
      seed_(seed) {
  cfg_.validate();
  scorer_cfg_.validate();
  if (images_.size() < 2 || images_.size() > 15) {
    throw InvalidInputError("environment needs between 2 and 15 images");
  }
}

StepInfo CollageEnv::evaluate_current(Eigen::VectorXd* fused) const {
  const EvalResult ev = evaluate_collage(state_, images_, scorer_cfg_, *scorer_);
  StepInfo info;
  info.proposal_count = ev.proposal_count;
  info.blank_fraction = ev.blank_fraction;
  info.aesthetic_metric = ev.aesthetic_score;
  info.score = collage_score(ev.proposal_count, ev.blank_fraction, cfg_);
  info.phase = state_.phase;
  info.step_index = state_.step_index;
  if (fused) *fused = ev.feature.fused_feature;
  return info;
}

Observation CollageEnv::reset() {
  state_.canvas = Canvas::from_aspect(cfg_.target_aspect_w, cfg_.target_aspect_h, cfg_.canvas_base_px);
  state_.order.resize(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) state_.order[i] = static_cast<int>(i);
  state_.placements = strip_pack_layout(state_.canvas, images_, state_.order);
  state_.step_index = 0;
  state_.phase = Phase::Layout;
  terminated_ = false;
  done_ = false;

  last_info_ = evaluate_current(&initial_feature_);
  prev_score_ = last_info_.score;
  Observation obs(2 * initial_feature_.size());
  obs << initial_feature_, initial_feature_;
  return obs;
}

StepResult CollageEnv::step(const Action& action) {
  if (done_) throw InvalidInputError("step on finished episode; call reset");
  const int t = state_.step_index;

  if (std::holds_alternative<SwitchAction>(action)) {
    const auto& sw = std::get<SwitchAction>(action);
    state_ = apply_switch(state_, sw.i, sw.j, images_);
  } else if (std::holds_alternative<TerminateAction>(action)) {
    if (state_.phase != Phase::Layout) throw PhaseError("terminate outside Layout phase");
    ++state_.step_index;
    terminated_ = true;
  } else {
    const auto& d = std::get<DetailAction>(action);
    DetailMove move;
    move.dx_px = kDxOptions[d.dx_idx];
    move.dy_px = kDyOptions[d.dy_idx];
    move.layer_op = kLayerOptions[d.layer_idx];
    move.dtheta_deg = kAngleOptions[d.angle_idx];
    state_ = apply_detail_action(state_, d.image_id, move);
  }

  if (cfg_.autocrop) {
    state_ = autocrop(state_, images_, cfg_, scorer_cfg_, *scorer_).first;
  }
  if (state_.phase == Phase::Layout && (terminated_ || state_.step_index >= cfg_.layout_budget)) {
    state_.phase = Phase::Detail;
  }
  done_ = state_.step_index >= cfg_.max_step;

  Eigen::VectorXd fused;
  last_info_ = evaluate_current(&fused);
  const double delta = last_info_.score - prev_score_;
  prev_score_ = last_info_.score;

  StepResult result;
  result.observation.resize(2 * fused.size());
  result.observation << fused, initial_feature_;
  result.reward = delta - cfg_.step_penalty * (t + 1);
  result.done = done_;
  result.info = last_info_;
  return result;
}

CollageState quick_init_baseline(std::span<const Image> images, const EnvConfig& cfg,
                                 const ScorerConfig& scorer_cfg, const PatchScorer& scorer,
                                 std::uint64_t seed) {
  (void)seed;  // layout is fully deterministic; seed is recorded by callers
  cfg.validate();
  const int n = static_cast<int>(images.size());
  if (n < 2) throw InvalidInputError("quick_init_baseline needs at least 2 images");

  CollageState state;
  state.canvas = Canvas::from_aspect(cfg.target_aspect_w, cfg.target_aspect_h, cfg.canvas_base_px);
  const double W = state.canvas.width_px, H = state.canvas.height_px;

  // Salience proxy: score each image's own content.
  std::vector<std::pair<double, int>> ranked(n);
  for (int i = 0; i < n; ++i) {
    const Image& img = images[i];
    RasterBuffers buf;
    buf.width = img.width;
    buf.height = img.height;
    buf.occupancy.assign(static_cast<std::size_t>(img.width) * img.height, 1);
    buf.top_index.assign(buf.occupancy.size(), 0);
    buf.pixels = img.rgb;
    const double s = scorer.score(PatchView{&buf, RectI{0, 0, img.width, img.height}}).score;
    ranked[i] = {-s, i};  // descending score, ascending index on ties
  }
  std::sort(ranked.begin(), ranked.end());

  // Display size: a little over an equal share of the canvas, aspect kept.
  const double target_area = 1.3 * W * H / n;
  std::vector<std::pair<double, double>> sizes(n);
  for (int i = 0; i < n; ++i) {
    const double ar = static_cast<double>(images[i].width) / images[i].height;
    double w = std::sqrt(target_area * ar), h = std::sqrt(target_area / ar);
    const double fit = std::min({1.0, W / w, H / h});
    sizes[i] = {w * fit, h * fit};
  }

  // Coarse occupancy grid for incremental coverage accounting.
  constexpr int kCell = 4;
  const int gw = (state.canvas.width_px + kCell - 1) / kCell;
  const int gh = (state.canvas.height_px + kCell - 1) / kCell;
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(gw) * gh, 0);

  auto clip_rect = [&](double cx, double cy, double w, double h) {
    const double x0 = std::max(0.0, cx - w / 2), x1 = std::min(W, cx + w / 2);
    const double y0 = std::max(0.0, cy - h / 2), y1 = std::min(H, cy + h / 2);
    return std::array<double, 4>{x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
  };
  auto paint = [&](double cx, double cy, double w, double h) {
    const auto r = clip_rect(cx, cy, w, h);
    for (int gy = static_cast<int>(r[1] / kCell); gy < (r[1] + r[3]) / kCell && gy < gh; ++gy) {
      for (int gx = static_cast<int>(r[0] / kCell); gx < (r[0] + r[2]) / kCell && gx < gw; ++gx) {
        covered[static_cast<std::size_t>(gy) * gw + gx] = 1;
      }
    }
  };
  auto fresh_cells = [&](double cx, double cy, double w, double h) {
    const auto r = clip_rect(cx, cy, w, h);
    long long fresh = 0;
    for (int gy = static_cast<int>(r[1] / kCell); gy < (r[1] + r[3]) / kCell && gy < gh; ++gy) {
      for (int gx = static_cast<int>(r[0] / kCell); gx < (r[0] + r[2]) / kCell && gx < gw; ++gx) {
        if (!covered[static_cast<std::size_t>(gy) * gw + gx]) ++fresh;
      }
    }
    return fresh;
  };
  auto overlap_area = [](double cx1, double cy1, double w1, double h1, double cx2, double cy2,
                         double w2, double h2) {
    const double ox = std::max(0.0, std::min(cx1 + w1 / 2, cx2 + w2 / 2) - std::max(cx1 - w1 / 2, cx2 - w2 / 2));
    const double oy = std::max(0.0, std::min(cy1 + h1 / 2, cy2 + h2 / 2) - std::max(cy1 - h1 / 2, cy2 - h2 / 2));
    return ox * oy;
  };

  constexpr int kGrid = 9;
  std::vector<ImagePlacement> placed;
  for (int seq = 0; seq < n; ++seq) {
    const int id = ranked[seq].second;
    const auto [w, h] = sizes[id];
    ImagePlacement p;
    p.image_id = id;
    p.width_px = w;
    p.height_px = h;
    p.layer = n - 1 - seq;  // salient images stay on top

    if (seq == 0) {
      p.center_x_px = W / 2;
      p.center_y_px = H / 2;
    } else {
      double best_key[3] = {-1, 0, 0};  // fresh cells desc, center dist asc, (y, x) asc
      bool found = false;
      double relax_cx = W / 2, relax_cy = H / 2, relax_overlap = 1e18;
      for (int gy = 0; gy < kGrid; ++gy) {
        for (int gx = 0; gx < kGrid; ++gx) {
          const double cx = W * (gx + 0.5) / kGrid;
          const double cy = H * (gy + 0.5) / kGrid;
          double worst = 0.0;
          for (const auto& q : placed) {
            const double ov = overlap_area(cx, cy, w, h, q.center_x_px, q.center_y_px, q.width_px, q.height_px);
            worst = std::max(worst, ov / std::min(w * h, q.width_px * q.height_px));
          }
          if (worst < relax_overlap) {
            relax_overlap = worst;
            relax_cx = cx;
            relax_cy = cy;
          }
          if (worst > 0.30) continue;  // pairwise overlap cap
          const double fresh = static_cast<double>(fresh_cells(cx, cy, w, h));
          const double dist = std::abs(cx - W / 2) + std::abs(cy - H / 2);
          const double key[3] = {fresh, -dist, -(cy * W + cx)};
          if (!found || key[0] > best_key[0] ||
              (key[0] == best_key[0] && (key[1] > best_key[1] ||
                                         (key[1] == best_key[1] && key[2] > best_key[2])))) {
            best_key[0] = key[0];
            best_key[1] = key[1];
            best_key[2] = key[2];
            p.center_x_px = cx;
            p.center_y_px = cy;
            found = true;
          }
        }
      }
      if (!found) {  // every slot breaks the cap; take the least-overlapping one
        p.center_x_px = relax_cx;
        p.center_y_px = relax_cy;
      }
    }
    paint(p.center_x_px, p.center_y_px, w, h);
    placed.push_back(p);
  }

  state.placements = std::move(placed);
  state.order.resize(n);
  for (int i = 0; i < n; ++i) state.order[i] = ranked[i].second;
  state.phase = Phase::Detail;
  state.step_index = 0;
  return state;
}

}  // namespace collage

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "collage/agent.hpp"
#include "collage/environment.hpp"

namespace collage {

struct TrainConfig {
  int max_epoch = 50;
  int episodes_per_epoch = 64;
  int batch_size = 32;
  double gamma = 0.99;
  double entropy_weight = 0.01;
  double lr = 1e-3;
  double weight_decay = 1e-5;
  int sign_reward_epochs = 20;
  std::uint64_t seed = 0;
  int eval_every = 10;
  int hidden = 128;
  int lstm_layers = 4;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double mean_return = 0.0;
  double mean_final_score = 0.0;     // evaluation metric of final states
  double mean_proposal_count = 0.0;
  double mean_blank_fraction = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double wall_time_s = 0.0;
  std::int64_t timestamp_ms = 0;
};

struct RunLog {
  std::vector<EpochStats> rows;

  void append(EpochStats row);  // enforces monotone timestamps
  void write_csv(const std::filesystem::path& path) const;
  void write_json(const std::filesystem::path& path) const;
};

struct ImageSet {
  std::string name;
  std::vector<Image> images;
};

struct Episode {
  std::vector<Transition> transitions;
  StepInfo final_info;
  double total_reward = 0.0;
};

/// Runs n_episodes full episodes with the stochastic policy, cycling through
/// the image sets. Deterministic given (params, seed); episodes that fail in
/// the environment are logged and skipped. COLLAGE_RL_THREADS caps fan-out.
std::vector<Episode> collect_rollouts(const AgentParams& params,
                                      const std::vector<ImageSet>& image_sets,
                                      const EnvConfig& env_cfg, const ScorerConfig& scorer_cfg,
                                      std::shared_ptr<const PatchScorer> scorer, int n_episodes,
                                      std::uint64_t seed);

/// Greedy (argmax) episode; returns the final state and its per-step trace.
struct GreedyRollout {
  CollageState final_state;
  StepInfo final_info;
  std::vector<Transition> transitions;
  std::vector<StepInfo> infos;
};
GreedyRollout run_greedy_episode(const AgentParams& params, const std::vector<Image>& images,
                                 const EnvConfig& env_cfg, const ScorerConfig& scorer_cfg,
                                 std::shared_ptr<const PatchScorer> scorer, std::uint64_t seed);

struct TrainResult {
  AgentParams params;
  RunLog log;
};

/// Epoch loop with the sign-reward warmup: epochs up to sign_reward_epochs
/// train on sign(r_t), later epochs on raw rewards. Non-finite losses abort
/// the epoch and restore the pre-epoch parameters. Checkpoints land in
/// out_dir (when given) every eval_every epochs and at the end.
TrainResult train(const TrainConfig& cfg, const EnvConfig& env_cfg, const ScorerConfig& scorer_cfg,
                  const std::vector<ImageSet>& datasets,
                  const std::optional<std::filesystem::path>& out_dir);

struct EvalRow {
  std::string bucket;  // "6", "8", "<15"
  int n_sets = 0;
  double mean_proposal_count = 0.0;
  double mean_aesthetic_score = 0.0;
};

struct EvalTable {
  std::string method;
  std::vector<EvalRow> rows;  // fixed bucket order: 6, 8, <15
  double overall_proposal_count = 0.0;
  double overall_aesthetic_score = 0.0;
};

/// methods: baseline | agent | agent_no_attention | agent_no_autocrop.
/// Baseline scores the quick-initialization layout directly; agent variants
/// decode greedily. Throws ConfigError on unknown method names.
EvalTable evaluate(const AgentParams* params, const std::vector<ImageSet>& image_sets,
                   const EnvConfig& env_cfg, const ScorerConfig& scorer_cfg,
                   std::shared_ptr<const PatchScorer> scorer, const std::string& method,
                   std::uint64_t seed = 0);

void write_eval_csv(const std::filesystem::path& path, const std::vector<EvalTable>& tables);

}  // namespace collage

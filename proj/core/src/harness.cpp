#include "collage/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "collage/errors.hpp"

namespace collage {

namespace {

int worker_threads() {
  if (const char* env = std::getenv("COLLAGE_RL_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

void TrainConfig::validate() const {
  if (max_epoch < 0) throw ConfigError("train.max_epoch must be >= 0");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (episodes_per_epoch < 1) throw ConfigError("train.episodes_per_epoch must be >= 1");
  if (sign_reward_epochs > max_epoch) {
    throw ConfigError("train.sign_reward_epochs must be <= train.max_epoch");
  }
  if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("train.gamma must be in [0, 1)");
  if (eval_every < 1) throw ConfigError("train.eval_every must be >= 1");
}

void RunLog::append(EpochStats row) {
  if (!rows.empty() && row.timestamp_ms < rows.back().timestamp_ms) {
    row.timestamp_ms = rows.back().timestamp_ms;
  }
  rows.push_back(std::move(row));
}

void RunLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write run log: " + path.string());
  out << "epoch,mean_return,mean_final_score,mean_proposal_count,mean_blank_fraction,"
         "policy_loss,value_loss,entropy,wall_time_s,timestamp_ms\n";
  for (const auto& r : rows) {
    out << r.epoch << ',' << r.mean_return << ',' << r.mean_final_score << ','
        << r.mean_proposal_count << ',' << r.mean_blank_fraction << ',' << r.policy_loss << ','
        << r.value_loss << ',' << r.entropy << ',' << r.wall_time_s << ',' << r.timestamp_ms
        << '\n';
  }
}

void RunLog::write_json(const std::filesystem::path& path) const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    j.push_back({{"epoch", r.epoch},
                 {"mean_return", r.mean_return},
                 {"mean_final_score", r.mean_final_score},
                 {"mean_proposal_count", r.mean_proposal_count},
                 {"mean_blank_fraction", r.mean_blank_fraction},
                 {"policy_loss", r.policy_loss},
                 {"value_loss", r.value_loss},
                 {"entropy", r.entropy},
                 {"wall_time_s", r.wall_time_s},
                 {"timestamp_ms", r.timestamp_ms}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write run log: " + path.string());
  out << j.dump(2);
}

namespace {

Episode run_one_episode(const AgentParams& params, const ImageSet& set, const EnvConfig& env_cfg,
                        const ScorerConfig& scorer_cfg, std::shared_ptr<const PatchScorer> scorer,
                        std::uint64_t seed) {
  CollageEnv env(set.images, env_cfg, scorer_cfg, scorer, seed);
  std::mt19937_64 rng(seed);
  Observation obs = env.reset();
  RecurrentState rec = RecurrentState::zeros(params.cfg);
  const int n_active = env.n_images();

  Episode episode;
  while (!env.done()) {
    const Phase phase = env.state().phase;
    const LegalMask mask = LegalMask::for_phase(phase, params.cfg, n_active);
    PolicyOutput out = policy_forward(params, obs, rec, phase, mask);
    auto [action, log_prob] = sample_action(out.dist, rng);
    const StepResult sr = env.step(action);

    Transition tr;
    tr.observation = obs;
    tr.action = action;
    tr.log_prob = log_prob;
    tr.value = out.value;
    tr.reward = sr.reward;
    tr.done = sr.done;
    tr.phase = phase;
    tr.active_images = n_active;
    episode.transitions.push_back(std::move(tr));
    episode.total_reward += sr.reward;

    obs = sr.observation;
    rec = std::move(out.next_recurrent);
  }
  episode.final_info = env.last_info();
  return episode;
}

}  // namespace

std::vector<Episode> collect_rollouts(const AgentParams& params,
                                      const std::vector<ImageSet>& image_sets,
                                      const EnvConfig& env_cfg, const ScorerConfig& scorer_cfg,
                                      std::shared_ptr<const PatchScorer> scorer, int n_episodes,
                                      std::uint64_t seed) {
  if (image_sets.empty()) throw InvalidInputError("collect_rollouts: no image sets");
  std::vector<Episode> episodes(n_episodes);
  std::vector<std::uint8_t> ok(n_episodes, 0);

  auto work = [&](int e) {
    const ImageSet& set = image_sets[static_cast<std::size_t>(e) % image_sets.size()];
    try {
      episodes[e] = run_one_episode(params, set, env_cfg, scorer_cfg, scorer,
                                    seed + static_cast<std::uint64_t>(e) * 0x9e3779b97f4a7c15ULL);
      ok[e] = 1;
    } catch (const std::exception& ex) {
      std::cerr << "[rollout] episode " << e << " on set '" << set.name << "' failed: " << ex.what()
                << "\n";
    }
  };

  const int threads = std::min(worker_threads(), n_episodes);
  if (threads <= 1) {
    for (int e = 0; e < n_episodes; ++e) work(e);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (int e = next.fetch_add(1); e < n_episodes; e = next.fetch_add(1)) work(e);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<Episode> out;
  out.reserve(n_episodes);
  for (int e = 0; e < n_episodes; ++e) {
    if (ok[e]) out.push_back(std::move(episodes[e]));
  }
  return out;
}

GreedyRollout run_greedy_episode(const AgentParams& params, const std::vector<Image>& images,
                                 const EnvConfig& env_cfg, const ScorerConfig& scorer_cfg,
                                 std::shared_ptr<const PatchScorer> scorer, std::uint64_t seed) {
  CollageEnv env(images, env_cfg, scorer_cfg, scorer, seed);
  Observation obs = env.reset();
  RecurrentState rec = RecurrentState::zeros(params.cfg);
  const int n_active = env.n_images();

  GreedyRollout out;
  while (!env.done()) {
    const Phase phase = env.state().phase;
    const LegalMask mask = LegalMask::for_phase(phase, params.cfg, n_active);
    PolicyOutput po = policy_forward(params, obs, rec, phase, mask);
    const Action action = greedy_action(po.dist);
    const StepResult sr = env.step(action);

    Transition tr;
    tr.observation = obs;
    tr.action = action;
    tr.log_prob = action_log_prob(po.dist, action);
    tr.value = po.value;
    tr.reward = sr.reward;
    tr.done = sr.done;
    tr.phase = phase;
    tr.active_images = n_active;
    out.transitions.push_back(std::move(tr));
    out.infos.push_back(sr.info);

    obs = sr.observation;
    rec = std::move(po.next_recurrent);
  }
  out.final_state = env.state();
  out.final_info = env.last_info();
  return out;
}

TrainResult train(const TrainConfig& cfg, const EnvConfig& env_cfg, const ScorerConfig& scorer_cfg,
                  const std::vector<ImageSet>& datasets,
                  const std::optional<std::filesystem::path>& out_dir) {
  cfg.validate();
  env_cfg.validate();
  if (datasets.empty()) throw InvalidInputError("train: need at least one image set");
  std::shared_ptr<const PatchScorer> scorer = make_scorer(scorer_cfg);

  int max_images = 0;
  for (const auto& s : datasets) max_images = std::max(max_images, static_cast<int>(s.images.size()));

  AgentConfig agent_cfg;
  agent_cfg.feature_dim = scorer_cfg.feature_dim;
  agent_cfg.n_images = max_images;
  agent_cfg.hidden = cfg.hidden;
  agent_cfg.lstm_layers = cfg.lstm_layers;

  TrainResult result{AgentParams(agent_cfg, cfg.seed), RunLog{}};
  AgentParams checkpoint = result.params;  // restore point for aborted epochs

  for (int epoch = 1; epoch <= cfg.max_epoch; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    checkpoint = result.params;
    const bool sign_rewards = epoch <= cfg.sign_reward_epochs;

    std::vector<Episode> episodes =
        collect_rollouts(result.params, datasets, env_cfg, scorer_cfg, scorer,
                         cfg.episodes_per_epoch,
                         cfg.seed + static_cast<std::uint64_t>(epoch) * 0x51ed2701ULL);
    if (episodes.empty()) throw NumericError("train: every episode of epoch failed");

    EpochStats stats;
    stats.epoch = epoch;
    for (const auto& ep : episodes) {
      stats.mean_return += ep.total_reward;
      stats.mean_final_score += ep.final_info.aesthetic_metric;
      stats.mean_proposal_count += ep.final_info.proposal_count;
      stats.mean_blank_fraction += ep.final_info.blank_fraction;
    }
    const double n = static_cast<double>(episodes.size());
    stats.mean_return /= n;
    stats.mean_final_score /= n;
    stats.mean_proposal_count /= n;
    stats.mean_blank_fraction /= n;

    bool aborted = false;
    int n_batches = 0;
    for (std::size_t start = 0; start < episodes.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(episodes.size(), start + cfg.batch_size);
      std::vector<std::vector<Transition>> batch;
      std::vector<std::vector<double>> returns;
      for (std::size_t e = start; e < end; ++e) {
        std::vector<Transition> transitions = episodes[e].transitions;
        if (sign_rewards) {
          for (auto& tr : transitions) {
            tr.reward = tr.reward > 0 ? 1.0 : (tr.reward < 0 ? -1.0 : 0.0);
          }
        }
        returns.push_back(compute_returns(transitions, 0.0, cfg.gamma));
        batch.push_back(std::move(transitions));
      }
      try {
        result.params.zero_grad();
        const LossStats loss = a2c_loss(result.params, batch, returns, cfg.entropy_weight);
        apply_update(result.params, cfg.lr, cfg.weight_decay);
        stats.policy_loss += loss.policy_loss;
        stats.value_loss += loss.value_loss;
        stats.entropy += loss.entropy;
        ++n_batches;
      } catch (const NumericError& ex) {
        std::cerr << "[train] epoch " << epoch << " aborted: " << ex.what()
                  << "; restoring previous parameters\n";
        result.params = checkpoint;
        aborted = true;
        break;
      }
    }
    if (aborted) continue;
    if (n_batches > 0) {
      stats.policy_loss /= n_batches;
      stats.value_loss /= n_batches;
      stats.entropy /= n_batches;
    }
    stats.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start).count();
    stats.timestamp_ms = now_ms();
    result.log.append(stats);

    if (out_dir && (epoch % cfg.eval_every == 0 || epoch == cfg.max_epoch)) {
      save_checkpoint(*out_dir / ("checkpoint_epoch" + std::to_string(epoch) + ".json"),
                      result.params, "");
      save_checkpoint(*out_dir / "checkpoint_latest.json", result.params, "");
    }
  }
  return result;
}

namespace {

struct BucketAccum {
  int n = 0;
  double proposals = 0.0;
  double score = 0.0;
};

std::string bucket_of(std::size_t n_images) {
  if (n_images == 6) return "6";
  if (n_images == 8) return "8";
  return "<15";
}

}  // namespace

EvalTable evaluate(const AgentParams* params, const std::vector<ImageSet>& image_sets,
                   const EnvConfig& env_cfg, const ScorerConfig& scorer_cfg,
                   std::shared_ptr<const PatchScorer> scorer, const std::string& method,
                   std::uint64_t seed) {
  EnvConfig env = env_cfg;
  ScorerConfig scfg = scorer_cfg;
  bool use_agent = true;
  if (method == "baseline") {
    use_agent = false;
  } else if (method == "agent") {
  } else if (method == "agent_no_attention") {
    scfg.center_attention = false;
  } else if (method == "agent_no_autocrop") {
    env.autocrop = false;
  } else {
    throw ConfigError("unknown evaluation method: " + method +
                      " (expected baseline|agent|agent_no_attention|agent_no_autocrop)");
  }
  if (use_agent && params == nullptr) {
    throw InvalidInputError("method '" + method + "' needs trained agent parameters");
  }

  std::map<std::string, BucketAccum> buckets;
  BucketAccum overall;
  for (std::size_t s = 0; s < image_sets.size(); ++s) {
    const ImageSet& set = image_sets[s];
    // Ablations change how the episode runs (scfg/env above); the reported
    // numbers always come from the unmodified scorer config so every method
    // row is measured with the same metric.
    EvalResult ev;
    if (use_agent) {
      const GreedyRollout ro = run_greedy_episode(*params, set.images, env, scfg, scorer, seed + s);
      ev = evaluate_collage(ro.final_state, set.images, scorer_cfg, *scorer);
    } else {
      const CollageState state = quick_init_baseline(set.images, env, scfg, *scorer, seed + s);
      ev = evaluate_collage(state, set.images, scorer_cfg, *scorer);
    }
    auto& b = buckets[bucket_of(set.images.size())];
    ++b.n;
    b.proposals += ev.proposal_count;
    b.score += ev.aesthetic_score;
    ++overall.n;
    overall.proposals += ev.proposal_count;
    overall.score += ev.aesthetic_score;
  }

  EvalTable table;
  table.method = method;
  for (const std::string& bucket : {"6", "8", "<15"}) {
    auto it = buckets.find(bucket);
    if (it == buckets.end()) continue;
    EvalRow row;
    row.bucket = bucket;
    row.n_sets = it->second.n;
    row.mean_proposal_count = it->second.proposals / it->second.n;
    row.mean_aesthetic_score = it->second.score / it->second.n;
    table.rows.push_back(row);
  }
  if (overall.n > 0) {
    table.overall_proposal_count = overall.proposals / overall.n;
    table.overall_aesthetic_score = overall.score / overall.n;
  }
  return table;
}

void write_eval_csv(const std::filesystem::path& path, const std::vector<EvalTable>& tables) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write evaluation table: " + path.string());
  out << "method,bucket,n_sets,proposal_number,aesthetic_score\n";
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      out << t.method << ',' << r.bucket << ',' << r.n_sets << ',' << r.mean_proposal_count << ','
          << r.mean_aesthetic_score << '\n';
    }
    out << t.method << ",all,," << t.overall_proposal_count << ',' << t.overall_aesthetic_score
        << '\n';
  }
}

}  // namespace collage

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "collage/autodiff.hpp"
#include "collage/environment.hpp"

namespace collage {

struct AgentConfig {
  int feature_dim = 32;  // D; observations are 2D
  int n_images = 8;      // sizes the layout and image heads
  int hidden = 128;
  int lstm_layers = 4;

  int obs_dim() const { return 2 * feature_dim; }
  int layout_head() const { return layout_action_count(n_images); }
};

struct Parameter {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
  Eigen::MatrixXd adam_m;
  Eigen::MatrixXd adam_v;
};

/// Shared backbone + recurrent stack + policy/value heads with paired
/// gradient and optimizer-moment buffers.
class AgentParams {
 public:
  AgentParams(AgentConfig cfg, std::uint64_t seed);

  AgentConfig cfg;
  std::vector<Parameter> params;
  long adam_step = 0;

  Parameter& by_name(const std::string& name);
  const Parameter& by_name(const std::string& name) const;
  void zero_grad();
  void set_all_weights(double v);  // test hook
  bool grads_finite() const;
  bool values_finite() const;
  std::size_t parameter_count() const;
};

struct RecurrentState {
  std::vector<Eigen::VectorXd> h;
  std::vector<Eigen::VectorXd> c;

  static RecurrentState zeros(const AgentConfig& cfg);
};

struct LegalMask {
  Phase phase = Phase::Layout;
  std::vector<std::uint8_t> layout;  // layout_head() entries
  std::vector<std::uint8_t> image, dx, dy, layer, angle;

  /// Phase-legal actions for an episode over the first active_images of the
  /// agent's image slots (active_images <= cfg.n_images; 0 means all).
  static LegalMask for_phase(Phase phase, const AgentConfig& cfg, int active_images = 0);
};

struct PolicyDistribution {
  Phase phase = Phase::Layout;
  Eigen::VectorXd layout_probs;  // Layout phase
  Eigen::VectorXd image_probs, dx_probs, dy_probs, layer_probs, angle_probs;  // Detail phase
};

struct PolicyOutput {
  PolicyDistribution dist;
  double value = 0.0;
  RecurrentState next_recurrent;
};

/// Pure forward pass: masked action distribution, value estimate and the
/// advanced recurrent state. Throws InvalidInputError on an all-false mask,
/// NumericError if the forward pass produces non-finite values.
PolicyOutput policy_forward(const AgentParams& params, const Eigen::VectorXd& observation,
                            const RecurrentState& recurrent, Phase phase, const LegalMask& mask);

std::pair<Action, double> sample_action(const PolicyDistribution& dist, std::mt19937_64& rng);
Action greedy_action(const PolicyDistribution& dist);
double action_log_prob(const PolicyDistribution& dist, const Action& action);

struct Transition {
  Observation observation;
  Action action;
  double log_prob = 0.0;
  double value = 0.0;
  double reward = 0.0;
  bool done = false;
  Phase phase = Phase::Layout;
  int active_images = 0;  // episode image count; 0 means cfg.n_images
};

/// Discounted returns R_t = r_t + gamma * R_{t+1}; done flags cut the
/// recursion, the tail bootstraps from bootstrap_value.
std::vector<double> compute_returns(std::span<const Transition> transitions, double bootstrap_value,
                                    double gamma);

struct LossStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double total = 0.0;
};

/// Replays episodes through the network on a tape and accumulates analytic
/// gradients of mean(-log pi * A + (R - V)^2 - entropy_weight * H) into
/// params.grad. The advantage A = R - V is a constant in the policy term.
/// Each episode starts from a zero recurrent state.
LossStats a2c_loss(AgentParams& params, const std::vector<std::vector<Transition>>& episodes,
                   const std::vector<std::vector<double>>& returns, double entropy_weight);

/// AdamW step with global gradient-norm clip at 0.5. Returns false (and
/// leaves params untouched) when any gradient is non-finite.
bool apply_update(AgentParams& params, double lr, double weight_decay);

void save_checkpoint(const std::filesystem::path& path, const AgentParams& params,
                     const std::string& config_hash);
AgentParams load_checkpoint(const std::filesystem::path& path, std::string* config_hash = nullptr);

}  // namespace collage

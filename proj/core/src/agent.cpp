#include "collage/agent.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "collage/errors.hpp"

namespace collage {

namespace {

using ad::Tape;

Eigen::MatrixXd init_weight(int rows, int cols, std::mt19937_64& rng) {
  const double r = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-r, r);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

}  // namespace

AgentParams::AgentParams(AgentConfig config, std::uint64_t seed) : cfg(config) {
  std::mt19937_64 rng(seed);
  auto weight = [&](const std::string& name, int rows, int cols) {
    Parameter p;
    p.name = name;
    p.value = init_weight(rows, cols, rng);
    p.grad = Eigen::MatrixXd::Zero(rows, cols);
    p.adam_m = p.grad;
    p.adam_v = p.grad;
    params.push_back(std::move(p));
  };
  auto bias = [&](const std::string& name, int rows) {
    Parameter p;
    p.name = name;
    p.value = Eigen::MatrixXd::Zero(rows, 1);
    p.grad = p.value;
    p.adam_m = p.value;
    p.adam_v = p.value;
    params.push_back(std::move(p));
  };

  const int H = cfg.hidden;
  weight("backbone.W0", H, cfg.obs_dim());
  bias("backbone.b0", H);
  weight("backbone.W1", H, H);
  bias("backbone.b1", H);
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    const std::string p = "lstm" + std::to_string(l) + ".";
    weight(p + "Wx", 4 * H, H);
    weight(p + "Wh", 4 * H, H);
    bias(p + "b", 4 * H);
  }
  const std::pair<std::string, int> heads[] = {
      {"layout", cfg.layout_head()}, {"image", cfg.n_images}, {"dx", 4},
      {"dy", 4},                     {"layer", 3},            {"angle", 3},
      {"value", 1}};
  for (const auto& [name, dim] : heads) {
    weight("head." + name + ".W", dim, H);
    bias("head." + name + ".b", dim);
  }
}

Parameter& AgentParams::by_name(const std::string& name) {
  for (auto& p : params) {
    if (p.name == name) return p;
  }
  throw InvalidInputError("unknown parameter: " + name);
}

const Parameter& AgentParams::by_name(const std::string& name) const {
  return const_cast<AgentParams*>(this)->by_name(name);
}

void AgentParams::zero_grad() {
  for (auto& p : params) p.grad.setZero();
}

void AgentParams::set_all_weights(double v) {
  for (auto& p : params) p.value.setConstant(v);
}

bool AgentParams::grads_finite() const {
  for (const auto& p : params) {
    if (!p.grad.allFinite()) return false;
  }
  return true;
}

bool AgentParams::values_finite() const {
  for (const auto& p : params) {
    if (!p.value.allFinite()) return false;
  }
  return true;
}

std::size_t AgentParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.value.size();
  return n;
}

RecurrentState RecurrentState::zeros(const AgentConfig& cfg) {
  RecurrentState s;
  s.h.assign(cfg.lstm_layers, Eigen::VectorXd::Zero(cfg.hidden));
  s.c.assign(cfg.lstm_layers, Eigen::VectorXd::Zero(cfg.hidden));
  return s;
}

LegalMask LegalMask::for_phase(Phase phase, const AgentConfig& cfg, int active_images) {
  const int n_active = active_images > 0 ? active_images : cfg.n_images;
  if (n_active > cfg.n_images) throw InvalidInputError("active_images exceeds agent head size");
  LegalMask m;
  m.phase = phase;
  if (phase == Phase::Layout) {
    m.layout.assign(cfg.layout_head(), 0);
    for (int i = 0; i < n_active - 1; ++i) {
      for (int j = i + 1; j < n_active; ++j) m.layout[pair_to_index(i, j, cfg.n_images)] = 1;
    }
    m.layout.back() = 1;  // terminate
  } else {
    m.image.assign(cfg.n_images, 0);
    std::fill(m.image.begin(), m.image.begin() + n_active, 1);
    m.dx.assign(4, 1);
    m.dy.assign(4, 1);
    m.layer.assign(3, 1);
    m.angle.assign(3, 1);
  }
  return m;
}

namespace {

bool any_legal(const std::vector<std::uint8_t>& mask) {
  for (auto v : mask) {
    if (v) return true;
  }
  return false;
}

// Tape-side forward pass shared by inference and loss replay.
struct TapeForward {
  Tape::Var lp_layout;
  Tape::Var lp_image, lp_dx, lp_dy, lp_layer, lp_angle;
  Tape::Var value;
  std::vector<Tape::Var> h_next, c_next;
};

struct ParamVars {
  std::vector<Tape::Var> vars;

  static ParamVars make(Tape& tape, const AgentParams& params) {
    ParamVars pv;
    pv.vars.reserve(params.params.size());
    for (const auto& p : params.params) pv.vars.push_back(tape.leaf(p.value));
    return pv;
  }
  Tape::Var operator()(const AgentParams& params, const std::string& name) const {
    for (std::size_t i = 0; i < params.params.size(); ++i) {
      if (params.params[i].name == name) return vars[i];
    }
    throw InvalidInputError("unknown parameter: " + name);
  }
};

TapeForward forward_on_tape(Tape& tape, const ParamVars& pv, const AgentParams& params,
                            const Eigen::VectorXd& observation,
                            const std::vector<Tape::Var>& h_in, const std::vector<Tape::Var>& c_in,
                            Phase phase, const LegalMask& mask) {
  const auto& cfg = params.cfg;
  if (observation.size() != cfg.obs_dim()) {
    throw InvalidInputError("observation dimension mismatch");
  }
  const int H = cfg.hidden;
  auto P = [&](const std::string& n) { return pv(params, n); };

  Tape::Var x = tape.leaf(observation);
  Tape::Var h0 = tape.tanh(tape.add(tape.matmul(P("backbone.W0"), x), P("backbone.b0")));
  Tape::Var h1 = tape.tanh(tape.add(tape.matmul(P("backbone.W1"), h0), P("backbone.b1")));

  TapeForward out;
  Tape::Var in = h1;
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    const std::string p = "lstm" + std::to_string(l) + ".";
    Tape::Var gates = tape.add(tape.add(tape.matmul(P(p + "Wx"), in), tape.matmul(P(p + "Wh"), h_in[l])),
                               P(p + "b"));
    Tape::Var i_g = tape.sigmoid(tape.slice_rows(gates, 0, H));
    Tape::Var f_g = tape.sigmoid(tape.slice_rows(gates, H, H));
    Tape::Var g_g = tape.tanh(tape.slice_rows(gates, 2 * H, H));
    Tape::Var o_g = tape.sigmoid(tape.slice_rows(gates, 3 * H, H));
    Tape::Var c = tape.add(tape.cmul(f_g, c_in[l]), tape.cmul(i_g, g_g));
    Tape::Var h = tape.cmul(o_g, tape.tanh(c));
    out.c_next.push_back(c);
    out.h_next.push_back(h);
    in = h;
  }

  auto head = [&](const std::string& name, const std::vector<std::uint8_t>& head_mask) {
    if (!any_legal(head_mask)) {
      throw InvalidInputError("legal mask for head '" + name + "' marks no action");
    }
    Tape::Var logits = tape.add(tape.matmul(P("head." + name + ".W"), in), P("head." + name + ".b"));
    return tape.masked_log_softmax(logits, head_mask);
  };
  if (phase == Phase::Layout) {
    out.lp_layout = head("layout", mask.layout);
  } else {
    out.lp_image = head("image", mask.image);
    out.lp_dx = head("dx", mask.dx);
    out.lp_dy = head("dy", mask.dy);
    out.lp_layer = head("layer", mask.layer);
    out.lp_angle = head("angle", mask.angle);
  }
  out.value = tape.add(tape.matmul(P("head.value.W"), in), P("head.value.b"));
  return out;
}

Eigen::VectorXd probs_from(const Tape& tape, Tape::Var lp) {
  // Scalar exp so masked log-probs underflow to exactly zero.
  return tape.val(lp).unaryExpr([](double v) { return std::exp(v); });
}

}  // namespace

PolicyOutput policy_forward(const AgentParams& params, const Eigen::VectorXd& observation,
                            const RecurrentState& recurrent, Phase phase, const LegalMask& mask) {
  Tape tape;
  ParamVars pv = ParamVars::make(tape, params);
  std::vector<Tape::Var> h_in, c_in;
  for (int l = 0; l < params.cfg.lstm_layers; ++l) {
    h_in.push_back(tape.leaf(recurrent.h[l]));
    c_in.push_back(tape.leaf(recurrent.c[l]));
  }
  TapeForward fwd = forward_on_tape(tape, pv, params, observation, h_in, c_in, phase, mask);
  if (!tape.all_finite(fwd.value)) {
    throw NumericError("policy_forward produced non-finite value estimate");
  }

  PolicyOutput out;
  out.dist.phase = phase;
  if (phase == Phase::Layout) {
    out.dist.layout_probs = probs_from(tape, fwd.lp_layout);
  } else {
    out.dist.image_probs = probs_from(tape, fwd.lp_image);
    out.dist.dx_probs = probs_from(tape, fwd.lp_dx);
    out.dist.dy_probs = probs_from(tape, fwd.lp_dy);
    out.dist.layer_probs = probs_from(tape, fwd.lp_layer);
    out.dist.angle_probs = probs_from(tape, fwd.lp_angle);
  }
  out.value = tape.scalar(fwd.value);
  out.next_recurrent.h.reserve(params.cfg.lstm_layers);
  for (int l = 0; l < params.cfg.lstm_layers; ++l) {
    out.next_recurrent.h.push_back(tape.val(fwd.h_next[l]));
    out.next_recurrent.c.push_back(tape.val(fwd.c_next[l]));
  }
  return out;
}

namespace {

int sample_categorical(const Eigen::VectorXd& probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u = uni(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (int i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    acc += probs[i];
    if (u < acc) return i;
  }
  return last_positive;  // rounding tail
}

int argmax(const Eigen::VectorXd& probs) {
  int best = 0;
  for (int i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

}  // namespace

std::pair<Action, double> sample_action(const PolicyDistribution& dist, std::mt19937_64& rng) {
  if (dist.phase == Phase::Layout) {
    const int idx = sample_categorical(dist.layout_probs, rng);
    const int n_pairs = static_cast<int>(dist.layout_probs.size()) - 1;
    Action a;
    if (idx == n_pairs) {
      a = TerminateAction{};
    } else {
      // Recover n from the head size: n_pairs = n(n-1)/2.
      const int n = static_cast<int>(std::lround((1.0 + std::sqrt(1.0 + 8.0 * n_pairs)) / 2.0));
      const auto [i, j] = index_to_pair(idx, n);
      a = SwitchAction{i, j};
    }
    return {a, std::log(dist.layout_probs[idx])};
  }
  DetailAction d;
  d.image_id = sample_categorical(dist.image_probs, rng);
  d.dx_idx = sample_categorical(dist.dx_probs, rng);
  d.dy_idx = sample_categorical(dist.dy_probs, rng);
  d.layer_idx = sample_categorical(dist.layer_probs, rng);
  d.angle_idx = sample_categorical(dist.angle_probs, rng);
  const double lp = std::log(dist.image_probs[d.image_id]) + std::log(dist.dx_probs[d.dx_idx]) +
                    std::log(dist.dy_probs[d.dy_idx]) + std::log(dist.layer_probs[d.layer_idx]) +
                    std::log(dist.angle_probs[d.angle_idx]);
  return {Action{d}, lp};
}

Action greedy_action(const PolicyDistribution& dist) {
  if (dist.phase == Phase::Layout) {
    const int idx = argmax(dist.layout_probs);
    const int n_pairs = static_cast<int>(dist.layout_probs.size()) - 1;
    if (idx == n_pairs) return TerminateAction{};
    const int n = static_cast<int>(std::lround((1.0 + std::sqrt(1.0 + 8.0 * n_pairs)) / 2.0));
    const auto [i, j] = index_to_pair(idx, n);
    return SwitchAction{i, j};
  }
  DetailAction d;
  d.image_id = argmax(dist.image_probs);
  d.dx_idx = argmax(dist.dx_probs);
  d.dy_idx = argmax(dist.dy_probs);
  d.layer_idx = argmax(dist.layer_probs);
  d.angle_idx = argmax(dist.angle_probs);
  return d;
}

double action_log_prob(const PolicyDistribution& dist, const Action& action) {
  if (std::holds_alternative<TerminateAction>(action)) {
    return std::log(dist.layout_probs[dist.layout_probs.size() - 1]);
  }
  if (std::holds_alternative<SwitchAction>(action)) {
    const auto& sw = std::get<SwitchAction>(action);
    const int n_pairs = static_cast<int>(dist.layout_probs.size()) - 1;
    const int n = static_cast<int>(std::lround((1.0 + std::sqrt(1.0 + 8.0 * n_pairs)) / 2.0));
    return std::log(dist.layout_probs[pair_to_index(sw.i, sw.j, n)]);
  }
  const auto& d = std::get<DetailAction>(action);
  return std::log(dist.image_probs[d.image_id]) + std::log(dist.dx_probs[d.dx_idx]) +
         std::log(dist.dy_probs[d.dy_idx]) + std::log(dist.layer_probs[d.layer_idx]) +
         std::log(dist.angle_probs[d.angle_idx]);
}

std::vector<double> compute_returns(std::span<const Transition> transitions, double bootstrap_value,
                                    double gamma) {
  std::vector<double> returns(transitions.size());
  double carry = bootstrap_value;
  for (int t = static_cast<int>(transitions.size()) - 1; t >= 0; --t) {
    if (transitions[t].done) carry = 0.0;
    returns[t] = transitions[t].reward + gamma * carry;
    carry = returns[t];
  }
  return returns;
}

LossStats a2c_loss(AgentParams& params, const std::vector<std::vector<Transition>>& episodes,
                   const std::vector<std::vector<double>>& returns, double entropy_weight) {
  if (episodes.size() != returns.size()) {
    throw InvalidInputError("a2c_loss: returns not aligned with episodes");
  }
  Tape tape;
  ParamVars pv = ParamVars::make(tape, params);
  const Eigen::MatrixXd zero = Eigen::VectorXd::Zero(params.cfg.hidden);

  Tape::Var total;  // running sum of per-transition terms
  LossStats stats;
  std::size_t n_transitions = 0;

  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const auto& episode = episodes[e];
    if (episode.size() != returns[e].size()) {
      throw InvalidInputError("a2c_loss: returns not aligned with transitions");
    }
    std::vector<Tape::Var> h, c;
    for (int l = 0; l < params.cfg.lstm_layers; ++l) {
      h.push_back(tape.leaf(zero));
      c.push_back(tape.leaf(zero));
    }
    for (std::size_t t = 0; t < episode.size(); ++t) {
      const Transition& tr = episode[t];
      const LegalMask mask = LegalMask::for_phase(tr.phase, params.cfg, tr.active_images);
      TapeForward fwd =
          forward_on_tape(tape, pv, params, tr.observation, h, c, tr.phase, mask);
      h = fwd.h_next;
      c = fwd.c_next;

      Tape::Var lp_a;
      Tape::Var entropy;
      auto head_entropy = [&](Tape::Var lp) {
        return tape.scale(tape.sum(tape.cmul(tape.exp(lp), lp)), -1.0);
      };
      if (tr.phase == Phase::Layout) {
        int idx;
        if (std::holds_alternative<TerminateAction>(tr.action)) {
          idx = params.cfg.layout_head() - 1;
        } else {
          const auto& sw = std::get<SwitchAction>(tr.action);
          idx = pair_to_index(sw.i, sw.j, params.cfg.n_images);
        }
        lp_a = tape.pick(fwd.lp_layout, idx);
        entropy = head_entropy(fwd.lp_layout);
      } else {
        const auto& d = std::get<DetailAction>(tr.action);
        lp_a = tape.add(
            tape.add(tape.add(tape.pick(fwd.lp_image, d.image_id), tape.pick(fwd.lp_dx, d.dx_idx)),
                     tape.add(tape.pick(fwd.lp_dy, d.dy_idx), tape.pick(fwd.lp_layer, d.layer_idx))),
            tape.pick(fwd.lp_angle, d.angle_idx));
        entropy = tape.add(
            tape.add(tape.add(head_entropy(fwd.lp_image), head_entropy(fwd.lp_dx)),
                     tape.add(head_entropy(fwd.lp_dy), head_entropy(fwd.lp_layer))),
            head_entropy(fwd.lp_angle));
      }

      const double R = returns[e][t];
      const double advantage = R - tape.scalar(fwd.value);  // constant in the policy term
      Tape::Var policy_term = tape.scale(lp_a, -advantage);
      Eigen::MatrixXd r_mat(1, 1);
      r_mat(0, 0) = R;
      Tape::Var value_term = tape.square(tape.sub(tape.leaf(r_mat), fwd.value));
      Tape::Var term =
          tape.sub(tape.add(policy_term, value_term), tape.scale(entropy, entropy_weight));
      total = total.valid() ? tape.add(total, term) : term;

      stats.policy_loss += tape.scalar(policy_term);
      stats.value_loss += tape.scalar(value_term);
      stats.entropy += tape.scalar(entropy);
      ++n_transitions;
    }
  }
  if (n_transitions == 0) throw InvalidInputError("a2c_loss: no transitions");

  Tape::Var loss = tape.scale(total, 1.0 / static_cast<double>(n_transitions));
  if (!tape.all_finite(loss)) {
    throw NumericError("a2c_loss: non-finite loss over " + std::to_string(n_transitions) +
                       " transitions");
  }
  tape.backward(loss);
  for (std::size_t i = 0; i < params.params.size(); ++i) {
    params.params[i].grad += tape.grad(pv.vars[i]);
  }

  stats.policy_loss /= n_transitions;
  stats.value_loss /= n_transitions;
  stats.entropy /= n_transitions;
  stats.total = stats.policy_loss + stats.value_loss - entropy_weight * stats.entropy;
  return stats;
}

bool apply_update(AgentParams& params, double lr, double weight_decay) {
  if (!params.grads_finite()) {
    std::cerr << "[agent] non-finite gradient, update skipped\n";
    return false;
  }
  constexpr double kClipNorm = 0.5;
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  double sq_norm = 0.0;
  for (const auto& p : params.params) sq_norm += p.grad.squaredNorm();
  const double norm = std::sqrt(sq_norm);
  const double clip = norm > kClipNorm ? kClipNorm / norm : 1.0;

  ++params.adam_step;
  const double bc1 = 1.0 - std::pow(kBeta1, params.adam_step);
  const double bc2 = 1.0 - std::pow(kBeta2, params.adam_step);
  for (auto& p : params.params) {
    const Eigen::MatrixXd g = p.grad * clip;
    p.adam_m = kBeta1 * p.adam_m + (1.0 - kBeta1) * g;
    p.adam_v = kBeta2 * p.adam_v + (1.0 - kBeta2) * g.cwiseProduct(g);
    const Eigen::MatrixXd m_hat = p.adam_m / bc1;
    const Eigen::MatrixXd v_hat = p.adam_v / bc2;
    p.value -= lr * (m_hat.array() / (v_hat.array().sqrt() + kEps)).matrix();
    p.value -= lr * weight_decay * p.value;  // decoupled decay
  }
  return true;
}

void save_checkpoint(const std::filesystem::path& path, const AgentParams& params,
                     const std::string& config_hash) {
  nlohmann::json j;
  j["version"] = 1;
  j["config"] = {{"feature_dim", params.cfg.feature_dim},
                 {"n_images", params.cfg.n_images},
                 {"hidden", params.cfg.hidden},
                 {"lstm_layers", params.cfg.lstm_layers}};
  j["config_hash"] = config_hash;
  j["adam_step"] = params.adam_step;
  auto dump = [](const Eigen::MatrixXd& m) {
    std::vector<double> v(m.data(), m.data() + m.size());
    return v;
  };
  for (const auto& p : params.params) {
    j["params"].push_back({{"name", p.name},
                           {"rows", p.value.rows()},
                           {"cols", p.value.cols()},
                           {"value", dump(p.value)},
                           {"adam_m", dump(p.adam_m)},
                           {"adam_v", dump(p.adam_v)}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  out << j.dump();
}

AgentParams load_checkpoint(const std::filesystem::path& path, std::string* config_hash) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read checkpoint: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  AgentConfig cfg;
  cfg.feature_dim = j.at("config").at("feature_dim").get<int>();
  cfg.n_images = j.at("config").at("n_images").get<int>();
  cfg.hidden = j.at("config").at("hidden").get<int>();
  cfg.lstm_layers = j.at("config").at("lstm_layers").get<int>();
  AgentParams params(cfg, 0);
  params.adam_step = j.at("adam_step").get<long>();
  if (config_hash) *config_hash = j.value("config_hash", "");
  auto fill = [](Eigen::MatrixXd& m, const std::vector<double>& v) {
    if (static_cast<std::size_t>(m.size()) != v.size()) {
      throw IoError("checkpoint tensor size mismatch");
    }
    std::copy(v.begin(), v.end(), m.data());
  };
  for (const auto& pj : j.at("params")) {
    Parameter& p = params.by_name(pj.at("name").get<std::string>());
    fill(p.value, pj.at("value").get<std::vector<double>>());
    fill(p.adam_m, pj.at("adam_m").get<std::vector<double>>());
    fill(p.adam_v, pj.at("adam_v").get<std::vector<double>>());
  }
  return params;
}

}  // namespace collage

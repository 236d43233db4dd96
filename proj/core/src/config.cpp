#include "collage/config.hpp"

#include <fstream>
#include <sstream>

#include "collage/errors.hpp"

namespace collage {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int out = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected integer, got '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected boolean, got '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    // "w:h" ratio notation is allowed wherever a number list is.
    if (const auto colon = item.find(':'); colon != std::string::npos) {
      const double w = parse_double(key, item.substr(0, colon));
      const double h = parse_double(key, item.substr(colon + 1));
      if (h == 0) throw ConfigError("config key '" + key + "': ratio with zero denominator");
      out.push_back(w / h);
    } else {
      out.push_back(parse_double(key, item));
    }
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

}  // namespace

void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "env.max_step") cfg.env.max_step = parse_int(key, v);
  else if (key == "env.layout_budget") cfg.env.layout_budget = parse_int(key, v);
  else if (key == "env.lambda_a") cfg.env.lambda_a = parse_double(key, v);
  else if (key == "env.lambda_b") cfg.env.lambda_b = parse_double(key, v);
  else if (key == "env.step_penalty") cfg.env.step_penalty = parse_double(key, v);
  else if (key == "env.canvas_base_px") cfg.env.canvas_base_px = parse_int(key, v);
  else if (key == "env.autocrop") cfg.env.autocrop = parse_bool(key, v);
  else if (key == "env.crop_scales") cfg.env.crop_grid.scales = parse_double_list(key, v);
  else if (key == "env.crop_offsets") cfg.env.crop_grid.offsets_per_axis = parse_int(key, v);
  else if (key == "scorer.eta") cfg.scorer.eta = parse_double(key, v);
  else if (key == "scorer.scales") cfg.scorer.scales = parse_double_list(key, v);
  else if (key == "scorer.aspect_ratios") cfg.scorer.aspect_ratios = parse_double_list(key, v);
  else if (key == "scorer.stride_fraction") cfg.scorer.stride_fraction = parse_double(key, v);
  else if (key == "scorer.score_threshold") cfg.scorer.score_threshold = parse_double(key, v);
  else if (key == "scorer.feature_dim") cfg.scorer.feature_dim = parse_int(key, v);
  else if (key == "scorer.center_attention") cfg.scorer.center_attention = parse_bool(key, v);
  else if (key == "scorer.scorer") cfg.scorer.scorer = v;
  else if (key == "train.max_epoch") cfg.train.max_epoch = parse_int(key, v);
  else if (key == "train.episodes_per_epoch") cfg.train.episodes_per_epoch = parse_int(key, v);
  else if (key == "train.batch_size") cfg.train.batch_size = parse_int(key, v);
  else if (key == "train.gamma") cfg.train.gamma = parse_double(key, v);
  else if (key == "train.entropy_weight") cfg.train.entropy_weight = parse_double(key, v);
  else if (key == "train.lr") cfg.train.lr = parse_double(key, v);
  else if (key == "train.weight_decay") cfg.train.weight_decay = parse_double(key, v);
  else if (key == "train.sign_reward_epochs") cfg.train.sign_reward_epochs = parse_int(key, v);
  else if (key == "train.seed") cfg.train.seed = static_cast<std::uint64_t>(parse_int(key, v));
  else if (key == "train.eval_every") cfg.train.eval_every = parse_int(key, v);
  else if (key == "train.hidden") cfg.train.hidden = parse_int(key, v);
  else if (key == "train.lstm_layers") cfg.train.lstm_layers = parse_int(key, v);
  else throw ConfigError("unknown config key: '" + key + "'");
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    apply_config_kv(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

std::string dump_config(const RunConfig& cfg) {
  std::ostringstream out;
  auto list = [](const std::vector<double>& v) {
    std::ostringstream s;
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    return s.str();
  };
  out << "env.max_step = " << cfg.env.max_step << '\n'
      << "env.layout_budget = " << cfg.env.layout_budget << '\n'
      << "env.lambda_a = " << cfg.env.lambda_a << '\n'
      << "env.lambda_b = " << cfg.env.lambda_b << '\n'
      << "env.step_penalty = " << cfg.env.step_penalty << '\n'
      << "env.canvas_base_px = " << cfg.env.canvas_base_px << '\n'
      << "env.autocrop = " << (cfg.env.autocrop ? "true" : "false") << '\n'
      << "env.crop_scales = " << list(cfg.env.crop_grid.scales) << '\n'
      << "env.crop_offsets = " << cfg.env.crop_grid.offsets_per_axis << '\n'
      << "scorer.eta = " << cfg.scorer.eta << '\n'
      << "scorer.scales = " << list(cfg.scorer.scales) << '\n'
      << "scorer.aspect_ratios = " << list(cfg.scorer.aspect_ratios) << '\n'
      << "scorer.stride_fraction = " << cfg.scorer.stride_fraction << '\n'
      << "scorer.score_threshold = " << cfg.scorer.score_threshold << '\n'
      << "scorer.feature_dim = " << cfg.scorer.feature_dim << '\n'
      << "scorer.center_attention = " << (cfg.scorer.center_attention ? "true" : "false") << '\n'
      << "scorer.scorer = " << cfg.scorer.scorer << '\n'
      << "train.max_epoch = " << cfg.train.max_epoch << '\n'
      << "train.episodes_per_epoch = " << cfg.train.episodes_per_epoch << '\n'
      << "train.batch_size = " << cfg.train.batch_size << '\n'
      << "train.gamma = " << cfg.train.gamma << '\n'
      << "train.entropy_weight = " << cfg.train.entropy_weight << '\n'
      << "train.lr = " << cfg.train.lr << '\n'
      << "train.weight_decay = " << cfg.train.weight_decay << '\n'
      << "train.sign_reward_epochs = " << cfg.train.sign_reward_epochs << '\n'
      << "train.seed = " << cfg.train.seed << '\n'
      << "train.eval_every = " << cfg.train.eval_every << '\n'
      << "train.hidden = " << cfg.train.hidden << '\n'
      << "train.lstm_layers = " << cfg.train.lstm_layers << '\n';
  return out.str();
}

}  // namespace collage

// Command-line entry points: collage generation, training and evaluation.
//
// Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numeric failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "collage/config.hpp"
#include "collage/errors.hpp"
#include "collage/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

std::pair<int, int> parse_aspect(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw collage::ConfigError("aspect must be W:H, got '" + text + "'");
  int w = 0, h = 0;
  try {
    std::size_t pw = 0, ph = 0;
    w = std::stoi(text.substr(0, colon), &pw);
    h = std::stoi(text.substr(colon + 1), &ph);
    if (pw != colon || ph != text.size() - colon - 1) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw collage::ConfigError("aspect must be W:H with integers, got '" + text + "'");
  }
  if (w <= 0 || h <= 0) throw collage::ConfigError("aspect components must be positive: '" + text + "'");
  return {w, h};
}

std::uint64_t fnv1a_file(const fs::path& path, std::uint64_t hash) {
  std::ifstream in(path, std::ios::binary);
  char buf[8192];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

void write_manifest(const fs::path& path, const std::string& command,
                    const collage::RunConfig& cfg, const std::vector<fs::path>& inputs,
                    std::uint64_t seed, const std::vector<fs::path>& outputs) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  json in_list = json::array();
  for (const auto& p : inputs) {
    in_list.push_back(p.string());
    hash = fnv1a_file(p, hash);
  }
  json out_list = json::array();
  for (const auto& p : outputs) out_list.push_back(p.string());
  json j{{"command", command},
         {"config", collage::dump_config(cfg)},
         {"inputs", in_list},
         {"seed", seed},
         {"outputs", out_list},
         {"input_hash", hash}};
  std::ofstream out(path);
  if (!out) throw collage::IoError("cannot write manifest: " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<fs::path> image_files_sorted(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw collage::IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<collage::ImageSet> load_sets(const fs::path& data_dir) {
  if (!fs::is_directory(data_dir)) throw collage::IoError("not a directory: " + data_dir.string());
  std::vector<collage::ImageSet> sets;
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(data_dir)) {
    if (e.is_directory()) subdirs.push_back(e.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& d : subdirs) {
    collage::ImageSet set;
    set.name = d.filename().string();
    set.images = collage::load_image_dir(d);
    if (set.images.size() >= 2) sets.push_back(std::move(set));
  }
  if (sets.empty()) throw collage::IoError("no image-set subdirectories under " + data_dir.string());
  return sets;
}

void write_trace(const fs::path& path, const std::vector<collage::StepInfo>& infos,
                 const std::vector<collage::Transition>& transitions) {
  std::ofstream out(path);
  if (!out) throw collage::IoError("cannot write trace: " + path.string());
  for (std::size_t t = 0; t < infos.size(); ++t) {
    json j{{"step", infos[t].step_index},
           {"reward", t < transitions.size() ? transitions[t].reward : 0.0},
           {"s_a", infos[t].proposal_count},
           {"s_b", infos[t].blank_fraction},
           {"score", infos[t].score},
           {"aesthetic_metric", infos[t].aesthetic_metric},
           {"phase", infos[t].phase == collage::Phase::Layout ? "layout" : "detail"}};
    if (t < transitions.size()) {
      const auto& a = transitions[t].action;
      if (std::holds_alternative<collage::TerminateAction>(a)) {
        j["action"] = {{"type", "terminate"}};
      } else if (std::holds_alternative<collage::SwitchAction>(a)) {
        const auto& sw = std::get<collage::SwitchAction>(a);
        j["action"] = {{"type", "switch"}, {"i", sw.i}, {"j", sw.j}};
      } else {
        const auto& d = std::get<collage::DetailAction>(a);
        j["action"] = {{"type", "detail"},      {"image", d.image_id}, {"dx_idx", d.dx_idx},
                       {"dy_idx", d.dy_idx},    {"layer_idx", d.layer_idx},
                       {"angle_idx", d.angle_idx}};
      }
    }
    out << j.dump() << '\n';
  }
}

collage::Image render(const collage::CollageState& state, const std::vector<collage::Image>& images) {
  const collage::RasterBuffers buf = collage::rasterize(state, images);
  collage::Image out(buf.width, buf.height);
  out.rgb = buf.pixels;
  return out;
}

int cmd_generate(const fs::path& input_dir, const std::string& aspect, const fs::path& out_png,
                 const std::optional<fs::path>& checkpoint, const std::optional<fs::path>& config,
                 std::uint64_t seed) {
  const auto [aw, ah] = parse_aspect(aspect);
  collage::RunConfig cfg;
  if (config) cfg = collage::load_config_file(*config);
  cfg.env.target_aspect_w = aw;
  cfg.env.target_aspect_h = ah;

  const std::vector<fs::path> files = image_files_sorted(input_dir);
  std::vector<collage::Image> images = collage::load_image_dir(input_dir);
  if (images.size() < 2 || images.size() > 15) {
    throw collage::IoError("input dir must hold 2..15 readable images, found " +
                           std::to_string(images.size()));
  }
  auto scorer = collage::make_scorer(cfg.scorer);

  collage::CollageState final_state;
  std::vector<collage::StepInfo> infos;
  std::vector<collage::Transition> transitions;
  if (checkpoint) {
    const collage::AgentParams params = collage::load_checkpoint(*checkpoint);
    collage::GreedyRollout ro =
        collage::run_greedy_episode(params, images, cfg.env, cfg.scorer, scorer, seed);
    final_state = std::move(ro.final_state);
    infos = std::move(ro.infos);
    transitions = std::move(ro.transitions);
  } else {
    // No policy: quick-initialization layout plus one greedy AutoCrop pass.
    final_state = collage::quick_init_baseline(images, cfg.env, cfg.scorer, *scorer, seed);
    final_state = collage::autocrop(final_state, images, cfg.env, cfg.scorer, *scorer).first;
    const collage::EvalResult ev = collage::evaluate_collage(final_state, images, cfg.scorer, *scorer);
    collage::StepInfo info;
    info.score = collage::collage_score(ev.proposal_count, ev.blank_fraction, cfg.env);
    info.proposal_count = ev.proposal_count;
    info.blank_fraction = ev.blank_fraction;
    info.aesthetic_metric = ev.aesthetic_score;
    infos.push_back(info);
  }

  collage::save_png(out_png, render(final_state, images));
  const fs::path trace_path = fs::path(out_png).replace_extension(".trace.jsonl");
  write_trace(trace_path, infos, transitions);
  const fs::path manifest_path = fs::path(out_png).replace_extension(".manifest.json");
  write_manifest(manifest_path, "generate", cfg, files, seed, {out_png, trace_path});
  std::cout << "wrote " << out_png.string() << '\n';
  return 0;
}

int cmd_train(const std::optional<fs::path>& config, const fs::path& data_dir,
              const fs::path& out_dir, std::optional<int> max_epoch_override,
              std::optional<std::uint64_t> seed_override) {
  collage::RunConfig cfg;
  if (config) cfg = collage::load_config_file(*config);
  if (max_epoch_override) {
    cfg.train.max_epoch = *max_epoch_override;
    cfg.train.sign_reward_epochs = std::min(cfg.train.sign_reward_epochs, cfg.train.max_epoch);
  }
  if (seed_override) cfg.train.seed = *seed_override;

  const std::vector<collage::ImageSet> sets = load_sets(data_dir);
  fs::create_directories(out_dir);
  collage::TrainResult result =
      collage::train(cfg.train, cfg.env, cfg.scorer, sets, out_dir);
  result.log.write_csv(out_dir / "runlog.csv");
  result.log.write_json(out_dir / "runlog.json");
  collage::save_checkpoint(out_dir / "checkpoint_final.json", result.params, "");

  std::vector<fs::path> inputs;
  for (const auto& e : fs::recursive_directory_iterator(data_dir)) {
    if (e.is_regular_file()) inputs.push_back(e.path());
  }
  std::sort(inputs.begin(), inputs.end());
  write_manifest(out_dir / "manifest.json", "train", cfg, inputs, cfg.train.seed,
                 {out_dir / "checkpoint_final.json", out_dir / "runlog.csv"});
  std::cout << "trained " << result.log.rows.size() << " epochs -> " << out_dir.string() << '\n';
  return 0;
}

int cmd_evaluate(const std::optional<fs::path>& checkpoint, const fs::path& data_dir,
                 const std::vector<std::string>& methods, const std::optional<fs::path>& config,
                 const std::optional<fs::path>& out_csv, std::uint64_t seed) {
  collage::RunConfig cfg;
  if (config) cfg = collage::load_config_file(*config);
  const std::vector<collage::ImageSet> sets = load_sets(data_dir);
  auto scorer = collage::make_scorer(cfg.scorer);

  std::optional<collage::AgentParams> params;
  if (checkpoint) params = collage::load_checkpoint(*checkpoint);

  std::vector<collage::EvalTable> tables;
  for (const std::string& method : methods) {
    tables.push_back(collage::evaluate(params ? &*params : nullptr, sets, cfg.env, cfg.scorer,
                                       scorer, method, seed));
  }

  std::ostringstream text;
  text << "method,bucket,n_sets,proposal_number,aesthetic_score\n";
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      text << t.method << ',' << r.bucket << ',' << r.n_sets << ',' << r.mean_proposal_count << ','
           << r.mean_aesthetic_score << '\n';
    }
    text << t.method << ",all,," << t.overall_proposal_count << ',' << t.overall_aesthetic_score
         << '\n';
  }
  if (out_csv) {
    collage::write_eval_csv(*out_csv, tables);
    write_manifest(fs::path(*out_csv).replace_extension(".manifest.json"), "evaluate", cfg, {},
                   seed, {*out_csv});
  }
  std::cout << text.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aspect-ratio-specified photo collage generator"};
  app.require_subcommand(1);

  std::string input_dir, aspect = "1:1", out_path = "collage.png";
  std::string checkpoint, config, data_dir, out_dir = "train_out", out_csv;
  std::vector<std::string> methods{"baseline"};
  std::uint64_t seed = 0;
  int max_epoch = -1;

  auto* gen = app.add_subcommand("generate", "Generate a collage from an image directory");
  gen->add_option("--input", input_dir, "Directory of 2..15 PNG/JPEG images")->required();
  gen->add_option("--aspect", aspect, "Target aspect ratio W:H");
  gen->add_option("--out", out_path, "Output PNG path");
  gen->add_option("--checkpoint", checkpoint, "Trained agent checkpoint (optional)");
  gen->add_option("--config", config, "Key-value config file");
  gen->add_option("--seed", seed, "Random seed");

  auto* tr = app.add_subcommand("train", "Train the collage agent");
  tr->add_option("--config", config, "Key-value config file");
  tr->add_option("--data", data_dir, "Directory of image-set subdirectories")->required();
  tr->add_option("--out", out_dir, "Output directory for checkpoints and logs");
  tr->add_option("--max-epoch", max_epoch, "Override train.max_epoch");
  tr->add_option("--seed", seed, "Override train.seed");

  auto* ev = app.add_subcommand("evaluate", "Evaluate methods on image sets");
  ev->add_option("--checkpoint", checkpoint, "Trained agent checkpoint");
  ev->add_option("--data", data_dir, "Directory of image-set subdirectories")->required();
  ev->add_option("--methods", methods, "baseline|agent|agent_no_attention|agent_no_autocrop")
      ->delimiter(',');
  ev->add_option("--config", config, "Key-value config file");
  ev->add_option("--out", out_csv, "Write CSV table here");
  ev->add_option("--seed", seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  auto opt_path = [](const std::string& s) {
    return s.empty() ? std::optional<fs::path>() : std::optional<fs::path>(s);
  };
  try {
    if (gen->parsed()) {
      return cmd_generate(input_dir, aspect, out_path, opt_path(checkpoint), opt_path(config), seed);
    }
    if (tr->parsed()) {
      return cmd_train(opt_path(config), data_dir, out_dir,
                       max_epoch >= 0 ? std::optional<int>(max_epoch) : std::nullopt,
                       tr->count("--seed") ? std::optional<std::uint64_t>(seed) : std::nullopt);
    }
    if (ev->parsed()) {
      return cmd_evaluate(opt_path(checkpoint), data_dir, methods, opt_path(config),
                          opt_path(out_csv), seed);
    }
  } catch (const collage::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const collage::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const collage::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}

#pragma once

#include <filesystem>
#include <string>

#include "collage/harness.hpp"

namespace collage {

struct RunConfig {
  EnvConfig env;
  ScorerConfig scorer;
  TrainConfig train;
};

/// Applies one dotted-key setting (e.g. "env.max_step", "train.lr",
/// "scorer.eta"). Throws ConfigError naming the key when it is unknown or the
/// value does not parse.
void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value);

/// Plain key = value text, '#' comments, blank lines ignored.
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

std::string dump_config(const RunConfig& cfg);  // same key=value format

}  // namespace collage

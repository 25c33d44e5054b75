#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "disrc/agent_disrc.hpp"

namespace disrc {

enum class EnvKind { DoorKey8, LavaCrossing9 };
enum class AgentKind { Dqn, Disrc };

std::string to_string(EnvKind env);
std::string to_string(AgentKind agent);
EnvKind parse_env(const std::string& s);
AgentKind parse_agent(const std::string& s);

GridState reset_env(EnvKind env, std::uint64_t seed);

// Full description of one training run. total_episodes and grad_clip carry
// environment-dependent defaults (700/1200 episodes, clip 0.3/0.2) applied
// when not set explicitly.
struct RunConfig {
  EnvKind env = EnvKind::DoorKey8;
  AgentKind agent = AgentKind::Dqn;
  std::uint64_t seed = 1;
  std::optional<int> total_episodes;
  std::optional<double> grad_clip_max_norm;
  std::string out_dir;  // empty -> runs/<env>_<agent>_seed<seed>
  DisrcConfig params;   // params.dqn holds the shared Q-learning keys
  bool save_checkpoints = false;

  int episodes() const;
  double grad_clip() const;
  std::string resolved_out_dir() const;
  DqnConfig dqn_resolved() const;
  DisrcConfig disrc_resolved() const;

  void validate() const;  // throws std::invalid_argument on bad values
};

// Flat key=value text, UTF-8, '#' starts a comment. Unknown keys are errors.
RunConfig parse_config_text(const std::string& text, RunConfig base = {});
RunConfig parse_config_file(const std::string& path, RunConfig base = {});
void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value);

// Every effective key, one per line in a fixed order, defaults materialized;
// parsing the echo reproduces the run exactly.
std::string echo_config(const RunConfig& cfg);

// comma-separated helpers used by the CLI ("1,2,3")
std::vector<std::uint64_t> parse_seed_list(const std::string& s);
std::vector<double> parse_double_list(const std::string& s);

}  // namespace disrc

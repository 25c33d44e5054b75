#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace disrc {

// Per-episode training telemetry; raw_reward is always the environment's
// reward, shaped values never reach the metrics below.
struct EpisodeRecord {
  int episode = 0;  // 1-based
  double raw_reward = 0.0;
  double shaped_reward_sum = 0.0;
  int steps = 0;
  std::optional<double> mean_loss;
  double epsilon = 0.0;
};

struct RunSummary {
  double mean_final_reward = 0.0;
  std::optional<int> episodes_to_threshold;
  std::optional<double> loss_variance;  // empty when no update ever ran
  double reward_std = 0.0;
  std::optional<double> auc;  // empty for runs shorter than 2 episodes
  std::uint64_t seed = 0;
  std::string agent;
  std::string env;
  int total_episodes = 0;
};

// Mean of the last min(window, size) rewards. Throws on an empty sequence.
double mean_final_reward(std::span<const double> rewards, int window = 50);

// Smallest 1-based index whose reward strictly exceeds the threshold.
std::optional<int> episodes_to_threshold(std::span<const double> rewards,
                                         double threshold = 0.8);

// Population standard deviation (divide by N). Throws on empty input.
double reward_std(std::span<const double> rewards);

// Population variance over every recorded per-step loss. Throws on empty.
double loss_variance(std::span<const double> losses);

// Trapezoidal sum with unit spacing: sum of (r_i + r_{i+1})/2. Throws when
// fewer than 2 entries.
double auc(std::span<const double> rewards);

}  // namespace disrc

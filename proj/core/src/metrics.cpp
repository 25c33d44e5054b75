#include "disrc/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace disrc {

namespace {

double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double population_variance(std::span<const double> xs) {
  const double mu = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return s / static_cast<double>(xs.size());
}

}  // namespace

double mean_final_reward(std::span<const double> rewards, int window) {
  if (rewards.empty()) throw std::invalid_argument("mean_final_reward: empty sequence");
  if (window < 1) throw std::invalid_argument("mean_final_reward: window must be >= 1");
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(window),
                                              rewards.size());
  return mean(rewards.subspan(rewards.size() - n));
}

std::optional<int> episodes_to_threshold(std::span<const double> rewards,
                                         double threshold) {
  for (std::size_t i = 0; i < rewards.size(); ++i)
    if (rewards[i] > threshold) return static_cast<int>(i) + 1;
  return std::nullopt;
}

double reward_std(std::span<const double> rewards) {
  if (rewards.empty()) throw std::invalid_argument("reward_std: empty sequence");
  return std::sqrt(population_variance(rewards));
}

double loss_variance(std::span<const double> losses) {
  if (losses.empty()) throw std::invalid_argument("loss_variance: empty sequence");
  return population_variance(losses);
}

double auc(std::span<const double> rewards) {
  if (rewards.size() < 2) throw std::invalid_argument("auc: need at least 2 episodes");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < rewards.size(); ++i)
    s += 0.5 * (rewards[i] + rewards[i + 1]);
  return s;
}

}  // namespace disrc

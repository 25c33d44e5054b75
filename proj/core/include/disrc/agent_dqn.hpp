#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "disrc/nn.hpp"
#include "disrc/replay.hpp"
#include "disrc/rng.hpp"

namespace disrc {

// Which network picks the bootstrap action: Double = argmax under the online
// network, evaluated under the target network; Vanilla = max under the
// target network alone.
enum class TargetRule { Double, Vanilla };

struct DqnConfig {
  double gamma = 0.99;
  double q_lr = 1e-4;
  double tau = 0.005;
  int batch_size = 128;
  double eps_start = 1.0;
  double eps_min = 0.1;
  // fraction of total episodes over which epsilon decays linearly
  double eps_decay_fraction = 0.8;
  double grad_clip_max_norm = 0.3;
  std::array<int, 2> hidden_dims = {256, 256};
  TargetRule target_rule = TargetRule::Double;
  std::size_t replay_capacity = 50000;
};

// Linear schedule from eps_start to eps_min over the first
// eps_decay_fraction * total_episodes episodes (0-based), eps_min after.
double epsilon_at(int episode, int total_episodes, const DqnConfig& cfg);

class DqnAgent {
 public:
  DqnAgent(int obs_dim, int num_actions, DqnConfig cfg, std::uint64_t init_seed);

  // Epsilon-greedy. Always consumes one uniform draw for the explore coin and
  // one more when exploring; greedy ties break to the lowest action index.
  int select_action(std::span<const double> obs, double epsilon, Rng& rng) const;

  // y_i = r_i + gamma * Qt(s', a*) * (1 - d_i), a* per the target rule.
  Vec compute_targets(const std::vector<const Transition*>& batch) const;

  // Samples a batch; empty optional (and no update) when the buffer is still
  // smaller than batch_size. Otherwise runs one clipped Adam step on the mean
  // squared TD error and returns the loss.
  std::optional<double> train_step(ReplayBuffer& buffer, Rng& rng);

  // One gradient step on the given batch. Optional per-sample weights scale
  // each squared TD error (weights are treated as constants); used by the
  // update-scaling modulation mode.
  double train_on_batch(const std::vector<const Transition*>& batch,
                        const Vec* weights = nullptr);

  // target <- tau*online + (1-tau)*target
  void soft_update();

  const Mlp& q_net() const { return q_net_; }
  const Mlp& target_net() const { return target_net_; }

  // Replaces the online network (e.g. from a checkpoint) and resets the
  // optimizer moments to match the new parameter shapes.
  void set_q_net(Mlp net);
  void set_target_net(Mlp net);
  const DqnConfig& config() const { return cfg_; }
  int num_actions() const { return num_actions_; }
  int obs_dim() const { return obs_dim_; }

 private:
  DqnConfig cfg_;
  int obs_dim_;
  int num_actions_;
  Mlp q_net_;
  Mlp target_net_;
  AdamState opt_;
};

}  // namespace disrc

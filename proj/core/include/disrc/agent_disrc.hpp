#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "disrc/agent_dqn.hpp"
#include "disrc/gridworld.hpp"
#include "disrc/nn.hpp"
#include "disrc/replay.hpp"
#include "disrc/rng.hpp"

namespace disrc {

// Surprise-regularized control on top of the DQN baseline: observations are
// embedded by a small encoder, surprise is the L2 deviation of the unit-
// normalized latent from a slow moving setpoint, and a decaying coefficient
// converts that deviation into a shaped-reward penalty (or, alternatively,
// into per-sample update weights).

inline constexpr int kLatentDim = 64;

// Reconstruction trains the encoder through an auxiliary decoder; Frozen
// keeps the randomly initialized encoder fixed (random-feature embedding).
enum class EncoderMode { Reconstruction, Frozen };

// RewardShaping stores shaped rewards in replay; UpdateScaling stores raw
// rewards and weights each sample's squared TD error at update time.
enum class Modulation { RewardShaping, UpdateScaling };

struct DisrcConfig {
  DqnConfig dqn;
  double beta0 = 0.2;
  double lambda = 1.0;
  double rho_mu = 0.995;  // setpoint EMA decay
  double rho_r = 0.99;    // reward-magnitude EMA decay (1.0 freezes it)
  double encoder_lr = 3e-4;
  EncoderMode encoder_mode = EncoderMode::Reconstruction;
  Modulation modulation = Modulation::RewardShaping;
};

struct SurpriseState {
  Vec mu = Vec::Zero(kLatentDim);  // latent setpoint, starts at zero
  double rho_mu = 0.995;
  double reward_mag_ema = 1.0;  // EMA(|r|), initialized to 1
  double rho_r = 0.99;
  double beta0 = 0.2;
  double lambda = 1.0;
  int total_episodes = 1;
  double norm_eps = 1e-8;
};

// || s/max(||s||,eps) - mu/max(||mu||,eps) ||_2, always in [0, 2].
double deviation(const Vec& latent, const Vec& mu, double norm_eps);

// mu <- rho_mu*mu + (1-rho_mu)*latent; call after deviation so the deviation
// is measured against the pre-update setpoint.
void update_setpoint(SurpriseState& st, const Vec& latent);

// beta0 * (1 - progress^1.2) with progress = episode/total clamped to [0,1].
double beta_at(int episode, const SurpriseState& st);

// Updates the reward-magnitude EMA with |r| first, then returns
// r/max(EMA,eps) + lambda * b with b = -beta_t * deviation (b <= 0).
double shape_reward(double r, double dev, double beta_t, SurpriseState& st);

class DisrcAgent {
 public:
  // Episode indices passed to collect_step/train_step are 1-based; the beta
  // schedule uses episode/total so it reaches exactly 0 on the final episode,
  // while the epsilon schedule uses episode-1 so the first episode explores
  // at eps_start.
  DisrcAgent(int obs_dim, int num_actions, DisrcConfig cfg, int total_episodes,
             std::uint64_t q_init_seed, std::uint64_t encoder_init_seed);

  Vec encode(std::span<const double> obs) const;

  struct CollectResult {
    Transition transition;  // what goes into replay
    double raw_reward = 0.0;
    double shaped_reward = 0.0;
    double deviation = 0.0;
    double beta = 0.0;
    double bonus = 0.0;  // b = -beta * deviation
    bool terminated = false;
    bool truncated = false;
  };

  // One environment interaction: select an action epsilon-greedily, step the
  // environment, measure surprise against the pre-update setpoint, advance
  // the setpoint, and shape the reward with the episode's beta.
  CollectResult collect_step(GridState& env, const Observation& obs, int episode,
                             Rng& rng);

  // Q update identical to the baseline (shaped rewards already live in the
  // stored transitions); in UpdateScaling mode each sample's squared TD error
  // is weighted by 1 + lambda*beta_t*deviation_i instead. In Reconstruction
  // mode also runs one Adam step on the decoder MSE over the same batch.
  std::optional<double> train_step(ReplayBuffer& buffer, Rng& rng, int episode);

  void soft_update() { base_.soft_update(); }

  DqnAgent& base() { return base_; }
  const DqnAgent& base() const { return base_; }
  SurpriseState& surprise() { return surprise_; }
  const SurpriseState& surprise() const { return surprise_; }
  const Mlp& encoder() const { return encoder_; }
  const DisrcConfig& config() const { return cfg_; }

 private:
  void reconstruction_step(const std::vector<const Transition*>& batch);

  DisrcConfig cfg_;
  DqnAgent base_;
  Mlp encoder_;
  AdamState encoder_opt_;
  Mlp decoder_;  // auxiliary head, never used for control
  AdamState decoder_opt_;
  SurpriseState surprise_;
};

}  // namespace disrc

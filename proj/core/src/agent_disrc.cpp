#include "disrc/agent_disrc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace disrc {

double deviation(const Vec& latent, const Vec& mu, double norm_eps) {
  if (latent.size() != mu.size())
    throw std::invalid_argument("deviation: dimension mismatch");
  const Vec a = latent / std::max(latent.norm(), norm_eps);
  const Vec b = mu / std::max(mu.norm(), norm_eps);
  return (a - b).norm();
}

void update_setpoint(SurpriseState& st, const Vec& latent) {
  st.mu = st.rho_mu * st.mu + (1.0 - st.rho_mu) * latent;
}

double beta_at(int episode, const SurpriseState& st) {
  double progress = static_cast<double>(episode) / st.total_episodes;
  progress = std::clamp(progress, 0.0, 1.0);
  return st.beta0 * (1.0 - std::pow(progress, 1.2));
}

double shape_reward(double r, double dev, double beta_t, SurpriseState& st) {
  st.reward_mag_ema = st.rho_r * st.reward_mag_ema + (1.0 - st.rho_r) * std::abs(r);
  const double bonus = -beta_t * dev;
  return r / std::max(st.reward_mag_ema, st.norm_eps) + st.lambda * bonus;
}

DisrcAgent::DisrcAgent(int obs_dim, int num_actions, DisrcConfig cfg,
                       int total_episodes, std::uint64_t q_init_seed,
                       std::uint64_t encoder_init_seed)
    : cfg_(cfg), base_(obs_dim, num_actions, cfg.dqn, q_init_seed) {
  encoder_ = init_mlp({obs_dim, 256, 128, kLatentDim}, encoder_init_seed);
  encoder_opt_ = make_adam(encoder_, cfg.encoder_lr);
  decoder_ = init_mlp({kLatentDim, obs_dim}, derive_seed(encoder_init_seed, 1));
  decoder_opt_ = make_adam(decoder_, cfg.encoder_lr);
  surprise_.rho_mu = cfg.rho_mu;
  surprise_.rho_r = cfg.rho_r;
  surprise_.beta0 = cfg.beta0;
  surprise_.lambda = cfg.lambda;
  surprise_.total_episodes = std::max(total_episodes, 1);
}

Vec DisrcAgent::encode(std::span<const double> obs) const {
  return forward1(encoder_, Eigen::Map<const Vec>(
                                obs.data(), static_cast<Eigen::Index>(obs.size())));
}

DisrcAgent::CollectResult DisrcAgent::collect_step(GridState& env,
                                                   const Observation& obs,
                                                   int episode, Rng& rng) {
  const double eps =
      epsilon_at(episode - 1, surprise_.total_episodes, base_.config());
  const int action = base_.select_action(obs, eps, rng);
  StepResult sr = step(env, static_cast<Action>(action));

  const Vec latent = encode(sr.obs);
  const double dev = deviation(latent, surprise_.mu, surprise_.norm_eps);
  update_setpoint(surprise_, latent);
  const double beta = beta_at(episode, surprise_);
  const double shaped = shape_reward(sr.reward, dev, beta, surprise_);

  CollectResult out;
  out.raw_reward = sr.reward;
  out.shaped_reward = shaped;
  out.deviation = dev;
  out.beta = beta;
  out.bonus = -beta * dev;
  out.terminated = sr.terminated;
  out.truncated = sr.truncated;

  Transition t;
  t.obs = obs;
  t.action = action;
  t.reward = cfg_.modulation == Modulation::RewardShaping ? shaped : sr.reward;
  t.next_obs = std::move(sr.obs);
  t.done = sr.terminated;
  t.deviation = dev;
  out.transition = std::move(t);
  return out;
}

std::optional<double> DisrcAgent::train_step(ReplayBuffer& buffer, Rng& rng,
                                             int episode) {
  auto batch =
      buffer.sample(static_cast<std::size_t>(base_.config().batch_size), rng);
  if (!batch) return std::nullopt;

  double loss;
  if (cfg_.modulation == Modulation::UpdateScaling) {
    const double beta = beta_at(episode, surprise_);
    Vec weights(batch->size());
    for (std::size_t i = 0; i < batch->size(); ++i)
      weights(static_cast<Eigen::Index>(i)) =
          1.0 + cfg_.lambda * beta * (*batch)[i]->deviation;
    loss = base_.train_on_batch(*batch, &weights);
  } else {
    loss = base_.train_on_batch(*batch);
  }

  if (cfg_.encoder_mode == EncoderMode::Reconstruction) reconstruction_step(*batch);
  return loss;
}

void DisrcAgent::reconstruction_step(const std::vector<const Transition*>& batch) {
  const int n = static_cast<int>(batch.size());
  const int d = base_.obs_dim();
  Mat x(d, n);
  for (int i = 0; i < n; ++i)
    x.col(i) = Eigen::Map<const Vec>(batch[i]->obs.data(), d);

  ForwardCache enc_cache, dec_cache;
  const Mat z = forward(encoder_, x, &enc_cache);
  const Mat xhat = forward(decoder_, z, &dec_cache);

  // mean squared error over every component of the batch
  const Mat diff = xhat - x;
  const double denom = static_cast<double>(d) * n;
  const Mat d_xhat = 2.0 * diff / denom;

  Mat d_z;
  Grads dec_grads = backward(decoder_, dec_cache, d_xhat, &d_z);
  Grads enc_grads = backward(encoder_, enc_cache, d_z);
  adam_step(decoder_, dec_grads, decoder_opt_);
  adam_step(encoder_, enc_grads, encoder_opt_);
}

}  // namespace disrc

#include "disrc/agent_dqn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace disrc {

double epsilon_at(int episode, int total_episodes, const DqnConfig& cfg) {
  const double decay_span = cfg.eps_decay_fraction * total_episodes;
  if (decay_span <= 0.0 || episode >= decay_span) return cfg.eps_min;
  return cfg.eps_start + (cfg.eps_min - cfg.eps_start) * (episode / decay_span);
}

namespace {

int argmax_lowest(const Vec& q) {
  int best = 0;
  for (int i = 1; i < q.size(); ++i)
    if (q(i) > q(best)) best = i;
  return best;
}

int argmax_col(const Mat& q, int col) {
  int best = 0;
  for (int i = 1; i < q.rows(); ++i)
    if (q(i, col) > q(best, col)) best = i;
  return best;
}

}  // namespace

DqnAgent::DqnAgent(int obs_dim, int num_actions, DqnConfig cfg, std::uint64_t init_seed)
    : cfg_(cfg), obs_dim_(obs_dim), num_actions_(num_actions) {
  if (obs_dim <= 0 || num_actions <= 0)
    throw std::invalid_argument("DqnAgent: dimensions must be positive");
  const std::vector<int> dims{obs_dim, cfg.hidden_dims[0], cfg.hidden_dims[1],
                              num_actions};
  q_net_ = init_mlp(dims, init_seed);
  target_net_ = q_net_;
  opt_ = make_adam(q_net_, cfg.q_lr);
}

int DqnAgent::select_action(std::span<const double> obs, double epsilon,
                            Rng& rng) const {
  const double coin = rng.uniform();
  if (coin < epsilon) return rng.below_int(num_actions_);
  const Vec q = forward1(
      q_net_, Eigen::Map<const Vec>(obs.data(), static_cast<Eigen::Index>(obs.size())));
  return argmax_lowest(q);
}

Vec DqnAgent::compute_targets(const std::vector<const Transition*>& batch) const {
  if (batch.empty()) throw std::invalid_argument("compute_targets: empty batch");
  const int n = static_cast<int>(batch.size());
  Mat next(obs_dim_, n);
  for (int i = 0; i < n; ++i)
    next.col(i) = Eigen::Map<const Vec>(batch[i]->next_obs.data(), obs_dim_);

  const Mat q_target_next = forward(target_net_, next);
  Mat q_online_next;
  if (cfg_.target_rule == TargetRule::Double) q_online_next = forward(q_net_, next);

  Vec y(n);
  for (int i = 0; i < n; ++i) {
    double bootstrap = 0.0;
    if (!batch[i]->done) {
      const int a = cfg_.target_rule == TargetRule::Double
                        ? argmax_col(q_online_next, i)
                        : argmax_col(q_target_next, i);
      bootstrap = q_target_next(a, i);
    }
    y(i) = batch[i]->reward + cfg_.gamma * bootstrap;
  }
  return y;
}

std::optional<double> DqnAgent::train_step(ReplayBuffer& buffer, Rng& rng) {
  auto batch = buffer.sample(static_cast<std::size_t>(cfg_.batch_size), rng);
  if (!batch) return std::nullopt;
  return train_on_batch(*batch);
}

double DqnAgent::train_on_batch(const std::vector<const Transition*>& batch,
                                const Vec* weights) {
  const int n = static_cast<int>(batch.size());
  if (n == 0) throw std::invalid_argument("train_on_batch: empty batch");
  if (weights && weights->size() != n)
    throw std::invalid_argument("train_on_batch: weight count mismatch");

  Mat x(obs_dim_, n);
  for (int i = 0; i < n; ++i)
    x.col(i) = Eigen::Map<const Vec>(batch[i]->obs.data(), obs_dim_);

  const Vec y = compute_targets(batch);

  ForwardCache cache;
  const Mat q = forward(q_net_, x, &cache);

  double loss = 0.0;
  Mat dq = Mat::Zero(num_actions_, n);
  for (int i = 0; i < n; ++i) {
    const int a = batch[i]->action;
    if (a < 0 || a >= num_actions_)
      throw std::invalid_argument("train_on_batch: action out of range");
    const double w = weights ? (*weights)(i) : 1.0;
    const double td = q(a, i) - y(i);
    loss += w * td * td;
    dq(a, i) = 2.0 * w * td / n;
  }
  loss /= n;
  if (!std::isfinite(loss))
    throw std::runtime_error("train_on_batch: non-finite TD loss (" +
                             std::to_string(loss) + "); aborting run");

  Grads grads = backward(q_net_, cache, dq);
  clip_grad_norm(grads, cfg_.grad_clip_max_norm);
  adam_step(q_net_, grads, opt_);
  return loss;
}

void DqnAgent::soft_update() { polyak_update(target_net_, q_net_, cfg_.tau); }

void DqnAgent::set_q_net(Mlp net) {
  if (net.in_dim() != obs_dim_ || net.out_dim() != num_actions_)
    throw std::invalid_argument("set_q_net: shape does not match the agent");
  q_net_ = std::move(net);
  opt_ = make_adam(q_net_, cfg_.q_lr);
}

void DqnAgent::set_target_net(Mlp net) {
  if (net.in_dim() != obs_dim_ || net.out_dim() != num_actions_)
    throw std::invalid_argument("set_target_net: shape does not match the agent");
  target_net_ = std::move(net);
}

}  // namespace disrc

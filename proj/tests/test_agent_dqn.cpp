#include <doctest.h>

#include <cmath>
#include <vector>

#include "disrc/agent_dqn.hpp"

using namespace disrc;

namespace {

// replaces the agent's Q-network with one that always outputs `q`
void set_constant_q(DqnAgent& agent, const Vec& q) {
  Mlp net;
  net.dims = {agent.obs_dim(), agent.num_actions()};
  net.layers.emplace_back(DenseLayer{Mat::Zero(q.size(), agent.obs_dim()), q});
  agent.set_q_net(net);
  agent.set_target_net(net);
}

Transition make_transition(const std::vector<double>& obs, int action, double reward,
                           const std::vector<double>& next, bool done) {
  Transition t;
  t.obs = obs;
  t.action = action;
  t.reward = reward;
  t.next_obs = next;
  t.done = done;
  return t;
}

double q_value(const DqnAgent& agent, const std::vector<double>& obs, int action) {
  return forward1(agent.q_net(),
                  Eigen::Map<const Vec>(obs.data(), (Eigen::Index)obs.size()))(action);
}

}  // namespace

TEST_SUITE("agent_dqn") {

TEST_CASE("epsilon schedule endpoints and midpoint") {
  DqnConfig cfg;
  CHECK(epsilon_at(0, 700, cfg) == doctest::Approx(1.0));
  CHECK(epsilon_at(560, 700, cfg) == doctest::Approx(0.1));
  CHECK(epsilon_at(699, 700, cfg) == doctest::Approx(0.1));
  // linear interpolation: 1 - 0.9 * 280/560
  CHECK(epsilon_at(280, 700, cfg) == doctest::Approx(0.55));
  // never rises after the decay window
  double prev = 2.0;
  for (int ep = 0; ep < 700; ++ep) {
    const double e = epsilon_at(ep, 700, cfg);
    CHECK(e <= prev + 1e-15);
    prev = e;
  }
}

TEST_CASE("greedy selection takes the argmax, ties to the lowest index") {
  DqnConfig cfg;
  cfg.hidden_dims = {8, 8};
  DqnAgent agent(4, 7, cfg, 1);
  Rng rng(2);
  const std::vector<double> obs{0.1, 0.2, 0.3, 0.4};

  Vec q = Vec::Zero(7);
  q(2) = 5.0;
  set_constant_q(agent, q);
  CHECK(agent.select_action(obs, 0.0, rng) == 2);

  set_constant_q(agent, Vec::Zero(7));
  CHECK(agent.select_action(obs, 0.0, rng) == 0);
}

TEST_CASE("greedy selection with epsilon 0 is a pure function") {
  DqnConfig cfg;
  cfg.hidden_dims = {8, 8};
  DqnAgent agent(4, 7, cfg, 3);
  const std::vector<double> obs{0.4, 0.3, 0.2, 0.1};
  Rng r1(10), r2(99999);
  CHECK(agent.select_action(obs, 0.0, r1) == agent.select_action(obs, 0.0, r2));
}

TEST_CASE("select_action consumes a documented number of draws") {
  DqnConfig cfg;
  cfg.hidden_dims = {8, 8};
  DqnAgent agent(4, 7, cfg, 3);
  const std::vector<double> obs{0.4, 0.3, 0.2, 0.1};
  // exploit path: exactly one coin draw
  Rng a(5), b(5);
  b.next_u64();
  agent.select_action(obs, 0.0, a);
  CHECK(a.next_u64() == b.next_u64());
  // explore path: coin plus action draw
  Rng c(5), d(5);
  d.next_u64();
  d.next_u64();
  agent.select_action(obs, 1.0, c);
  CHECK(c.next_u64() == d.next_u64());
}

TEST_CASE("full exploration is statistically uniform over the 7 actions") {
  DqnConfig cfg;
  cfg.hidden_dims = {8, 8};
  DqnAgent agent(4, 7, cfg, 4);
  Rng rng(31415);
  const std::vector<double> obs{0.0, 0.0, 0.0, 0.0};
  std::vector<int> counts(7, 0);
  const int n = 7000;
  for (int i = 0; i < n; ++i) counts[agent.select_action(obs, 1.0, rng)]++;
  const double expected = n / 7.0;
  const double sigma = std::sqrt(n * (1.0 / 7.0) * (6.0 / 7.0));
  for (int c : counts) CHECK(std::abs(c - expected) <= 4.0 * sigma);
}

TEST_CASE("targets: terminal transitions pass the reward through") {
  DqnConfig cfg;
  cfg.hidden_dims = {8, 8};
  DqnAgent agent(2, 3, cfg, 5);
  const auto t = make_transition({0.1, 0.2}, 1, 0.73, {0.3, 0.4}, true);
  const Vec y = agent.compute_targets({&t});
  CHECK(y(0) == 0.73);  // exactly, gamma masked by done

  // and the value is independent of both networks
  Vec q = Vec::Constant(3, 123.0);
  set_constant_q(agent, q);
  CHECK(agent.compute_targets({&t})(0) == 0.73);
}

TEST_CASE("targets: gamma 0 is the myopic limit") {
  DqnConfig cfg;
  cfg.gamma = 0.0;
  cfg.hidden_dims = {8, 8};
  DqnAgent agent(2, 3, cfg, 5);
  const auto t = make_transition({0.1, 0.2}, 0, 0.25, {0.3, 0.4}, false);
  CHECK(agent.compute_targets({&t})(0) == doctest::Approx(0.25));
}

TEST_CASE("targets: online argmax evaluated under the target net") {
  DqnConfig cfg;
  cfg.hidden_dims = {8, 8};
  cfg.gamma = 0.99;
  DqnAgent agent(2, 3, cfg, 5);

  // online net prefers action 2; target net values action 2 at 1.0 but
  // action 0 at 9.0 -- the double rule must pick 1.0
  Mlp online;
  online.dims = {2, 3};
  Vec qb(3);
  qb << 0.0, 0.5, 2.0;
  online.layers.emplace_back(DenseLayer{Mat::Zero(3, 2), qb});
  Mlp target;
  target.dims = {2, 3};
  Vec tb(3);
  tb << 9.0, 0.0, 1.0;
  target.layers.emplace_back(DenseLayer{Mat::Zero(3, 2), tb});
  agent.set_q_net(online);
  agent.set_target_net(target);

  const auto t = make_transition({0.1, 0.2}, 0, 0.0, {0.3, 0.4}, false);
  CHECK(agent.compute_targets({&t})(0) == doctest::Approx(0.99 * 1.0));

  // the vanilla rule takes the target net's own max instead
  DqnConfig vcfg = cfg;
  vcfg.target_rule = TargetRule::Vanilla;
  DqnAgent vagent(2, 3, vcfg, 5);
  vagent.set_q_net(online);
  vagent.set_target_net(target);
  CHECK(vagent.compute_targets({&t})(0) == doctest::Approx(0.99 * 9.0));
}

TEST_CASE("train_step skips until the buffer is warm") {
  DqnConfig cfg;
  cfg.hidden_dims = {8, 8};
  cfg.batch_size = 16;
  DqnAgent agent(2, 3, cfg, 6);
  ReplayBuffer buf(100);
  Rng rng(7);
  for (int i = 0; i < 15; ++i)
    buf.push(make_transition({0.1, 0.2}, 0, 0.0, {0.1, 0.2}, false));
  CHECK_FALSE(agent.train_step(buf, rng).has_value());
  buf.push(make_transition({0.1, 0.2}, 0, 0.0, {0.1, 0.2}, false));
  CHECK(agent.train_step(buf, rng).has_value());
}

TEST_CASE("a batch already at the target has zero loss and moves nothing") {
  DqnConfig cfg;
  cfg.hidden_dims = {8, 8};
  cfg.batch_size = 4;
  DqnAgent agent(2, 3, cfg, 8);
  Vec q(3);
  q << 0.2, -0.4, 0.9;
  set_constant_q(agent, q);
  const Mlp before = agent.q_net();

  ReplayBuffer buf(16);
  Rng rng(9);
  for (int i = 0; i < 8; ++i)
    buf.push(make_transition({0.1, 0.2}, i % 3, q(i % 3), {0.3, 0.1}, true));
  const auto loss = agent.train_step(buf, rng);
  REQUIRE(loss.has_value());
  CHECK(*loss == 0.0);
  const auto& w_before = std::get<DenseLayer>(before.layers[0]).w;
  const auto& w_after = std::get<DenseLayer>(agent.q_net().layers[0]).w;
  CHECK((w_before - w_after).norm() == 0.0);
}

TEST_CASE("weighted squared TD errors average per the update-scaling rule") {
  DqnConfig cfg;
  cfg.hidden_dims = {8, 8};
  DqnAgent agent(2, 2, cfg, 10);
  set_constant_q(agent, Vec::Zero(2));
  // two terminal samples with reward 1 -> TD errors (1, 1)
  const auto t1 = make_transition({0.1, 0.2}, 0, 1.0, {0.0, 0.0}, true);
  const auto t2 = make_transition({0.5, 0.6}, 1, 1.0, {0.0, 0.0}, true);
  Vec w(2);
  w << 1.0, 2.0;
  const double loss = agent.train_on_batch({&t1, &t2}, &w);
  CHECK(loss == doctest::Approx(1.5));
}

TEST_CASE("single-transition toy MDP converges to Q = r") {
  DqnConfig cfg;
  cfg.hidden_dims = {16, 16};
  cfg.batch_size = 8;
  cfg.q_lr = 1e-2;
  cfg.grad_clip_max_norm = 10.0;
  DqnAgent agent(3, 1, cfg, 11);
  ReplayBuffer buf(16);
  Rng rng(12);
  const std::vector<double> s0{0.2, 0.8, 0.5};
  for (int i = 0; i < 8; ++i) buf.push(make_transition(s0, 0, 1.0, s0, true));

  std::vector<double> checkpoints;
  for (int it = 1; it <= 2000; ++it) {
    const auto loss = agent.train_step(buf, rng);
    REQUIRE(loss.has_value());
    agent.soft_update();
    if (it % 500 == 0) checkpoints.push_back(*loss);
  }
  CHECK(q_value(agent, s0, 0) == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(checkpoints.back() < 1e-4);
  // loss shrinks monotonically across the sampled checkpoints after transient
  for (std::size_t i = 1; i < checkpoints.size(); ++i)
    CHECK(checkpoints[i] <= checkpoints[i - 1]);
}

TEST_CASE("soft update formula and fixed point") {
  DqnConfig cfg;
  cfg.hidden_dims = {8, 8};
  cfg.tau = 0.005;
  DqnAgent agent(2, 2, cfg, 13);

  Mlp online;
  online.dims = {2, 2};
  online.layers.emplace_back(DenseLayer{Mat::Zero(2, 2), Vec::Ones(2)});
  Mlp target;
  target.dims = {2, 2};
  target.layers.emplace_back(DenseLayer{Mat::Zero(2, 2), Vec::Zero(2)});
  agent.set_q_net(online);
  agent.set_target_net(target);

  agent.soft_update();
  CHECK(std::get<DenseLayer>(agent.target_net().layers[0]).b(0) ==
        doctest::Approx(0.005));

  agent.set_target_net(agent.q_net());
  agent.soft_update();
  CHECK(std::get<DenseLayer>(agent.target_net().layers[0]).b(0) == 1.0);
}

TEST_CASE("the optimizer never touches the target network") {
  DqnConfig cfg;
  cfg.hidden_dims = {8, 8};
  cfg.batch_size = 4;
  DqnAgent agent(2, 3, cfg, 14);
  const Mlp target_before = agent.target_net();
  ReplayBuffer buf(16);
  Rng rng(15);
  for (int i = 0; i < 8; ++i)
    buf.push(make_transition({0.3, 0.7}, i % 3, 0.5, {0.2, 0.1}, i % 2 == 0));
  for (int i = 0; i < 25; ++i) REQUIRE(agent.train_step(buf, rng).has_value());
  for (std::size_t li = 0; li < target_before.layers.size(); ++li)
    if (const auto* d = std::get_if<DenseLayer>(&target_before.layers[li])) {
      const auto& after = std::get<DenseLayer>(agent.target_net().layers[li]);
      CHECK((d->w - after.w).norm() == 0.0);
      CHECK((d->b - after.b).norm() == 0.0);
    }
}

}  // TEST_SUITE

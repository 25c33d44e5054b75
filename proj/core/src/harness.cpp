#include "disrc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "disrc/agent_disrc.hpp"
#include "disrc/agent_dqn.hpp"
#include "disrc/gridworld.hpp"
#include "disrc/nn.hpp"
#include "disrc/replay.hpp"
#include "disrc/rng.hpp"

namespace disrc {

namespace {

namespace fs = std::filesystem;

// substream tags; the q-network stream is shared by both agents so that a
// degenerate surprise agent replays the baseline bit for bit, while the
// encoder draws from its own stream
constexpr std::uint64_t kQInitStream = 0x51;
constexpr std::uint64_t kEncoderInitStream = 0x5e;
constexpr std::uint64_t kRunStream = 0xa1;

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string summary_to_text(const RunSummary& s) {
  std::ostringstream os;
  os << "agent=" << s.agent << '\n';
  os << "env=" << s.env << '\n';
  os << "seed=" << s.seed << '\n';
  os << "total_episodes=" << s.total_episodes << '\n';
  os << "mean_final_reward=" << fmt_real(s.mean_final_reward) << '\n';
  os << "episodes_to_threshold="
     << (s.episodes_to_threshold ? std::to_string(*s.episodes_to_threshold) : "none")
     << '\n';
  os << "loss_variance=" << (s.loss_variance ? fmt_real(*s.loss_variance) : "none")
     << '\n';
  os << "reward_std=" << fmt_real(s.reward_std) << '\n';
  os << "auc=" << (s.auc ? fmt_real(*s.auc) : "none") << '\n';
  return os.str();
}

TrainResult train(const RunConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  const int total = cfg.episodes();
  const fs::path out_dir = cfg.resolved_out_dir();
  fs::create_directories(out_dir);

  {
    std::ofstream cf(out_dir / "config.txt");
    if (!cf) throw std::runtime_error("train: cannot write " + (out_dir / "config.txt").string());
    cf << "# effective run configuration\n# generated " << timestamp_utc() << "\n"
       << echo_config(cfg);
  }

  Rng run_rng(derive_seed(cfg.seed, kRunStream));
  const std::uint64_t q_seed = derive_seed(cfg.seed, kQInitStream);
  const std::uint64_t enc_seed = derive_seed(cfg.seed, kEncoderInitStream);

  std::optional<DqnAgent> dqn;
  std::optional<DisrcAgent> disrc;
  if (cfg.agent == AgentKind::Dqn)
    dqn.emplace(kObsDim, kNumActions, cfg.dqn_resolved(), q_seed);
  else
    disrc.emplace(kObsDim, kNumActions, cfg.disrc_resolved(), total, q_seed, enc_seed);

  ReplayBuffer buffer(cfg.params.dqn.replay_capacity);

  TrainResult result;
  result.episodes.reserve(total);
  if (disrc) result.surprise.emplace();

  std::ofstream csv(out_dir / "episodes.csv");
  if (!csv) throw std::runtime_error("train: cannot write episodes.csv");
  csv << "episode,raw_reward,shaped_reward_sum,steps,mean_loss,epsilon\n";

  for (int ep = 0; ep < total; ++ep) {
    GridState env = reset_env(cfg.env, cfg.seed ^ static_cast<std::uint64_t>(ep));
    Observation obs = observe(env);
    const double eps = epsilon_at(ep, total, cfg.dqn_resolved());

    if (opts.render && opts.log) *opts.log << render_ascii(env) << '\n';

    double raw_sum = 0.0, shaped_sum = 0.0;
    double loss_sum = 0.0;
    int loss_count = 0;
    int steps = 0;

    while (!env.done()) {
      std::optional<double> loss;
      if (dqn) {
        const int a = dqn->select_action(obs, eps, run_rng);
        StepResult sr = step(env, static_cast<Action>(a));
        raw_sum += sr.reward;
        shaped_sum += sr.reward;
        Transition t;
        t.obs = std::move(obs);
        t.action = a;
        t.reward = sr.reward;
        t.next_obs = sr.obs;
        t.done = sr.terminated;
        buffer.push(std::move(t));
        obs = std::move(sr.obs);
        loss = dqn->train_step(buffer, run_rng);
        if (loss) dqn->soft_update();
      } else {
        auto cr = disrc->collect_step(env, obs, ep + 1, run_rng);
        raw_sum += cr.raw_reward;
        shaped_sum += cr.shaped_reward;
        obs = cr.transition.next_obs;
        buffer.push(std::move(cr.transition));
        loss = disrc->train_step(buffer, run_rng, ep + 1);
        if (loss) disrc->soft_update();
        auto& tele = *result.surprise;
        tele.max_bonus = std::max(tele.max_bonus, cr.bonus);
        tele.min_deviation = std::min(tele.min_deviation, cr.deviation);
        tele.max_deviation = std::max(tele.max_deviation, cr.deviation);
        if (env.done()) tele.episode_beta.push_back(cr.beta);
      }
      if (loss) {
        loss_sum += *loss;
        ++loss_count;
        result.step_losses.push_back(*loss);
      }
      ++steps;
    }

    EpisodeRecord rec;
    rec.episode = ep + 1;
    rec.raw_reward = raw_sum;
    rec.shaped_reward_sum = shaped_sum;
    rec.steps = steps;
    if (loss_count > 0) rec.mean_loss = loss_sum / loss_count;
    rec.epsilon = eps;
    result.episodes.push_back(rec);

    csv << rec.episode << ',' << fmt_real(rec.raw_reward) << ','
        << fmt_real(rec.shaped_reward_sum) << ',' << rec.steps << ','
        << (rec.mean_loss ? fmt_real(*rec.mean_loss) : "") << ','
        << fmt_real(rec.epsilon) << '\n';
    csv.flush();

    if (opts.log && opts.log_every > 0 &&
        ((ep + 1) % opts.log_every == 0 || ep + 1 == total)) {
      *opts.log << "episode " << (ep + 1) << '/' << total
                << "  reward=" << rec.raw_reward << "  steps=" << rec.steps
                << "  eps=" << rec.epsilon << '\n';
    }
  }

  std::vector<double> rewards;
  rewards.reserve(result.episodes.size());
  for (const auto& e : result.episodes) rewards.push_back(e.raw_reward);

  RunSummary& s = result.summary;
  s.mean_final_reward = mean_final_reward(rewards, 50);
  s.episodes_to_threshold = episodes_to_threshold(rewards, 0.8);
  if (!result.step_losses.empty()) s.loss_variance = loss_variance(result.step_losses);
  s.reward_std = reward_std(rewards);
  if (rewards.size() >= 2) s.auc = auc(rewards);
  s.seed = cfg.seed;
  s.agent = to_string(cfg.agent);
  s.env = to_string(cfg.env);
  s.total_episodes = total;

  {
    std::ofstream sf(out_dir / "summary.txt");
    if (!sf) throw std::runtime_error("train: cannot write summary.txt");
    sf << summary_to_text(s);
  }

  if (cfg.save_checkpoints) {
    if (dqn) {
      save_mlp(dqn->q_net(), (out_dir / "q_net.ckpt").string());
    } else {
      save_mlp(disrc->base().q_net(), (out_dir / "q_net.ckpt").string());
      save_mlp(disrc->encoder(), (out_dir / "encoder.ckpt").string());
    }
  }
  return result;
}

namespace {

struct RunTask {
  RunConfig cfg;
  CompareRow* row;
};

void execute_runs(std::vector<RunTask>& tasks, int jobs, std::ostream* log) {
  if (jobs <= 0)
    jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));

  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      auto& t = tasks[i];
      try {
        TrainResult r = train(t.cfg);
        t.row->summary = std::move(r.summary);
      } catch (const std::exception& e) {
        t.row->failed = true;
        t.row->error = e.what();
      }
      if (log) {
        std::lock_guard lk(log_mu);
        *log << "run " << t.row->agent << " seed=" << t.row->seed
             << (t.row->failed ? " FAILED: " + t.row->error : " done") << '\n';
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

std::string opt_int_str(const std::optional<int>& v) {
  return v ? std::to_string(*v) : "none";
}
std::string opt_real_str(const std::optional<double>& v) {
  return v ? fmt_real(*v) : "none";
}

// median over per-seed values; nones sort as +inf and poison the median
std::optional<double> median_opt(std::vector<std::optional<double>> vals) {
  if (vals.empty()) return std::nullopt;
  auto key = [](const std::optional<double>& v) {
    return v ? *v : std::numeric_limits<double>::infinity();
  };
  std::sort(vals.begin(), vals.end(),
            [&](const auto& a, const auto& b) { return key(a) < key(b); });
  const std::size_t n = vals.size();
  if (n % 2 == 1) return vals[n / 2];
  const auto &lo = vals[n / 2 - 1], &hi = vals[n / 2];
  if (!lo || !hi) return std::nullopt;
  return 0.5 * (*lo + *hi);
}

struct MedianSummary {
  std::optional<double> mean_final, ep_to_thr, loss_var, reward_std_v, auc_v;
};

MedianSummary medians(const std::vector<CompareRow>& rows) {
  std::vector<std::optional<double>> mf, et, lv, rs, au;
  for (const auto& r : rows) {
    if (r.failed) continue;
    mf.push_back(r.summary.mean_final_reward);
    et.push_back(r.summary.episodes_to_threshold
                     ? std::optional<double>(*r.summary.episodes_to_threshold)
                     : std::nullopt);
    lv.push_back(r.summary.loss_variance);
    rs.push_back(r.summary.reward_std);
    au.push_back(r.summary.auc);
  }
  return {median_opt(mf), median_opt(et), median_opt(lv), median_opt(rs),
          median_opt(au)};
}

std::vector<std::string> row_cells(const CompareRow& r) {
  if (r.failed)
    return {r.agent, std::to_string(r.seed), "failed", "-", "-", "-", "-", "failed"};
  const RunSummary& s = r.summary;
  return {r.agent,
          std::to_string(r.seed),
          fmt_real(s.mean_final_reward),
          opt_int_str(s.episodes_to_threshold),
          opt_real_str(s.loss_variance),
          fmt_real(s.reward_std),
          opt_real_str(s.auc),
          "ok"};
}

std::vector<std::string> median_cells(const std::string& agent, const MedianSummary& m) {
  return {agent,
          "median",
          opt_real_str(m.mean_final),
          opt_real_str(m.ep_to_thr),
          opt_real_str(m.loss_var),
          opt_real_str(m.reward_std_v),
          opt_real_str(m.auc_v),
          "ok"};
}

const std::vector<std::string> kCompareHeader = {
    "agent", "seed", "mean_final", "ep_to_thr", "loss_var",
    "reward_std", "auc", "status"};

std::string to_csv(const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << row[i] << (i + 1 < row.size() ? "," : "");
    os << '\n';
  }
  return os.str();
}

std::string to_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t i = 0; i < row.size(); ++i)
      widths[i] = std::max(widths[i], row[i].size());
  }
  std::ostringstream os;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << row[i];
      if (i + 1 < row.size())
        os << std::string(widths[i] - row[i].size() + 2, ' ');
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace

CompareReport compare(const RunConfig& config_a, const RunConfig& config_b,
                      const std::vector<std::uint64_t>& seeds,
                      const std::string& out_dir, int jobs, std::ostream* log) {
  if (seeds.empty()) throw std::invalid_argument("compare: need at least one seed");
  fs::create_directories(out_dir);

  CompareReport report;
  report.rows_a.resize(seeds.size());
  report.rows_b.resize(seeds.size());

  std::vector<RunTask> tasks;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (int side = 0; side < 2; ++side) {
      RunConfig rc = side == 0 ? config_a : config_b;
      CompareRow* row = side == 0 ? &report.rows_a[i] : &report.rows_b[i];
      rc.seed = seeds[i];
      rc.out_dir = (fs::path(out_dir) /
                    (std::string(side == 0 ? "a_" : "b_") + to_string(rc.agent) +
                     "_seed" + std::to_string(seeds[i])))
                       .string();
      row->agent = to_string(rc.agent);
      row->seed = seeds[i];
      tasks.push_back({std::move(rc), row});
    }
  }
  execute_runs(tasks, jobs, log);

  std::vector<std::vector<std::string>> cells{kCompareHeader};
  for (const auto& r : report.rows_a) cells.push_back(row_cells(r));
  cells.push_back(median_cells(report.rows_a.front().agent, medians(report.rows_a)));
  for (const auto& r : report.rows_b) cells.push_back(row_cells(r));
  cells.push_back(median_cells(report.rows_b.front().agent, medians(report.rows_b)));

  report.csv = to_csv(cells);
  report.table = to_table(cells);

  std::ofstream(fs::path(out_dir) / "compare.csv") << report.csv;
  std::ofstream(fs::path(out_dir) / "compare.txt") << report.table;
  return report;
}

std::vector<SweepCell> sweep(const RunConfig& base,
                             const std::vector<double>& beta0_grid,
                             const std::vector<double>& lambda_grid,
                             const std::vector<std::uint64_t>& seeds,
                             const std::string& out_dir, int jobs,
                             std::ostream* log) {
  if (beta0_grid.empty() || lambda_grid.empty())
    throw std::invalid_argument("sweep: empty grid");
  if (seeds.empty()) throw std::invalid_argument("sweep: need at least one seed");
  fs::create_directories(out_dir);

  std::vector<std::pair<double, double>> points;
  for (double b : beta0_grid)
    for (double l : lambda_grid) {
      const std::pair<double, double> p{b, l};
      if (std::find(points.begin(), points.end(), p) != points.end()) {
        if (log)
          *log << "sweep: duplicate grid point (beta0=" << b << ", lambda=" << l
               << ") dropped\n";
        continue;
      }
      points.push_back(p);
    }

  std::vector<SweepCell> cells(points.size() * seeds.size());
  std::vector<CompareRow> rows(cells.size());
  std::vector<RunTask> tasks;
  std::size_t idx = 0;
  for (const auto& [b, l] : points) {
    for (std::uint64_t seed : seeds) {
      RunConfig rc = base;
      rc.params.beta0 = b;
      rc.params.lambda = l;
      rc.seed = seed;
      char dirname[96];
      std::snprintf(dirname, sizeof(dirname), "beta%g_lambda%g_seed%llu", b, l,
                    static_cast<unsigned long long>(seed));
      rc.out_dir = (fs::path(out_dir) / dirname).string();
      cells[idx].beta0 = b;
      cells[idx].lambda = l;
      cells[idx].seed = seed;
      rows[idx].agent = to_string(rc.agent);
      rows[idx].seed = seed;
      tasks.push_back({std::move(rc), &rows[idx]});
      ++idx;
    }
  }
  execute_runs(tasks, jobs, log);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i].failed = rows[i].failed;
    cells[i].error = rows[i].error;
    cells[i].summary = rows[i].summary;
  }

  std::ostringstream csv;
  csv << "beta0,lambda,seed,mean_final,ep_to_thr,loss_var,reward_std,auc,status\n";
  for (const auto& c : cells) {
    csv << fmt_real(c.beta0) << ',' << fmt_real(c.lambda) << ',' << c.seed << ',';
    if (c.failed) {
      csv << "failed,-,-,-,-,failed\n";
    } else {
      csv << fmt_real(c.summary.mean_final_reward) << ','
          << opt_int_str(c.summary.episodes_to_threshold) << ','
          << opt_real_str(c.summary.loss_variance) << ','
          << fmt_real(c.summary.reward_std) << ',' << opt_real_str(c.summary.auc)
          << ",ok\n";
    }
  }
  std::ofstream(fs::path(out_dir) / "sweep.csv") << csv.str();
  return cells;
}

}  // namespace disrc

// Command line front end: train, compare, sweep and plot subcommands over the
// gridworld training harness.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "disrc/config.hpp"
#include "disrc/harness.hpp"
#include "disrc/plot.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<std::string> agent;
  std::optional<std::string> env;
  std::optional<std::string> out;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--config", ov.config_path, "key=value config file");
  cmd->add_option("--seed", ov.seed, "run seed");
  cmd->add_option("--episodes", ov.episodes, "total episodes");
  cmd->add_option("--agent", ov.agent, "dqn | disrc");
  cmd->add_option("--env", ov.env, "doorkey8 | lavacrossing9");
  cmd->add_option("--out", ov.out, "output directory");
}

disrc::RunConfig build_config(const Overrides& ov) {
  disrc::RunConfig cfg;
  if (!ov.config_path.empty()) cfg = disrc::parse_config_file(ov.config_path);
  if (ov.agent) cfg.agent = disrc::parse_agent(*ov.agent);
  if (ov.env) cfg.env = disrc::parse_env(*ov.env);
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.episodes) cfg.total_episodes = *ov.episodes;
  if (ov.out) cfg.out_dir = *ov.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridworld Q-learning lab: baseline DQN and surprise-regularized DQN"};
  app.require_subcommand(1);

  // train
  Overrides train_ov;
  bool render = false;
  bool save_ckpt = false;
  int log_every = 50;
  auto* train_cmd = app.add_subcommand("train", "run one seeded training run");
  add_override_flags(train_cmd, train_ov);
  train_cmd->add_flag("--render", render, "dump the ASCII grid at each episode reset");
  train_cmd->add_flag("--save-checkpoints", save_ckpt,
                      "write network checkpoints next to the telemetry");
  train_cmd->add_option("--log-every", log_every,
                        "progress line period in episodes (0 = silent)");

  // compare
  Overrides cmp_ov;
  std::string cmp_config_a, cmp_config_b, cmp_seeds = "1,2,3,4,5";
  std::string agent_a = "dqn", agent_b = "disrc";
  int cmp_jobs = 0;
  auto* cmp_cmd =
      app.add_subcommand("compare", "train two configurations across seeds");
  add_override_flags(cmp_cmd, cmp_ov);
  cmp_cmd->add_option("--config-a", cmp_config_a, "side A config file");
  cmp_cmd->add_option("--config-b", cmp_config_b, "side B config file");
  cmp_cmd->add_option("--agent-a", agent_a, "side A agent when no --config-a");
  cmp_cmd->add_option("--agent-b", agent_b, "side B agent when no --config-b");
  cmp_cmd->add_option("--seeds", cmp_seeds, "comma list of seeds");
  cmp_cmd->add_option("--jobs", cmp_jobs, "parallel runs (0 = hardware)");

  // sweep
  Overrides sweep_ov;
  std::string sweep_beta0 = "0,0.1,0.2,0.4", sweep_lambda = "0.5,1.0",
              sweep_seeds = "1,2,3";
  int sweep_jobs = 0;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "grid sweep over beta0 x lambda for disrc");
  add_override_flags(sweep_cmd, sweep_ov);
  sweep_cmd->add_option("--beta0", sweep_beta0, "comma list of beta0 values");
  sweep_cmd->add_option("--lambda", sweep_lambda, "comma list of lambda values");
  sweep_cmd->add_option("--seeds", sweep_seeds, "comma list of seeds");
  sweep_cmd->add_option("--jobs", sweep_jobs, "parallel runs (0 = hardware)");

  // plot
  std::vector<std::string> plot_inputs;
  std::string plot_out = "learning_curves.svg";
  int plot_window = 20;
  auto* plot_cmd = app.add_subcommand("plot", "render learning curves to SVG");
  plot_cmd->add_option("csv", plot_inputs, "episodes.csv files")->required();
  plot_cmd->add_option("--out", plot_out, "output SVG path");
  plot_cmd->add_option("--window", plot_window, "moving-average window");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      disrc::RunConfig cfg = build_config(train_ov);
      cfg.save_checkpoints = cfg.save_checkpoints || save_ckpt;
      disrc::TrainOptions opts;
      opts.render = render;
      opts.log_every = log_every;
      opts.log = &std::cout;
      const disrc::TrainResult result = disrc::train(cfg, opts);
      std::cout << "\nartifacts: " << cfg.resolved_out_dir() << "\n\n"
                << disrc::summary_to_text(result.summary);
    } else if (*cmp_cmd) {
      disrc::RunConfig base = build_config(cmp_ov);
      disrc::RunConfig a = base, b = base;
      if (!cmp_config_a.empty()) a = disrc::parse_config_file(cmp_config_a, a);
      else a.agent = disrc::parse_agent(agent_a);
      if (!cmp_config_b.empty()) b = disrc::parse_config_file(cmp_config_b, b);
      else b.agent = disrc::parse_agent(agent_b);
      const std::string out = cmp_ov.out.value_or("compare_out");
      const auto report = disrc::compare(a, b, disrc::parse_seed_list(cmp_seeds), out,
                                         cmp_jobs, &std::cout);
      std::cout << '\n' << report.table;
      std::cout << "report: " << out << "/compare.csv\n";
    } else if (*sweep_cmd) {
      disrc::RunConfig base = build_config(sweep_ov);
      if (!sweep_ov.agent && sweep_ov.config_path.empty())
        base.agent = disrc::AgentKind::Disrc;
      const std::string out = sweep_ov.out.value_or("sweep_out");
      const auto cells = disrc::sweep(base, disrc::parse_double_list(sweep_beta0),
                                      disrc::parse_double_list(sweep_lambda),
                                      disrc::parse_seed_list(sweep_seeds), out,
                                      sweep_jobs, &std::cout);
      int failed = 0;
      for (const auto& c : cells) failed += c.failed ? 1 : 0;
      std::cout << cells.size() << " runs, " << failed << " failed\n"
                << "report: " << out << "/sweep.csv\n";
    } else if (*plot_cmd) {
      disrc::plot(plot_inputs, plot_out, plot_window);
      std::cout << "wrote " << plot_out << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

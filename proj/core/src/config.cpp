#include "disrc/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace disrc {

std::string to_string(EnvKind env) {
  return env == EnvKind::DoorKey8 ? "doorkey8" : "lavacrossing9";
}

std::string to_string(AgentKind agent) {
  return agent == AgentKind::Dqn ? "dqn" : "disrc";
}

EnvKind parse_env(const std::string& s) {
  if (s == "doorkey8") return EnvKind::DoorKey8;
  if (s == "lavacrossing9") return EnvKind::LavaCrossing9;
  throw std::invalid_argument("config: unknown env '" + s +
                              "' (expected doorkey8 or lavacrossing9)");
}

AgentKind parse_agent(const std::string& s) {
  if (s == "dqn") return AgentKind::Dqn;
  if (s == "disrc") return AgentKind::Disrc;
  throw std::invalid_argument("config: unknown agent '" + s +
                              "' (expected dqn or disrc)");
}

GridState reset_env(EnvKind env, std::uint64_t seed) {
  return env == EnvKind::DoorKey8 ? reset_doorkey(seed, 8)
                                  : reset_lavacrossing(seed, 9, 1);
}

int RunConfig::episodes() const {
  if (total_episodes) return *total_episodes;
  return env == EnvKind::DoorKey8 ? 700 : 1200;
}

double RunConfig::grad_clip() const {
  if (grad_clip_max_norm) return *grad_clip_max_norm;
  return env == EnvKind::DoorKey8 ? 0.3 : 0.2;
}

std::string RunConfig::resolved_out_dir() const {
  if (!out_dir.empty()) return out_dir;
  return "runs/" + to_string(env) + "_" + to_string(agent) + "_seed" +
         std::to_string(seed);
}

DqnConfig RunConfig::dqn_resolved() const {
  DqnConfig c = params.dqn;
  c.grad_clip_max_norm = grad_clip();
  return c;
}

DisrcConfig RunConfig::disrc_resolved() const {
  DisrcConfig c = params;
  c.dqn.grad_clip_max_norm = grad_clip();
  return c;
}

void RunConfig::validate() const {
  const DqnConfig& d = params.dqn;
  if (episodes() < 1) throw std::invalid_argument("config: total_episodes must be >= 1");
  if (!(d.gamma > 0.0 && d.gamma <= 1.0))
    throw std::invalid_argument("config: gamma must be in (0, 1]");
  if (!(d.tau > 0.0 && d.tau <= 1.0))
    throw std::invalid_argument("config: tau must be in (0, 1]");
  if (d.q_lr <= 0.0) throw std::invalid_argument("config: q_lr must be > 0");
  if (d.batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
  if (d.eps_min > d.eps_start)
    throw std::invalid_argument("config: eps_min must be <= eps_start");
  if (!(d.eps_decay_fraction > 0.0 && d.eps_decay_fraction <= 1.0))
    throw std::invalid_argument("config: eps_decay_fraction must be in (0, 1]");
  if (grad_clip() <= 0.0)
    throw std::invalid_argument("config: grad_clip_max_norm must be > 0");
  if (d.hidden_dims[0] < 1 || d.hidden_dims[1] < 1)
    throw std::invalid_argument("config: hidden_dims must be positive");
  if (d.replay_capacity < 1)
    throw std::invalid_argument("config: replay_capacity must be >= 1");
  if (params.beta0 < 0.0) throw std::invalid_argument("config: beta0 must be >= 0");
  if (params.lambda < 0.0) throw std::invalid_argument("config: lambda must be >= 0");
  if (!(params.rho_mu >= 0.0 && params.rho_mu <= 1.0))
    throw std::invalid_argument("config: rho_mu must be in [0, 1]");
  if (!(params.rho_r >= 0.0 && params.rho_r <= 1.0))
    throw std::invalid_argument("config: rho_r must be in [0, 1]");
  if (params.encoder_lr <= 0.0)
    throw std::invalid_argument("config: encoder_lr must be > 0");
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return i;
  } catch (...) {
    throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": '" + v + "'");
}

std::string fmt_double(double d) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  return buf;
}

}  // namespace

void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value) {
  DqnConfig& d = cfg.params.dqn;
  if (key == "env") {
    cfg.env = parse_env(value);
  } else if (key == "agent") {
    cfg.agent = parse_agent(value);
  } else if (key == "seed") {
    try {
      cfg.seed = std::stoull(value);
    } catch (...) {
      throw std::invalid_argument("config: bad seed '" + value + "'");
    }
  } else if (key == "total_episodes") {
    cfg.total_episodes = parse_int(key, value);
  } else if (key == "out_dir") {
    cfg.out_dir = value;
  } else if (key == "save_checkpoints") {
    cfg.save_checkpoints = parse_bool(key, value);
  } else if (key == "gamma") {
    d.gamma = parse_double(key, value);
  } else if (key == "q_lr") {
    d.q_lr = parse_double(key, value);
  } else if (key == "tau") {
    d.tau = parse_double(key, value);
  } else if (key == "batch_size") {
    d.batch_size = parse_int(key, value);
  } else if (key == "eps_start") {
    d.eps_start = parse_double(key, value);
  } else if (key == "eps_min") {
    d.eps_min = parse_double(key, value);
  } else if (key == "eps_decay_fraction") {
    d.eps_decay_fraction = parse_double(key, value);
  } else if (key == "grad_clip_max_norm") {
    cfg.grad_clip_max_norm = parse_double(key, value);
  } else if (key == "hidden_dims") {
    const auto dims = parse_double_list(value);
    if (dims.size() != 2)
      throw std::invalid_argument("config: hidden_dims expects two values");
    d.hidden_dims = {static_cast<int>(dims[0]), static_cast<int>(dims[1])};
  } else if (key == "target_rule") {
    if (value == "double")
      d.target_rule = TargetRule::Double;
    else if (value == "vanilla")
      d.target_rule = TargetRule::Vanilla;
    else
      throw std::invalid_argument("config: target_rule must be double or vanilla");
  } else if (key == "replay_capacity") {
    d.replay_capacity = static_cast<std::size_t>(parse_int(key, value));
  } else if (key == "beta0") {
    cfg.params.beta0 = parse_double(key, value);
  } else if (key == "lambda") {
    cfg.params.lambda = parse_double(key, value);
  } else if (key == "rho_mu") {
    cfg.params.rho_mu = parse_double(key, value);
  } else if (key == "rho_r") {
    cfg.params.rho_r = parse_double(key, value);
  } else if (key == "encoder_lr") {
    cfg.params.encoder_lr = parse_double(key, value);
  } else if (key == "encoder_mode") {
    if (value == "reconstruction")
      cfg.params.encoder_mode = EncoderMode::Reconstruction;
    else if (value == "frozen")
      cfg.params.encoder_mode = EncoderMode::Frozen;
    else
      throw std::invalid_argument(
          "config: encoder_mode must be reconstruction or frozen");
  } else if (key == "modulation") {
    if (value == "reward_shaping")
      cfg.params.modulation = Modulation::RewardShaping;
    else if (value == "update_scaling")
      cfg.params.modulation = Modulation::UpdateScaling;
    else
      throw std::invalid_argument(
          "config: modulation must be reward_shaping or update_scaling");
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

RunConfig parse_config_text(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not key=value: '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " has an empty key or value");
    apply_config_kv(base, key, value);
  }
  return base;
}

RunConfig parse_config_file(const std::string& path, RunConfig base) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

std::string echo_config(const RunConfig& cfg) {
  const DqnConfig d = cfg.dqn_resolved();
  std::ostringstream os;
  os << "env=" << to_string(cfg.env) << '\n';
  os << "agent=" << to_string(cfg.agent) << '\n';
  os << "seed=" << cfg.seed << '\n';
  os << "total_episodes=" << cfg.episodes() << '\n';
  os << "out_dir=" << cfg.resolved_out_dir() << '\n';
  os << "save_checkpoints=" << (cfg.save_checkpoints ? "true" : "false") << '\n';
  os << "gamma=" << fmt_double(d.gamma) << '\n';
  os << "q_lr=" << fmt_double(d.q_lr) << '\n';
  os << "tau=" << fmt_double(d.tau) << '\n';
  os << "batch_size=" << d.batch_size << '\n';
  os << "eps_start=" << fmt_double(d.eps_start) << '\n';
  os << "eps_min=" << fmt_double(d.eps_min) << '\n';
  os << "eps_decay_fraction=" << fmt_double(d.eps_decay_fraction) << '\n';
  os << "grad_clip_max_norm=" << fmt_double(cfg.grad_clip()) << '\n';
  os << "hidden_dims=" << d.hidden_dims[0] << ',' << d.hidden_dims[1] << '\n';
  os << "target_rule=" << (d.target_rule == TargetRule::Double ? "double" : "vanilla")
     << '\n';
  os << "replay_capacity=" << d.replay_capacity << '\n';
  os << "beta0=" << fmt_double(cfg.params.beta0) << '\n';
  os << "lambda=" << fmt_double(cfg.params.lambda) << '\n';
  os << "rho_mu=" << fmt_double(cfg.params.rho_mu) << '\n';
  os << "rho_r=" << fmt_double(cfg.params.rho_r) << '\n';
  os << "encoder_lr=" << fmt_double(cfg.params.encoder_lr) << '\n';
  os << "encoder_mode="
     << (cfg.params.encoder_mode == EncoderMode::Reconstruction ? "reconstruction"
                                                                : "frozen")
     << '\n';
  os << "modulation="
     << (cfg.params.modulation == Modulation::RewardShaping ? "reward_shaping"
                                                            : "update_scaling")
     << '\n';
  return os.str();
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stoull(item));
    } catch (...) {
      throw std::invalid_argument("bad seed list entry '" + item + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument("empty seed list");
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double("list", item));
  }
  if (out.empty()) throw std::invalid_argument("empty numeric list");
  return out;
}

}  // namespace disrc

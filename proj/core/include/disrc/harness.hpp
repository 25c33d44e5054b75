#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "disrc/config.hpp"
#include "disrc/metrics.hpp"

namespace disrc {

// Extra per-run signals recorded for the surprise-regularized agent; these
// stay in memory (the CSV schema is fixed) and back the invariant checks.
struct SurpriseTelemetry {
  std::vector<double> episode_beta;
  double max_bonus = -std::numeric_limits<double>::infinity();
  double min_deviation = std::numeric_limits<double>::infinity();
  double max_deviation = -std::numeric_limits<double>::infinity();
};

struct TrainResult {
  RunSummary summary;
  std::vector<EpisodeRecord> episodes;
  std::vector<double> step_losses;  // every per-update TD loss, in order
  std::optional<SurpriseTelemetry> surprise;
};

struct TrainOptions {
  bool render = false;      // dump the ASCII grid at each episode reset
  int log_every = 0;        // progress line period in episodes; 0 = silent
  std::ostream* log = nullptr;
};

// Runs the full collect/update loop and writes episodes.csv, summary.txt and
// config.txt (plus optional checkpoints) into the config's output directory.
// The CSV is flushed as episodes finish so numeric aborts leave partial
// artifacts behind. Byte-deterministic given (config, seed, build); the only
// timestamp lives in a config.txt comment.
TrainResult train(const RunConfig& cfg, const TrainOptions& opts = {});

struct CompareRow {
  std::string agent;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  RunSummary summary;
};

struct CompareReport {
  std::vector<CompareRow> rows_a;
  std::vector<CompareRow> rows_b;
  std::string csv;    // per-seed rows plus per-side median rows
  std::string table;  // aligned text rendering of the same data
};

// Trains both configurations once per seed (independent runs, up to `jobs`
// in parallel), writes compare.csv / compare.txt under out_dir and returns
// the report. A run that throws is marked failed; the others stand.
CompareReport compare(const RunConfig& config_a, const RunConfig& config_b,
                      const std::vector<std::uint64_t>& seeds,
                      const std::string& out_dir, int jobs = 0,
                      std::ostream* log = nullptr);

struct SweepCell {
  double beta0 = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  RunSummary summary;
};

// One train per (beta0, lambda, seed); duplicate grid points are dropped
// with a warning. Failures are recorded and the sweep continues. Writes
// sweep.csv under out_dir.
std::vector<SweepCell> sweep(const RunConfig& base,
                             const std::vector<double>& beta0_grid,
                             const std::vector<double>& lambda_grid,
                             const std::vector<std::uint64_t>& seeds,
                             const std::string& out_dir, int jobs = 0,
                             std::ostream* log = nullptr);

// 17-significant-digit decimal formatting used across all artifacts.
std::string fmt_real(double v);

std::string summary_to_text(const RunSummary& s);

}  // namespace disrc

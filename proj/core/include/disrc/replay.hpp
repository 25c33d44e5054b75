#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "disrc/rng.hpp"

namespace disrc {

// One replay record. `reward` is the stored reward: raw for the baseline
// agent, shaped for the surprise-regularized agent. `done` flags true
// terminal transitions only; time-limit truncation still bootstraps.
// `deviation` keeps the surprise measured when the transition was collected
// (used by the update-scaling modulation mode; 0 otherwise).
struct Transition {
  std::vector<double> obs;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_obs;
  bool done = false;
  double deviation = 0.0;
};

// Fixed-capacity FIFO ring with uniform with-replacement sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 50000);

  void push(Transition t);

  // batch_size transitions drawn uniformly (with replacement) from the live
  // region; draws one rng index per sample. Empty optional when fewer than
  // batch_size transitions are stored, in which case the caller skips the
  // update.
  std::optional<std::vector<const Transition*>> sample(std::size_t batch_size,
                                                       Rng& rng) const;

  std::size_t size() const { return count_; }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return storage_[i]; }

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t write_ = 0;
  std::size_t count_ = 0;
};

}  // namespace disrc

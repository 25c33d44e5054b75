#include "disrc/replay.hpp"

#include <stdexcept>

namespace disrc {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
  storage_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (count_ < capacity_) {
    storage_.emplace_back(std::move(t));
    ++count_;
  } else {
    storage_[write_] = std::move(t);  // evict the oldest entry
  }
  write_ = (write_ + 1) % capacity_;
}

std::optional<std::vector<const Transition*>> ReplayBuffer::sample(
    std::size_t batch_size, Rng& rng) const {
  if (count_ < batch_size) return std::nullopt;
  std::vector<const Transition*> out;
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i)
    out.push_back(&storage_[rng.below(count_)]);
  return out;
}

}  // namespace disrc

#include "sgmmq/replay.hpp"

#include <algorithm>

#include "sgmmq/errors.hpp"

namespace sgmmq {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : cap_(capacity), ring_(capacity), rng_(seed) {
  if (capacity == 0) throw ContractViolation("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(const Transition& t) {
  if (size_ < cap_) {
    ring_[(head_ + size_) % cap_] = t;
    ++size_;
  } else {
    ring_[head_] = t;
    head_ = (head_ + 1) % cap_;
  }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ContractViolation("ReplayBuffer::at: index out of range");
  return ring_[(head_ + i) % cap_];
}

const Transition& ReplayBuffer::newest() const {
  if (size_ == 0) throw ContractViolation("ReplayBuffer::newest: buffer is empty");
  return ring_[(head_ + size_ - 1) % cap_];
}

MiniBatch ReplayBuffer::sample(std::size_t batch) {
  if (batch == 0) throw ContractViolation("ReplayBuffer::sample: batch size must be positive");
  if (size_ == 0) throw ContractViolation("ReplayBuffer::sample: buffer is empty");
  const std::size_t m = std::min(batch, size_);
  const std::size_t pool = size_ - 1;  // everything but the newest
  const std::size_t k = m - 1;

  // Floyd's subset sampling: k distinct age indices from {0, ..., pool-1}.
  std::vector<std::size_t> picked;
  picked.reserve(m);
  std::vector<char> taken(pool, 0);
  for (std::size_t j = pool - k; j < pool; ++j) {
    const std::size_t r = rng_.uniform_index(j + 1);
    if (taken[r]) {
      taken[j] = 1;
      picked.push_back(j);
    } else {
      taken[r] = 1;
      picked.push_back(r);
    }
  }
  std::sort(picked.begin(), picked.end());
  picked.push_back(pool);  // the newest, always, last

  MiniBatch out;
  out.reserve(m);
  for (const std::size_t idx : picked) out.push_back(at(idx));
  return out;
}

}  // namespace sgmmq

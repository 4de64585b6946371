#pragma once

#include <cstdint>
#include <vector>

#include "sgmmq/loss.hpp"
#include "sgmmq/rng.hpp"

namespace sgmmq {

// FIFO experience buffer with forced inclusion of the newest transition in
// every sampled batch. Single writer; reads don't mutate anything except the
// sampling RNG inside sample().
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  // Appends t; once full, overwrites the oldest entry.
  void push(const Transition& t);

  // min(batch, size()) distinct transitions: the newest always, the rest
  // uniform without replacement from the older entries. Ordered oldest to
  // newest, so the forced newest transition comes last.
  MiniBatch sample(std::size_t batch);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return cap_; }
  bool empty() const { return size_ == 0; }

  // Age order: index 0 is the oldest retained entry.
  const Transition& at(std::size_t i) const;
  const Transition& newest() const;

 private:
  std::size_t cap_;
  std::vector<Transition> ring_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  Rng rng_;
};

}  // namespace sgmmq

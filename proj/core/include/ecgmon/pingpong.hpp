#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <vector>

#include "ecgmon/adc.hpp"

namespace ecgmon {

struct ReadyEvent {
  int half = 0;
  std::uint64_t sequence = 0;
};

// A filled half handed to the consumer. `generation` counts completed fills of
// that half and lets tests check the writer never touched it after hand-off.
struct HalfFrame {
  int half = 0;
  std::uint64_t sequence = 0;
  std::uint64_t generation = 0;
  bool overrun = false;  // overrun flag as observed at take time
  bool partial = false;  // produced by flush(), shorter than half_capacity
  std::vector<AdcCode> codes;
};

// DMA-style double buffer. The producer fills the active half; on completion
// the half is queued as ready and the producer switches to the other half. If
// that half still holds an unconsumed fill the overrun flag is set and the
// fill is overwritten, mirroring circular DMA.
//
// One producer context and one consumer context may run concurrently.
class PingPongBuffer {
 public:
  explicit PingPongBuffer(std::size_t half_capacity = 512);

  std::optional<ReadyEvent> push_sample(AdcCode code);

  // Newest ready half, or nullopt. Older pending halves are dropped (they are
  // being overwritten); the resulting sequence gap is what signals the loss.
  std::optional<HalfFrame> take_ready_half();

  // Blocks until a half is ready, the buffer is closed, or the timeout expires.
  std::optional<HalfFrame> wait_ready_half(std::chrono::milliseconds timeout);

  // Hands the partially filled active half to the consumer as a short frame.
  std::optional<ReadyEvent> flush();

  // Wakes waiting consumers; wait_ready_half returns nullopt once drained.
  void close();
  bool closed() const;

  std::size_t half_capacity() const noexcept { return half_capacity_; }
  bool overrun_flag() const;
  void clear_overrun();
  std::uint64_t overrun_count() const;
  std::uint64_t total_written() const;
  std::uint64_t total_consumed() const;
  std::size_t write_index() const;
  int active_half() const;
  std::size_t pending_events() const;

 private:
  std::optional<HalfFrame> take_locked();
  std::optional<ReadyEvent> complete_half_locked(std::size_t length);

  const std::size_t half_capacity_;
  mutable std::mutex mutex_;
  std::condition_variable ready_cv_;
  std::array<std::vector<AdcCode>, 2> halves_;
  std::array<std::size_t, 2> fill_length_{0, 0};
  std::array<bool, 2> unconsumed_{false, false};
  std::array<std::uint64_t, 2> generation_{0, 0};
  std::deque<ReadyEvent> ready_;
  std::size_t write_index_ = 0;
  int active_ = 0;
  std::uint64_t next_sequence_ = 0;
  bool overrun_ = false;
  std::uint64_t overrun_count_ = 0;
  std::uint64_t total_written_ = 0;
  std::uint64_t total_consumed_ = 0;
  bool closed_ = false;
};

}  // namespace ecgmon

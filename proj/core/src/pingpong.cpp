#include "ecgmon/pingpong.hpp"

#include <stdexcept>

namespace ecgmon {

PingPongBuffer::PingPongBuffer(std::size_t half_capacity) : half_capacity_(half_capacity) {
  if (half_capacity == 0) throw std::invalid_argument("half_capacity must be > 0");
  halves_[0].assign(half_capacity, 0);
  halves_[1].assign(half_capacity, 0);
}

std::optional<ReadyEvent> PingPongBuffer::complete_half_locked(std::size_t length) {
  const int done = active_;
  fill_length_[done] = length;
  ++generation_[done];
  // The half just completed still held an earlier fill nobody took: that fill
  // is gone. Same if the other half is still waiting, since the writer moves
  // into it next.
  const int other = 1 - done;
  if (unconsumed_[done] || unconsumed_[other]) {
    overrun_ = true;
    ++overrun_count_;
  }
  unconsumed_[done] = true;
  const ReadyEvent event{done, next_sequence_++};
  ready_.push_back(event);
  active_ = other;
  write_index_ = 0;
  ready_cv_.notify_one();
  return event;
}

std::optional<ReadyEvent> PingPongBuffer::push_sample(AdcCode code) {
  std::lock_guard lock(mutex_);
  if (unconsumed_[active_] && write_index_ == 0) {
    // Overwrite-oldest: the stale fill of this half can no longer be handed out.
    std::erase_if(ready_, [this](const ReadyEvent& e) { return e.half == active_; });
    unconsumed_[active_] = false;
  }
  halves_[active_][write_index_++] = code;
  ++total_written_;
  if (write_index_ == half_capacity_) return complete_half_locked(half_capacity_);
  return std::nullopt;
}

std::optional<ReadyEvent> PingPongBuffer::flush() {
  std::lock_guard lock(mutex_);
  if (write_index_ == 0) return std::nullopt;
  if (unconsumed_[active_]) {
    std::erase_if(ready_, [this](const ReadyEvent& e) { return e.half == active_; });
    unconsumed_[active_] = false;
  }
  return complete_half_locked(write_index_);
}

std::optional<HalfFrame> PingPongBuffer::take_locked() {
  if (ready_.empty()) return std::nullopt;
  const ReadyEvent newest = ready_.back();
  // Anything older is about to be (or already was) overwritten.
  for (const auto& e : ready_) {
    if (e.sequence != newest.sequence) unconsumed_[e.half] = false;
  }
  ready_.clear();

  HalfFrame frame;
  frame.half = newest.half;
  frame.sequence = newest.sequence;
  frame.generation = generation_[newest.half];
  frame.overrun = overrun_;
  frame.partial = fill_length_[newest.half] != half_capacity_;
  const auto& src = halves_[newest.half];
  frame.codes.assign(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(fill_length_[newest.half]));
  unconsumed_[newest.half] = false;
  total_consumed_ += frame.codes.size();
  return frame;
}

std::optional<HalfFrame> PingPongBuffer::take_ready_half() {
  std::lock_guard lock(mutex_);
  return take_locked();
}

std::optional<HalfFrame> PingPongBuffer::wait_ready_half(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  ready_cv_.wait_for(lock, timeout, [this] { return !ready_.empty() || closed_; });
  return take_locked();
}

void PingPongBuffer::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  ready_cv_.notify_all();
}

bool PingPongBuffer::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

bool PingPongBuffer::overrun_flag() const {
  std::lock_guard lock(mutex_);
  return overrun_;
}

void PingPongBuffer::clear_overrun() {
  std::lock_guard lock(mutex_);
  overrun_ = false;
}

std::uint64_t PingPongBuffer::overrun_count() const {
  std::lock_guard lock(mutex_);
  return overrun_count_;
}

std::uint64_t PingPongBuffer::total_written() const {
  std::lock_guard lock(mutex_);
  return total_written_;
}

std::uint64_t PingPongBuffer::total_consumed() const {
  std::lock_guard lock(mutex_);
  return total_consumed_;
}

std::size_t PingPongBuffer::write_index() const {
  std::lock_guard lock(mutex_);
  return write_index_;
}

int PingPongBuffer::active_half() const {
  std::lock_guard lock(mutex_);
  return active_;
}

std::size_t PingPongBuffer::pending_events() const {
  std::lock_guard lock(mutex_);
  return ready_.size();
}

}  // namespace ecgmon

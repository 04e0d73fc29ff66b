#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace antsim {

/// Simulation time in seconds.
using SimTime = double;

/// Thrown when an event is scheduled before the current clock value.
class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Time-ordered event list. Entries pop in (fire_time, seq) order, where seq
/// is the insertion counter, so events sharing a timestamp fire FIFO.
template <class Payload>
class EventQueue {
 public:
  struct Entry {
    SimTime time;
    std::uint64_t seq;
    Payload payload;
  };

  SimTime now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  std::uint64_t scheduled_count() const { return next_seq_; }

  SimTime next_time() const {
    if (heap_.empty()) throw std::logic_error("next_time on empty event queue");
    return heap_.front().time;
  }

  void schedule(SimTime fire_time, Payload payload) {
    if (!(fire_time >= now_)) {
      throw SchedulingError("event scheduled in the past: t=" + std::to_string(fire_time) +
                            " now=" + std::to_string(now_));
    }
    heap_.push_back(Entry{fire_time, next_seq_++, std::move(payload)});
    sift_up(heap_.size() - 1);
  }

  /// Removes the earliest entry and advances the clock to its fire time.
  Entry pop() {
    if (heap_.empty()) throw std::logic_error("pop on empty event queue");
    Entry top = std::move(heap_.front());
    if (heap_.size() > 1) {
      heap_.front() = std::move(heap_.back());
      heap_.pop_back();
      sift_down(0);
    } else {
      heap_.pop_back();
    }
    now_ = top.time;
    return top;
  }

  /// Processes every event with fire_time <= t_end in order, then sets the
  /// clock to t_end. The handler may schedule further events.
  template <class Handler>
  std::size_t run_until(SimTime t_end, Handler&& handler) {
    if (t_end < now_) throw SchedulingError("run_until target lies in the past");
    std::size_t processed = 0;
    while (!heap_.empty() && heap_.front().time <= t_end) {
      Entry e = pop();
      handler(e.time, e.payload);
      ++processed;
    }
    now_ = t_end;
    return processed;
  }

 private:
  static bool before(const Entry& a, const Entry& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.seq < b.seq;
  }

  void sift_up(std::size_t i) {
    while (i > 0) {
      std::size_t parent = (i - 1) / 2;
      if (!before(heap_[i], heap_[parent])) break;
      std::swap(heap_[i], heap_[parent]);
      i = parent;
    }
  }

  void sift_down(std::size_t i) {
    const std::size_t n = heap_.size();
    for (;;) {
      std::size_t best = i;
      std::size_t l = 2 * i + 1;
      std::size_t r = l + 1;
      if (l < n && before(heap_[l], heap_[best])) best = l;
      if (r < n && before(heap_[r], heap_[best])) best = r;
      if (best == i) return;
      std::swap(heap_[i], heap_[best]);
      i = best;
    }
  }

  std::vector<Entry> heap_;
  std::uint64_t next_seq_ = 0;
  SimTime now_ = 0.0;
};

/// One independent source of randomness per stochastic process, so that e.g.
/// changing the ant launch rate does not perturb the data workload.
enum class Stream : std::uint32_t {
  kSessionArrival = 1,
  kSessionEndpoints,
  kPacketSize,
  kPacketGap,
  kAntRouting,
  kDataRouting,
  kServiceTime,
  kTimerPhase,
  kWorkloadSetup,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// A seeded 64-bit generator with the handful of draws the simulator needs.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform draw in the open interval (0, 1).
  double uniform_open() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_open(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("index draw over empty range");
    return static_cast<std::size_t>(uniform_open() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 gen_;
};

class RngStreams {
 public:
  explicit RngStreams(std::uint64_t master_seed) : master_seed_(master_seed) {}

  std::uint64_t master_seed() const { return master_seed_; }

  /// Fresh generator for a stream; the same (master_seed, stream) always
  /// yields the same sequence.
  Rng make(Stream s, std::uint64_t salt = 0) const {
    std::uint64_t h = splitmix64(master_seed_);
    h = splitmix64(h ^ static_cast<std::uint64_t>(s));
    h = splitmix64(h ^ salt);
    return Rng(h);
  }

 private:
  std::uint64_t master_seed_;
};

/// Exponentially distributed draw with the given mean; always strictly positive.
inline double sample_exponential(Rng& rng, double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("exponential mean must be positive and finite");
  }
  return -mean * std::log(rng.uniform_open());
}

/// Draws an index with probability proportional to weights[i]. Returns
/// weights.size() when every weight is zero.
template <class Range>
std::size_t sample_discrete(Rng& rng, const Range& weights) {
  double total = 0.0;
  std::size_t n = 0;
  for (double w : weights) {
    total += w;
    ++n;
  }
  if (!(total > 0.0)) return n;
  double u = rng.uniform_open() * total;
  std::size_t i = 0;
  std::size_t last_positive = n;
  for (double w : weights) {
    if (w > 0.0) {
      last_positive = i;
      if (u < w) return i;
      u -= w;
    }
    ++i;
  }
  return last_positive;
}

}  // namespace antsim

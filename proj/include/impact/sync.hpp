#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <random>

#include "impact/dram.hpp"

namespace impact {

/// Counting semaphore between two logical processes in one event loop.
/// Value always equals posts - consumes; waiting moves the consumer's clock
/// forward to the post time when it would block.
class SimSemaphore {
  public:
    void post(Cycle at) {
        pending_.push_back(at);
        ++posts_;
        check();
    }

    /// Returns the cycle at which the waiter proceeds.
    Cycle wait(Cycle waiter_clock) {
        if (pending_.empty())
            throw SyncDeadlock("semaphore wait with no outstanding or future post");
        const Cycle post_at = pending_.front();
        pending_.pop_front();
        ++consumes_;
        check();
        return std::max(waiter_clock, post_at);
    }

    std::int64_t value() const { return posts_ - consumes_; }
    std::int64_t posts() const { return posts_; }
    std::int64_t consumes() const { return consumes_; }

  private:
    void check() const {
        if (value() < 0 || value() != static_cast<std::int64_t>(pending_.size()))
            throw SyncDeadlock("semaphore accounting violated");
    }

    std::deque<Cycle> pending_;
    std::int64_t posts_ = 0;
    std::int64_t consumes_ = 0;
};

/// Two-party barrier: both clocks advance to the later arrival plus cost.
inline Cycle barrier(Cycle a, Cycle b, Cycle cost) {
    return std::max(a, b) + cost;
}

/// splitmix64; used to derive independent stream seeds from one base seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Uniform double in [0,1) pinned to the raw engine output (no library
/// distribution, so sequences are identical across standard libraries).
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Poisson arrival stream over cycles for one DRAM bank. Banks draw from
/// independent sub-seeded streams so event order between banks is
/// irrelevant to the generated sequence.
class PoissonStream {
  public:
    PoissonStream() = default;
    PoissonStream(double rate_per_kilocycle, std::uint64_t seed)
        : rate_(rate_per_kilocycle / 1000.0), rng_(seed) {
        if (rate_ > 0.0)
            next_ = draw_gap(0);
    }

    bool active() const { return rate_ > 0.0; }

    /// True when an arrival occurs at or before `cycle`; pops it.
    bool pop_before(Cycle cycle, Cycle* arrival) {
        if (!active() || next_ > cycle)
            return false;
        *arrival = next_;
        next_ = draw_gap(next_);
        return true;
    }

  private:
    Cycle draw_gap(Cycle from) {
        const double u = uniform01(rng_);
        const double gap = -std::log(1.0 - u) / rate_;
        return from + std::max<Cycle>(1, static_cast<Cycle>(std::llround(gap)));
    }

    double rate_ = 0.0;
    std::mt19937_64 rng_;
    Cycle next_ = 0;
};

} // namespace impact

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ballbot/errors.hpp"
#include "ballbot/rng.hpp"

namespace ballbot::ddpg {

struct Transition {
    std::vector<double> s;
    std::vector<double> a;
    double r = 0.0;
    std::vector<double> s_next;
    bool done = false;  // absorbing terminal; truncated episodes stay false

    bool finite() const {
        auto ok = [](const std::vector<double>& v) {
            for (double x : v)
                if (!std::isfinite(x)) return false;
            return true;
        };
        return std::isfinite(r) && ok(s) && ok(a) && ok(s_next);
    }
};

// Fixed-capacity ring buffer with FIFO eviction and uniform sampling with
// replacement.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw ConfigError("replay buffer capacity must be > 0");
        storage_.reserve(capacity);
    }

    void push(Transition t) {
        if (!t.finite()) throw NonFinite("replay buffer rejects non-finite transition");
        if (storage_.size() < capacity_) {
            storage_.push_back(std::move(t));
        } else {
            storage_[cursor_] = std::move(t);
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }

    // Raw slot access; slot order is not insertion order once the buffer wraps.
    const Transition& slot(std::size_t i) const { return storage_[i]; }

    std::vector<const Transition*> sample(Rng& rng, std::size_t n) const {
        if (storage_.empty()) throw ConfigError("cannot sample from an empty replay buffer");
        std::vector<const Transition*> batch(n);
        for (std::size_t i = 0; i < n; ++i) batch[i] = &storage_[rng.uniform_index(storage_.size())];
        return batch;
    }

  private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> storage_;
};

}  // namespace ballbot::ddpg

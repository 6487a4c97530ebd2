#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ballbot {

// Persistent worker pool dispatching indexed work items. Work is pulled via
// an atomic counter, so scheduling is nondeterministic but callers that write
// item i's result to slot i (and reduce in index order) stay bit-reproducible
// for any thread count.
class WorkerPool {
  public:
    explicit WorkerPool(int threads) {
        const int n = threads < 1 ? 1 : threads;
        for (int i = 0; i < n - 1; ++i) workers_.emplace_back([this] { worker_loop(); });
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    ~WorkerPool() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    int thread_count() const { return static_cast<int>(workers_.size()) + 1; }

    // Runs fn(i) for i in [0, n); blocks until every item finished. The
    // calling thread participates. Not reentrant.
    void run(int n, const std::function<void(int)>& fn) {
        if (n <= 0) return;
        if (workers_.empty()) {
            for (int i = 0; i < n; ++i) fn(i);
            return;
        }
        {
            std::lock_guard<std::mutex> lock(mu_);
            fn_ = &fn;
            total_ = n;
            next_.store(0, std::memory_order_relaxed);
            remaining_ = n;
            ++generation_;
        }
        cv_.notify_all();
        drain();
        std::unique_lock<std::mutex> lock(mu_);
        done_cv_.wait(lock, [this] { return remaining_ == 0 && active_ == 0; });
        fn_ = nullptr;
    }

  private:
    // Claims items until the counter runs out. Only entered after observing
    // the current generation under the mutex, so fn_/total_ reads are safe.
    void drain() {
        for (;;) {
            const int i = next_.fetch_add(1, std::memory_order_relaxed);
            if (i >= total_) break;
            (*fn_)(i);
            std::lock_guard<std::mutex> lock(mu_);
            if (--remaining_ == 0) done_cv_.notify_all();
        }
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        for (;;) {
            {
                std::unique_lock<std::mutex> lock(mu_);
                cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
                ++active_;
            }
            drain();
            std::lock_guard<std::mutex> lock(mu_);
            if (--active_ == 0 && remaining_ == 0) done_cv_.notify_all();
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(int)>* fn_ = nullptr;
    int total_ = 0;
    std::atomic<int> next_{0};
    int remaining_ = 0;
    int active_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

}  // namespace ballbot

// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#include "mgs/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace mgs {
namespace {

std::size_t default_workers() {
  if (const char* env = std::getenv("MGS_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

class Pool {
 public:
  explicit Pool(std::size_t workers) {
    for (std::size_t i = 1; i < workers; ++i) threads_.emplace_back([this] { loop(); });
  }

  ~Pool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void run(std::size_t n, const std::function<void(std::size_t)>& fn) {
    std::unique_lock lock(mutex_);
    fn_ = &fn;
    n_ = n;
    next_.store(0);
    active_ = threads_.size();
    error_ = nullptr;
    ++generation_;
    lock.unlock();
    wake_.notify_all();

    work();

    lock.lock();
    done_.wait(lock, [this] { return active_ == 0; });
    fn_ = nullptr;
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void work() {
    for (;;) {
      const std::size_t i = next_.fetch_add(1);
      if (i >= n_) return;
      try {
        (*fn_)(i);
      } catch (...) {
        std::lock_guard lock(mutex_);
        if (!error_) error_ = std::current_exception();
        next_.store(n_);
      }
    }
  }

  void loop() {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      work();
      {
        std::lock_guard lock(mutex_);
        --active_;
      }
      done_.notify_one();
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* fn_ = nullptr;
  std::size_t n_ = 0;
  std::atomic<std::size_t> next_{0};
  std::size_t active_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

struct PoolState {
  std::mutex mutex;
  std::size_t workers = default_workers();
  std::unique_ptr<Pool> pool;
};

PoolState& pool_state() {
  static PoolState state;
  return state;
}

}  // namespace

std::size_t worker_count() {
  auto& s = pool_state();
  std::lock_guard lock(s.mutex);
  return s.workers;
}

void set_worker_count(std::size_t count) {
  auto& s = pool_state();
  std::lock_guard lock(s.mutex);
  const std::size_t workers = count == 0 ? 1 : count;
  if (workers != s.workers) {
    s.pool.reset();
    s.workers = workers;
  }
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  auto& s = pool_state();
  std::lock_guard lock(s.mutex);
  if (s.workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (!s.pool) s.pool = std::make_unique<Pool>(s.workers);
  s.pool->run(n, fn);
}

}  // namespace mgs

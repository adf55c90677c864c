// Copyright 2026 The MGS Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace mgs {

// Number of workers used by parallel_for. Defaults to the MGS_WORKERS
// environment variable when set, otherwise the available hardware threads.
std::size_t worker_count();
void set_worker_count(std::size_t count);

// Calls fn(i) for every i in [0, n) across the worker pool and waits. The
// first exception thrown by fn is rethrown on the calling thread. Callers
// must make results independent of which worker ran which index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

class ScopedWorkerCount {
 public:
  explicit ScopedWorkerCount(std::size_t count) : previous_(worker_count()) {
    set_worker_count(count);
  }
  ~ScopedWorkerCount() { set_worker_count(previous_); }
  ScopedWorkerCount(const ScopedWorkerCount&) = delete;
  ScopedWorkerCount& operator=(const ScopedWorkerCount&) = delete;

 private:
  std::size_t previous_;
};

}  // namespace mgs

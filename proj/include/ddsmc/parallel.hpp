// Copyright 2026 The ddsmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace ddsmc {

/// DDSMC_THREADS when set to a positive integer.
std::optional<unsigned> env_thread_cap();

/// Worker count from DDSMC_THREADS, else hardware concurrency (at least 1).
unsigned default_thread_count();

/// Fixed-size pool running index-parallel loops. The partition of indices to
/// workers never affects results as long as fn(i) only touches slot i.
class ThreadPool {
public:
  explicit ThreadPool(unsigned threads);
  ~ThreadPool();
  ThreadPool(const ThreadPool &) = delete;
  ThreadPool &operator=(const ThreadPool &) = delete;

  unsigned size() const { return static_cast<unsigned>(workers_.size()) + 1; }

  /// Runs fn(i) for i in [0, n). Rethrows the first exception by index order.
  void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn);

private:
  void worker_loop(unsigned id);
  void run_chunk(unsigned id);

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t)> *task_ = nullptr;
  std::size_t task_size_ = 0;
  std::size_t generation_ = 0;
  unsigned pending_ = 0;
  bool stop_ = false;
  std::vector<std::exception_ptr> errors_;
  std::vector<std::size_t> error_index_;
};

} // namespace ddsmc

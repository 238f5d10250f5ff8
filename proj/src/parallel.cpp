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

#include "ddsmc/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <string>

namespace ddsmc {

std::optional<unsigned> env_thread_cap() {
  if (const char *env = std::getenv("DDSMC_THREADS"); env != nullptr && *env != '\0') {
    try {
      const long v = std::stol(env);
      if (v >= 1) {
        return static_cast<unsigned>(v);
      }
    } catch (const std::exception &) {
    }
  }
  return std::nullopt;
}

unsigned default_thread_count() {
  return env_thread_cap().value_or(std::max(1u, std::thread::hardware_concurrency()));
}

ThreadPool::ThreadPool(unsigned threads) {
  const unsigned n = std::max(1u, threads);
  errors_.resize(n);
  error_index_.resize(n);
  for (unsigned id = 1; id < n; ++id) {
    workers_.emplace_back([this, id] { worker_loop(id); });
  }
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto &w : workers_) {
    w.join();
  }
}

void ThreadPool::run_chunk(unsigned id) {
  const std::size_t n = task_size_;
  const std::size_t parts = size();
  const std::size_t begin = n * id / parts;
  const std::size_t end = n * (id + 1) / parts;
  for (std::size_t i = begin; i < end; ++i) {
    try {
      (*task_)(i);
    } catch (...) {
      errors_[id] = std::current_exception();
      error_index_[id] = i;
      return;
    }
  }
}

void ThreadPool::worker_loop(unsigned id) {
  std::size_t seen = 0;
  for (;;) {
    {
      std::unique_lock lock(mutex_);
      start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) {
        return;
      }
      seen = generation_;
    }
    run_chunk(id);
    {
      std::lock_guard lock(mutex_);
      if (--pending_ == 0) {
        done_cv_.notify_one();
      }
    }
  }
}

void ThreadPool::parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn) {
  std::fill(errors_.begin(), errors_.end(), nullptr);
  task_ = &fn;
  task_size_ = n;
  if (!workers_.empty() && n > 1) {
    {
      std::lock_guard lock(mutex_);
      pending_ = static_cast<unsigned>(workers_.size());
      ++generation_;
    }
    start_cv_.notify_all();
    run_chunk(0);
    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [&] { return pending_ == 0; });
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
  }
  task_ = nullptr;
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::exception_ptr first;
  for (std::size_t id = 0; id < errors_.size(); ++id) {
    if (errors_[id] && error_index_[id] < best) {
      best = error_index_[id];
      first = errors_[id];
    }
  }
  if (first) {
    std::rethrow_exception(first);
  }
}

} // namespace ddsmc

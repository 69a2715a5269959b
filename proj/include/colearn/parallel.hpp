#pragma once

#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace colearn {

// Persistent worker pool for the per-iteration agent block.  Indices are
// chunked statically and the per-index work writes only caller-owned slots,
// so results do not depend on the worker count.  A pool with fewer than two
// workers runs inline.
class ThreadPool {
 public:
  explicit ThreadPool(int workers) : workers_(workers < 1 ? 1 : workers) {
    for (int w = 1; w < workers_; ++w) {
      threads_.emplace_back([this, w] { worker_loop(w); });
    }
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  ~ThreadPool() {
    {
      std::unique_lock lock(mutex_);
      stop_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
  }

  int workers() const { return workers_; }

  // Runs body(0) .. body(count-1), blocking until all complete.  The first
  // exception thrown by any index is rethrown here.
  void parallel_for(int count, const std::function<void(int)>& body) {
    if (count <= 0) return;
    if (workers_ == 1 || count == 1) {
      for (int i = 0; i < count; ++i) body(i);
      return;
    }
    {
      std::unique_lock lock(mutex_);
      body_ = &body;
      count_ = count;
      pending_ = workers_ - 1;
      error_ = nullptr;
      ++generation_;
    }
    wake_.notify_all();
    run_chunk(0);
    {
      std::unique_lock lock(mutex_);
      done_.wait(lock, [this] { return pending_ == 0; });
      body_ = nullptr;
      if (error_) std::rethrow_exception(error_);
    }
  }

 private:
  void worker_loop(int w) {
    long seen = 0;
    while (true) {
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      run_chunk(w);
      {
        std::unique_lock lock(mutex_);
        if (--pending_ == 0) done_.notify_one();
      }
    }
  }

  void run_chunk(int w) {
    const int lo = static_cast<int>(static_cast<long>(count_) * w / workers_);
    const int hi = static_cast<int>(static_cast<long>(count_) * (w + 1) / workers_);
    try {
      for (int i = lo; i < hi; ++i) (*body_)(i);
    } catch (...) {
      std::unique_lock lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }

  int workers_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(int)>* body_ = nullptr;
  int count_ = 0;
  int pending_ = 0;
  long generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace colearn

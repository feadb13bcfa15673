#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ucadmm {

/// Fixed set of threads running index-range batches. parallel_for returns
/// after every index has been processed (a barrier); the first exception
/// thrown by any index is rethrown in the caller.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const { return threads_.size() + 1; }

  /// Calls fn(i) for i in [0, n). Indices are split into contiguous chunks,
  /// one per worker; the calling thread takes the first chunk.
  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

 private:
  void run(std::size_t worker);
  void run_chunk(std::size_t worker);

  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable start_cv_, done_cv_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t n_ = 0;
  std::size_t generation_ = 0;
  std::size_t pending_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace ucadmm

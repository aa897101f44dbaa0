#pragma once

#include <cstddef>
#include <functional>

namespace seisint::nn {

/// Splits an index range into contiguous chunks, one per worker thread.
/// Every index is visited by exactly one worker, so callers that write only
/// to index-owned outputs get results independent of the thread count.
class Executor {
 public:
  explicit Executor(std::size_t threads = 1);

  std::size_t threads() const noexcept { return threads_; }

  void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) const;

  /// Executor using every available hardware thread.
  static Executor hardware();

 private:
  std::size_t threads_;
};

}  // namespace seisint::nn

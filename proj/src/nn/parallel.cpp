#include "seisint/nn/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace seisint::nn {

namespace {
// Below this many indices per worker, spawning threads costs more than it saves.
constexpr std::size_t kMinChunk = 64;
}  // namespace

Executor::Executor(std::size_t threads) : threads_(std::max<std::size_t>(threads, 1)) {}

Executor Executor::hardware() { return Executor(std::max(1u, std::thread::hardware_concurrency())); }

void Executor::parallel_for(std::size_t n,
                            const std::function<void(std::size_t, std::size_t)>& body) const {
  const std::size_t workers = std::min(threads_, std::max<std::size_t>(n / kMinChunk, 1));
  if (workers <= 1) {
    if (n) body(0, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back([&body, b, e] { body(b, e); });
  }
  body(0, std::min(n, chunk));
}

}  // namespace seisint::nn

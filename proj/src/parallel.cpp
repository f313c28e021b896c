#include "psuper/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace psuper {

int thread_cap() {
  int cap = 1;
  if (const char* env = std::getenv("PSUPER_THREADS")) {
    cap = std::max(1, std::atoi(env));
  }
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw > 0) cap = std::min(cap, hw);
  return cap;
}

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& fn) {
  const std::int64_t count = end - begin;
  const int workers = static_cast<int>(
      std::min<std::int64_t>(thread_cap(), std::max<std::int64_t>(count, 1)));
  if (workers <= 1 || count < 2) {
    for (std::int64_t i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const std::int64_t chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = begin + w * chunk;
    const std::int64_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace psuper

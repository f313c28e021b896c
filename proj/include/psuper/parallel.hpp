#pragma once

#include <cstdint>
#include <functional>

namespace psuper {

/// Worker cap: min(hardware, PSUPER_THREADS). Defaults to 1 when the
/// variable is unset so batch runs stay reproducible timing-wise; all
/// parallel loops are pure maps, so results are identical at any cap.
int thread_cap();

/// Runs fn(i) for i in [begin, end), splitting contiguous chunks over the
/// worker cap. fn must only write to i-indexed slots.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace psuper

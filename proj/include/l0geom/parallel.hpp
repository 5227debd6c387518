#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace l0geom {

/// Split [0, n) into contiguous chunks, one per worker. Each worker folds its
/// chunk into a private accumulator with `body(acc, index)`; accumulators are
/// merged in chunk order with `merge(total, part)`.
///
/// Results only depend on the worker count through `merge`; callers that need
/// bitwise reproducibility accumulate integers.
template <typename Acc, typename Body, typename Merge>
Acc parallel_reduce(std::uint64_t n, unsigned threads, const Acc& init, Body body,
                    Merge merge) {
  const std::uint64_t workers =
      std::max<std::uint64_t>(1, std::min<std::uint64_t>(threads == 0 ? 1 : threads, n));
  std::vector<Acc> parts(workers, init);
  std::vector<std::exception_ptr> errors(workers);

  auto run_chunk = [&](std::uint64_t w) {
    const std::uint64_t begin = n * w / workers;
    const std::uint64_t end = n * (w + 1) / workers;
    try {
      for (std::uint64_t i = begin; i < end; ++i) body(parts[w], i);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (workers == 1) {
    run_chunk(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::uint64_t w = 1; w < workers; ++w) pool.emplace_back(run_chunk, w);
    run_chunk(0);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  Acc total = init;
  for (auto& p : parts) merge(total, p);
  return total;
}

}  // namespace l0geom

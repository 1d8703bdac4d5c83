#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace adjwalk {

// Default worker count for run_ensemble (0 = OpenMP default, i.e. hardware count).
void set_default_threads(int threads);
int default_threads();

// Runs fn(i) for i in [0, count) across OpenMP threads; results come back ordered by index, so
// any reduction over them is independent of the thread count. The first exception (lowest
// index) is rethrown after the parallel region.
template <class Fn>
auto run_ensemble(std::size_t count, Fn&& fn, int threads = 0) -> std::vector<decltype(fn(std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}));
  std::vector<Result> results(count);
  std::vector<std::exception_ptr> errors(count);
  const int nt = threads > 0 ? threads : (default_threads() > 0 ? default_threads() : omp_get_max_threads());
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (long long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      results[idx] = fn(idx);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

// Serial reference with the same contract, used to check the parallel runner.
template <class Fn>
auto run_ensemble_serial(std::size_t count, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  std::vector<decltype(fn(std::size_t{}))> results;
  results.reserve(count);
  for (std::size_t i = 0; i < count; ++i) results.push_back(fn(i));
  return results;
}

}  // namespace adjwalk

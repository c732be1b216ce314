#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace gbfcd::detail {

/// Worker cap: GBFCD_THREADS if set and positive, else hardware concurrency.
inline unsigned thread_budget() {
  if (const char* env = std::getenv("GBFCD_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(begin, end) over disjoint contiguous row ranges covering [0, rows).
/// fn must only write rows inside its range, so results do not depend on the split.
template <typename Fn>
void parallel_rows(Eigen::Index rows, Fn&& fn, Eigen::Index min_rows_per_task = 4096) {
  const auto tasks = static_cast<Eigen::Index>(
      std::min<Eigen::Index>(thread_budget(), std::max<Eigen::Index>(1, rows / std::max<Eigen::Index>(1, min_rows_per_task))));
  if (tasks <= 1) {
    if (rows > 0) fn(Eigen::Index{0}, rows);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tasks));
  const Eigen::Index chunk = (rows + tasks - 1) / tasks;
  for (Eigen::Index t = 0; t < tasks; ++t) {
    const Eigen::Index begin = t * chunk;
    const Eigen::Index end = std::min(rows, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, t, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace gbfcd::detail

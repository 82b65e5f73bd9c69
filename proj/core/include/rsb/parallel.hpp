#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rsb {

/// Number of worker threads. Read from the RSB_WORKERS environment variable,
/// falling back to the hardware concurrency. Never affects numeric results.
std::size_t worker_count();

/// Process-wide override for worker_count(); 0 restores the environment
/// default.
void set_worker_count(std::size_t workers);

namespace detail {
void run_indexed(std::size_t n, std::size_t workers,
                 const std::function<void(std::size_t)>& body);
}  // namespace detail

/// Evaluates fn(i) for i in [0, n) and returns the results in index order.
/// Each slot is written by exactly one task, so the output does not depend on
/// scheduling or on the number of workers.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  detail::run_indexed(n, worker_count(),
                      [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace rsb

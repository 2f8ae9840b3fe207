#include "thermowave/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "thermowave/errors.hpp"

namespace thermowave {

int worker_count() {
  if (const char* env = std::getenv("THERMOWAVE_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {
// Set on pool threads so nested parallel_for calls run inline.
thread_local bool t_in_pool = false;
}  // namespace

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const auto workers = std::min<std::size_t>(count, static_cast<std::size_t>(worker_count()));
  if (workers <= 1 || t_in_pool) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    const bool outer = t_in_pool;
    t_in_pool = true;
    for (std::size_t i = next++; i < count && !failed; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
    t_in_pool = outer;
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

Grid pairwise_sum(std::vector<Grid> terms) {
  if (terms.empty()) throw ShapeError("pairwise_sum of zero terms");
  for (std::size_t stride = 1; stride < terms.size(); stride *= 2) {
    for (std::size_t i = 0; i + stride < terms.size(); i += 2 * stride) {
      terms[i] += terms[i + stride];
    }
  }
  return std::move(terms.front());
}

}  // namespace thermowave

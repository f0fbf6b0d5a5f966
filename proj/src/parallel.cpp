#include "mixrate/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>

#include <omp.h>

#include "mixrate/errors.hpp"

namespace mixrate {

namespace {
std::atomic<int> g_threads{0};
}

int threads_from_env_or_default() {
  if (const char *env = std::getenv("MIXRATE_THREADS")) {
    try {
      const int k = std::stoi(env);
      if (k >= 1) return k;
    } catch (const std::exception &) {
    }
    throw ArgumentError(std::string("MIXRATE_THREADS must be a positive integer, got '") + env +
                        "'");
  }
  return omp_get_num_procs();
}

int threads() {
  const int k = g_threads.load();
  return k > 0 ? k : threads_from_env_or_default();
}

void set_threads(int k) {
  if (k < 1) throw ArgumentError("thread count must be >= 1");
  g_threads.store(k);
}

void for_each_index(std::size_t count, const std::function<void(std::size_t)> &body,
                    Execution exec) {
  if (exec == Execution::serial || count < 2 || threads() == 1 || omp_in_parallel()) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads())
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

} // namespace mixrate

#include "hazlab/parallel.hpp"

#include <exception>
#include <mutex>

#include <omp.h>

namespace hazlab {

int worker_count() { return omp_get_max_threads(); }

void set_worker_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, bool serial) {
  if (serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    {
      std::lock_guard<std::mutex> lock(guard);
      if (failure) continue;
    }
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace hazlab

#pragma once

#include <cstddef>
#include <functional>

namespace hazlab {

int worker_count();
void set_worker_count(int n);

// Runs body(i) for i in [0, n). With serial = true the loop runs on the
// calling thread in index order. The first exception thrown by any body is
// rethrown after the loop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  bool serial = false);

}  // namespace hazlab

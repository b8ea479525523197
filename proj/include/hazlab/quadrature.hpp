#pragma once

#include <functional>
#include <span>

namespace hazlab {

using RealFunction = std::function<double(double)>;

struct QuadratureOptions {
  double rel_tol = 1e-11;
  unsigned max_depth = 18;
};

// Adaptive Gauss-Kronrod on [a, b] split at every breakpoint inside (a, b).
// b may be +infinity; the unbounded tail is handled by an exp-sinh rule.
// Throws DivergenceError if the result is not finite or the error estimate
// does not meet a loose sanity bound.
double integrate(const RealFunction& f, double a, double b,
                 std::span<const double> breakpoints = {},
                 QuadratureOptions options = {});

}  // namespace hazlab

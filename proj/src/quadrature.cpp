#include "hazlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hazlab/errors.hpp"

namespace hazlab {
namespace {

constexpr double kLooseBound = 1e-4;

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel panel(const RealFunction& f, double a, double b) {
  double e = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &e);
  return {a, b, v, e};
}

// Globally adaptive: always bisect the panel with the largest error, so
// negligible pieces are never refined to full depth.
double finite_pieces(const RealFunction& f, const std::vector<double>& nodes,
                     const QuadratureOptions& o, double& err, double& scale) {
  std::priority_queue<Panel> heap;
  double total = 0.0, abs_total = 0.0;
  err = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    Panel p = panel(f, nodes[i], nodes[i + 1]);
    total += p.value;
    abs_total += std::abs(p.value);
    err += p.error;
    heap.push(p);
  }
  const std::size_t max_panels = nodes.size() + (std::size_t{1} << std::min(o.max_depth, 14u));
  while (!heap.empty() && err > o.rel_tol * std::max(std::abs(total), 1e-3 * abs_total) &&
         heap.size() < max_panels) {
    const Panel p = heap.top();
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) break;
    heap.pop();
    const Panel l = panel(f, p.a, mid), r = panel(f, mid, p.b);
    total += l.value + r.value - p.value;
    abs_total += std::abs(l.value) + std::abs(r.value) - std::abs(p.value);
    err += l.error + r.error - p.error;
    heap.push(l);
    heap.push(r);
  }
  // re-add from scratch to shed accumulated rounding in the running sums
  total = 0.0;
  err = 0.0;
  scale = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    scale += std::abs(heap.top().value);
    heap.pop();
  }
  return total;
}

double tail_piece(const RealFunction& f, double a, const QuadratureOptions& o, double& err) {
  static thread_local boost::math::quadrature::exp_sinh<double> rule;
  double e = 0.0;
  double v = rule.integrate([&](double x) { return f(a + x); }, 0.0,
                            std::numeric_limits<double>::infinity(), o.rel_tol, &e);
  err += e;
  return v;
}

}  // namespace

double integrate(const RealFunction& f, double a, double b, std::span<const double> breakpoints,
                 QuadratureOptions options) {
  if (!(b > a)) return 0.0;
  std::vector<double> nodes{a};
  for (double p : breakpoints)
    if (p > a && p < b && std::isfinite(p)) nodes.push_back(p);
  std::sort(nodes.begin() + 1, nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  const bool infinite = std::isinf(b);
  if (!infinite) nodes.push_back(b);

  double err = 0.0, scale = 0.0;
  double total = nodes.size() > 1 ? finite_pieces(f, nodes, options, err, scale) : 0.0;
  if (infinite) {
    double v = tail_piece(f, nodes.back(), options, err);
    total += v;
    scale += std::abs(v);
  }
  if (!std::isfinite(total) || !std::isfinite(err))
    throw DivergenceError("integral is not finite");
  if (err > kLooseBound * scale + 1e-300 && err > 1e-14)
    throw DivergenceError("quadrature did not converge (error " + std::to_string(err) + ")");
  return total;
}

}  // namespace hazlab

#include "hazlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hazlab/errors.hpp"

namespace hazlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double interval_length(double a, double b) { return b > a ? b - a : 0.0; }

}  // namespace

KernelSpec KernelSpec::rectangular(double tau) {
  if (!(tau > 0.0)) throw DomainError("rectangular bandwidth must be positive");
  return {KernelKind::rectangular, tau};
}

KernelSpec KernelSpec::ornstein_uhlenbeck(double kappa) {
  if (!(kappa > 0.0)) throw DomainError("OU rate must be positive");
  return {KernelKind::ornstein_uhlenbeck, kappa};
}

std::string KernelSpec::name() const {
  switch (kind) {
    case KernelKind::dykstra_laud: return "dykstra_laud";
    case KernelKind::rectangular: return "rectangular";
    case KernelKind::ornstein_uhlenbeck: return "ornstein_uhlenbeck";
    case KernelKind::exponential: return "exponential";
  }
  return "unknown";
}

KernelSpec KernelSpec::from_name(const std::string& name, double param) {
  if (name == "dykstra_laud" || name == "dl") return dykstra_laud();
  if (name == "rectangular") return rectangular(param);
  if (name == "ornstein_uhlenbeck" || name == "ou") return ornstein_uhlenbeck(param);
  if (name == "exponential") return exponential();
  throw ConfigurationError("unknown kernel '" + name + "'");
}

double eval_kernel(const KernelSpec& k, double t, double x) {
  switch (k.kind) {
    case KernelKind::dykstra_laud:
      return (x >= 0.0 && x <= t) ? 1.0 : 0.0;
    case KernelKind::rectangular:
      return std::abs(t - x) <= k.param ? 1.0 : 0.0;
    case KernelKind::ornstein_uhlenbeck:
      return (x >= 0.0 && x <= t) ? std::sqrt(2.0 * k.param) * std::exp(-k.param * (t - x)) : 0.0;
    case KernelKind::exponential:
      if (!(x > 0.0)) throw DomainError("exponential kernel needs x > 0");
      return std::exp(-t / x) / x;
  }
  return 0.0;
}

double time_integral(const KernelSpec& k, double x, double T) {
  if (!(T > 0.0)) return 0.0;
  switch (k.kind) {
    case KernelKind::dykstra_laud:
      return T > x ? T - x : 0.0;
    case KernelKind::rectangular:
      return interval_length(std::max(0.0, x - k.param), std::min(T, x + k.param));
    case KernelKind::ornstein_uhlenbeck:
      if (x >= T) return 0.0;
      return std::sqrt(2.0 / k.param) * -std::expm1(-k.param * (T - x));
    case KernelKind::exponential:
      if (!(x > 0.0)) return 1.0;
      return -std::expm1(-T / x);
  }
  return 0.0;
}

double cross_time_integral(const KernelSpec& k, double x, double y, double T) {
  if (!(T > 0.0)) return 0.0;
  const double hi = std::max(x, y), lo = std::min(x, y);
  switch (k.kind) {
    case KernelKind::dykstra_laud:
      return T > hi ? T - hi : 0.0;
    case KernelKind::rectangular:
      return interval_length(std::max({0.0, hi - k.param}), std::min(lo + k.param, T));
    case KernelKind::ornstein_uhlenbeck: {
      if (hi >= T) return 0.0;
      const double near = std::exp(-k.param * (hi - lo));
      return std::isinf(T) ? near : near * -std::expm1(-2.0 * k.param * (T - hi));
    }
    case KernelKind::exponential: {
      if (!(lo > 0.0)) return 0.0;
      const double s = x + y;
      return -std::expm1(-T * s / (x * y)) / s;
    }
  }
  return 0.0;
}

double kT0(const KernelSpec& k, double s, double x, double T) { return s * time_integral(k, x, T); }

double kT1(const KernelSpec& k, double s, double x, double t, double y, double T) {
  if (s == 0.0 || t == 0.0) return 0.0;
  return s * t * cross_time_integral(k, x, y, T) / T;
}

double kT2(const KernelSpec& k, double s, double x, double T) {
  return s * s * square_time_integral(k, x, T) / T;
}

double kT3(const KernelSpec& k, const TiltedIntensity& field, double s, double x, double T) {
  if (s == 0.0) return 0.0;
  const double anchor[] = {x};
  double v = integrate_locations(
      k, field, T,
      [&](double w) { return cross_time_integral(k, x, w, T) * field.jump_moment(1.0, w); },
      anchor, 1e-10);
  return s * v / T;
}

double kT4(const KernelSpec& k, std::span<const Atom> atoms, double s, double x, double T) {
  double total = 0.0;
  for (const auto& a : atoms) total += kT1(k, s, x, a.weight, a.location, T);
  return total;
}

Window location_support(const KernelSpec& k, double T) {
  switch (k.kind) {
    case KernelKind::dykstra_laud:
    case KernelKind::ornstein_uhlenbeck:
      return {0.0, T};
    case KernelKind::rectangular:
      return {0.0, T + k.param};
    case KernelKind::exponential:
      return {0.0, kInf};
  }
  return {0.0, T};
}

Window kernel_support_at(const KernelSpec& k, double t) {
  switch (k.kind) {
    case KernelKind::dykstra_laud:
    case KernelKind::ornstein_uhlenbeck:
      return {0.0, t};
    case KernelKind::rectangular:
      return {std::max(0.0, t - k.param), t + k.param};
    case KernelKind::exponential:
      return {0.0, kInf};
  }
  return {0.0, t};
}

std::vector<double> location_breakpoints(const KernelSpec& k, double T,
                                         std::span<const double> anchors) {
  std::vector<double> b(anchors.begin(), anchors.end());
  if (std::isfinite(T)) b.push_back(T);
  switch (k.kind) {
    case KernelKind::rectangular: {
      const double tau = k.param;
      for (double a : anchors)
        for (double d : {-2.0 * tau, -tau, tau, 2.0 * tau}) b.push_back(a + d);
      for (double p : {tau, 2.0 * tau, T - tau, T + tau}) b.push_back(p);
      break;
    }
    case KernelKind::ornstein_uhlenbeck: {
      // resolve the boundary layers of width 1/kappa
      const double w = 1.0 / k.param;
      for (double a : anchors)
        for (double d : {-8.0 * w, -2.0 * w, 2.0 * w, 8.0 * w}) b.push_back(a + d);
      for (double d : {2.0 * w, 8.0 * w}) {
        b.push_back(d);
        b.push_back(T - d);
      }
      break;
    }
    case KernelKind::exponential: {
      const double scale = std::isfinite(T) ? std::max(T, 1.0) : 1.0;
      for (double p : {0.05, 0.2, 1.0, 4.0}) b.push_back(p);
      for (double m : {0.1, 1.0, 10.0, 100.0}) b.push_back(m * scale);
      for (double a : anchors)
        for (double m : {0.25, 4.0}) b.push_back(a * m);
      break;
    }
    case KernelKind::dykstra_laud:
      break;
  }
  std::erase_if(b, [](double v) { return !(v > 0.0) || !std::isfinite(v); });
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

double integrate_locations(const KernelSpec& k, const TiltedIntensity& field, double T,
                           const RealFunction& f, std::span<const double> extra_breaks,
                           double rel_tol) {
  Window w = location_support(k, T);
  // tilt kinks are plain breakpoints; only kernel anchors get boundary layers
  auto breaks = location_breakpoints(k, T, extra_breaks);
  for (double kink : field.kinks)
    if (kink > w.lower && kink < w.upper) breaks.push_back(kink);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  QuadratureOptions o;
  o.rel_tol = rel_tol;
  return field.intensity.base.integrate(f, w.lower, w.upper, breaks, o);
}

ContractionNorms contraction_norms(const KernelSpec& k, const TiltedIntensity& field, double T,
                                   bool include_contractions, double rel_tol) {
  if (!(T > 0.0)) throw DomainError("contraction norms need T > 0");
  auto c = [&](double x, double y) { return cross_time_integral(k, x, y, T) / T; };
  double fixed[5] = {0, 0, 0, 0, 0};
  if (field.is_prior())
    for (int j = 1; j <= 4; ++j) fixed[j] = moment(field.intensity, j);
  auto m = [&](int j, double x) { return field.is_prior() ? fixed[j] : field.jump_moment(j, x); };
  ContractionNorms out;

  out.l2_squared = integrate_locations(
      k, field, T,
      [&](double x) {
        const double a[] = {x};
        return m(2, x) * integrate_locations(
                             k, field, T, [&](double y) { double v = c(x, y); return m(2, y) * v * v; },
                             a, rel_tol * 1e-2);
      },
      {}, rel_tol);
  out.l4_fourth = integrate_locations(
      k, field, T,
      [&](double x) {
        const double a[] = {x};
        return m(4, x) * integrate_locations(
                             k, field, T,
                             [&](double y) { double v = c(x, y); v *= v; return m(4, y) * v * v; },
                             a, rel_tol * 1e-2);
      },
      {}, rel_tol);
  if (!include_contractions) return out;

  const double loose = std::max(rel_tol, 1e-5);
  // (k1 *_2 k1)(t, x) = t^2 int c(x, y)^2 m2(y) lambda(dy)
  out.star21_squared = integrate_locations(
      k, field, T,
      [&](double x) {
        const double a[] = {x};
        double inner = integrate_locations(
            k, field, T, [&](double y) { double v = c(x, y); return m(2, y) * v * v; }, a, loose);
        return m(4, x) * inner * inner;
      },
      {}, loose);
  // (k1 *_1 k1)(t1, x1; t2, x2) = t1 t2 int c(x1, y) c(y, x2) m2(y) lambda(dy)
  out.star11_squared = integrate_locations(
      k, field, T,
      [&](double x1) {
        const double a1[] = {x1};
        return m(2, x1) * integrate_locations(
                              k, field, T,
                              [&](double x2) {
                                const double a2[] = {x1, x2};
                                double inner = integrate_locations(
                                    k, field, T,
                                    [&](double y) { return m(2, y) * c(x1, y) * c(y, x2); }, a2,
                                    loose);
                                return m(2, x2) * inner * inner;
                              },
                              a1, loose);
      },
      {}, loose);
  return out;
}

}  // namespace hazlab

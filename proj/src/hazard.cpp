#include "hazlab/hazard.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "hazlab/errors.hpp"

namespace hazlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class F>
double sum_atoms(const HazardRealization& r, F&& f) {
  double s = 0.0;
  for (const auto& a : r.crm.atoms) s += a.weight * f(a.location);
  for (const auto& a : r.fixed_atoms) s += a.weight * f(a.location);
  return s;
}

}  // namespace

double hazard_at(const HazardRealization& r, double t) {
  return sum_atoms(r, [&](double x) { return eval_kernel(r.kernel, t, x); });
}

double cumulative_hazard(const HazardRealization& r, double T) {
  if (!(T > 0.0)) return 0.0;
  return sum_atoms(r, [&](double x) { return time_integral(r.kernel, x, T); });
}

SurvivalDensity survival_and_density(const HazardRealization& r, double t) {
  SurvivalDensity out;
  out.survival = std::exp(-cumulative_hazard(r, t));
  out.density = hazard_at(r, t) * out.survival;
  return out;
}

double lifetime_for_level(const HazardRealization& r, double level) {
  if (!(level > 0.0)) return 0.0;
  double horizon = r.crm.window.upper > 0.0 ? r.crm.window.upper : kInf;
  if (r.kernel.kind == KernelKind::rectangular && std::isfinite(horizon)) horizon += r.kernel.param;
  double lo = 0.0, hi;
  if (std::isfinite(horizon)) {
    hi = horizon;
    if (cumulative_hazard(r, hi) < level)
      throw HorizonError("cumulative hazard saturates below the requested level in the window");
  } else {
    hi = 1.0;
    while (cumulative_hazard(r, hi) < level) {
      hi *= 2.0;
      if (hi > 1e15) throw HorizonError("cumulative hazard does not reach the requested level");
    }
  }
  // Newton on H(t) = level, safeguarded by the bracket.
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const double f = cumulative_hazard(r, t) - level;
    if (std::abs(f) <= 1e-11 * std::max(1.0, level)) return t;
    if (f > 0.0)
      hi = t;
    else
      lo = t;
    const double h = hazard_at(r, t);
    double next = h > 0.0 ? t - f / h : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) return next;
    t = next;
  }
  return t;
}

double sample_lifetime(const HazardRealization& r, RngStream& rng) {
  return lifetime_for_level(r, rng.exponential());
}

std::vector<Atom> merged_atoms(const HazardRealization& r) {
  std::vector<Atom> fixed = r.fixed_atoms;
  std::sort(fixed.begin(), fixed.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  std::vector<Atom> out(r.crm.atoms.size() + fixed.size());
  std::merge(r.crm.atoms.begin(), r.crm.atoms.end(), fixed.begin(), fixed.end(), out.begin(),
             [](const Atom& a, const Atom& b) { return a.location < b.location; });
  return out;
}

double quadratic_form_reference(const KernelSpec& k, std::span<const Atom> atoms, double T) {
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Atom& a = atoms[i];
    total += a.weight * a.weight * cross_time_integral(k, a.location, a.location, T);
    for (std::size_t j = i + 1; j < atoms.size(); ++j)
      total += 2.0 * a.weight * atoms[j].weight *
               cross_time_integral(k, a.location, atoms[j].location, T);
  }
  return total;
}

double quadratic_form_parallel(const KernelSpec& k, std::span<const Atom> atoms, double T) {
  const auto n = static_cast<long long>(atoms.size());
  double total = 0.0;
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : total)
  for (long long i = 0; i < n; ++i) {
    const Atom& a = atoms[i];
    double row = 0.5 * a.weight * cross_time_integral(k, a.location, a.location, T);
    for (long long j = i + 1; j < n; ++j)
      row += atoms[j].weight * cross_time_integral(k, a.location, atoms[j].location, T);
    total += 2.0 * a.weight * row;
  }
  return total;
}

double quadratic_form_sweep(const KernelSpec& k, std::span<const Atom> atoms, double T) {
  switch (k.kind) {
    case KernelKind::dykstra_laud: {
      // (T - max)^+ : the later atom of each pair sets the overlap.
      double total = 0.0, before = 0.0;
      for (const auto& a : atoms) {
        if (a.location >= T) break;
        total += a.weight * (T - a.location) * (a.weight + 2.0 * before);
        before += a.weight;
      }
      return total;
    }
    case KernelKind::ornstein_uhlenbeck: {
      // e^{-kappa|x-y|} - e^{kappa(x+y-2T)} on x, y < T
      const double kappa = k.param;
      double near = 0.0, run = 0.0, edge = 0.0, prev = 0.0;
      bool first = true;
      for (const auto& a : atoms) {
        if (a.location >= T) break;
        run = first ? 0.0 : run * std::exp(-kappa * (a.location - prev));
        near += a.weight * (a.weight + 2.0 * run);
        run += a.weight;
        prev = a.location;
        first = false;
        edge += a.weight * std::exp(kappa * (a.location - T));
      }
      return near - edge * edge;
    }
    case KernelKind::rectangular: {
      // pairs within 2 tau overlap on [x_j - tau, x_i + tau] intersected with [0, T]
      const double tau = k.param;
      double total = 0.0, w_sum = 0.0, reach = 0.0;
      std::size_t tail = 0;
      for (std::size_t j = 0; j < atoms.size(); ++j) {
        const Atom& b = atoms[j];
        if (b.location > T + tau) break;
        while (atoms[tail].location < b.location - 2.0 * tau) {
          w_sum -= atoms[tail].weight;
          reach -= atoms[tail].weight * std::min(atoms[tail].location + tau, T);
          ++tail;
        }
        if (tail == j) w_sum = reach = 0.0;
        const double left = std::max(b.location - tau, 0.0);
        total += 2.0 * b.weight * (reach - w_sum * left);
        total += b.weight * b.weight * cross_time_integral(k, b.location, b.location, T);
        w_sum += b.weight;
        reach += b.weight * std::min(b.location + tau, T);
      }
      return total;
    }
    case KernelKind::exponential:
      return quadratic_form_parallel(k, atoms, T);
  }
  return 0.0;
}

FunctionalSample path_functionals(const HazardRealization& r, double T, bool quadratic) {
  if (!(T > 0.0)) throw DomainError("path functionals need T > 0");
  FunctionalSample out;
  out.horizon = T;
  if (!quadratic) {
    out.cumulative_hazard = cumulative_hazard(r, T);
    out.path_second_moment = out.path_variance = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  auto atoms = merged_atoms(r);
  double H = 0.0;
  for (const auto& a : atoms) H += a.weight * time_integral(r.kernel, a.location, T);
  out.cumulative_hazard = H;
  out.path_second_moment = quadratic_form_sweep(r.kernel, atoms, T) / T;
  out.path_variance = out.path_second_moment - (H / T) * (H / T);
  return out;
}

double mean_hazard(const KernelSpec& k, const TiltedIntensity& field, double t) {
  Window w = kernel_support_at(k, t);
  std::vector<double> br = location_breakpoints(k, t, std::array<double, 1>{t});
  br.insert(br.end(), field.kinks.begin(), field.kinks.end());
  return field.intensity.base.integrate(
      [&](double x) { return x > 0.0 || k.kind != KernelKind::exponential
                                 ? eval_kernel(k, t, x) * field.jump_moment(1.0, x)
                                 : 0.0; },
      w.lower, w.upper, br);
}

PriorMoments prior_moments(const KernelSpec& k, const TiltedIntensity& field, double T) {
  PriorMoments out;
  out.mean_cumulative = integrate_locations(
      k, field, T, [&](double x) { return time_integral(k, x, T) * field.jump_moment(1.0, x); });
  out.var_cumulative = integrate_locations(k, field, T, [&](double x) {
    double v = time_integral(k, x, T);
    return v * v * field.jump_moment(2.0, x);
  });
  return out;
}

double mean_path_second_moment(const KernelSpec& k, const TiltedIntensity& field, double T) {
  const double diag = integrate_locations(k, field, T, [&](double x) {
    return square_time_integral(k, x, T) * field.jump_moment(2.0, x);
  });
  const double cross = integrate_locations(
      k, field, T,
      [&](double x) {
        const double a[] = {x};
        return field.jump_moment(1.0, x) *
               integrate_locations(
                   k, field, T,
                   [&](double y) { return cross_time_integral(k, x, y, T) * field.jump_moment(1.0, y); },
                   a, 1e-10);
      },
      {}, 1e-9);
  return (diag + cross) / T;
}

}  // namespace hazlab

#include "hazlab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hazlab/errors.hpp"
#include "hazlab/hazard.hpp"
#include "hazlab/parallel.hpp"
#include "hazlab/statistics.hpp"

namespace hazlab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_base(const KernelSpec& kernel, const GeneralizedGammaIntensity& in) {
  const bool want_iw = kernel.kind == KernelKind::exponential;
  const bool is_iw = in.base.kind() == BaseMeasureKind::inverse_weibull;
  const bool is_leb = in.base.kind() == BaseMeasureKind::lebesgue;
  if (want_iw ? !is_iw : !is_leb)
    throw UnsupportedError("no CLT constants for kernel " + kernel.name() + " with this base measure");
}

struct Moments {
  double k1, k2, k3, k4;
};

Moments jump_moments(const GeneralizedGammaIntensity& in) {
  return {moment(in, 1), moment(in, 2), moment(in, 3), moment(in, 4)};
}

TiltedIntensity field_for(const GeneralizedGammaIntensity& in, const ConditionContext& ctx) {
  return ctx.model ? ctx.model->posterior_field() : TiltedIntensity::prior(in);
}

// Weighted moment integral of a polynomial s^p a(x)^q b(x)^r-type integrand.
double moment_integral(const KernelSpec& k, const TiltedIntensity& field, double T,
                       const std::function<double(double)>& f, std::span<const double> anchors = {}) {
  return integrate_locations(k, field, T, f, anchors, 1e-9);
}

ConditionTrajectory make(const std::string& name, const std::string& description, Expectation e,
                         std::span<const double> grid) {
  ConditionTrajectory c;
  c.name = name;
  c.description = description;
  c.expectation = e;
  c.horizons.assign(grid.begin(), grid.end());
  c.values.assign(grid.size(), 0.0);
  return c;
}

void set_target(ConditionTrajectory& c, double target, const std::string& provenance) {
  if (std::isfinite(target)) {
    c.target = target;
    c.provenance = provenance;
  }
}

std::vector<double> anchor_locations(std::span<const Atom> atoms) {
  std::vector<double> a;
  for (const auto& x : atoms) a.push_back(x.location);
  return a;
}

double atom_kernel_sum(const KernelSpec& k, std::span<const Atom> atoms, double x, double T) {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight * cross_time_integral(k, x, a.location, T) / T;
  return s;
}

void finish(ConditionReport& r) {
  r.all_passed = true;
  for (auto& c : r.conditions) {
    if (c.expectation != Expectation::bracket) finalize_trajectory(c);
    if (c.expectation != Expectation::informational) r.all_passed = r.all_passed && c.passed;
  }
}

ConditionReport header(const std::string& family, const KernelSpec& k,
                       const GeneralizedGammaIntensity& in, const ConditionContext& ctx) {
  ConditionReport r;
  r.family = family;
  r.kernel = k;
  r.sigma = in.sigma;
  r.gamma = in.gamma;
  r.posterior = ctx.model != nullptr;
  return r;
}

}  // namespace

std::string functional_name(Functional f) {
  switch (f) {
    case Functional::linear: return "linear";
    case Functional::path_second_moment: return "path_second_moment";
    case Functional::path_variance: return "path_variance";
  }
  return "unknown";
}

Functional functional_from_name(const std::string& name) {
  if (name == "linear" || name == "cumulative_hazard") return Functional::linear;
  if (name == "path_second_moment") return Functional::path_second_moment;
  if (name == "path_variance") return Functional::path_variance;
  throw ConfigurationError("unknown functional '" + name + "'");
}

double CltPrediction::rate(double T) const { return std::pow(T, rate_exponent); }

double CltPrediction::trend(double T) const {
  return trend_exponent == 0.0 ? trend_coefficient : trend_coefficient * std::pow(T, trend_exponent);
}

QuadraticConstants quadratic_constants(const KernelSpec& kernel,
                                       const GeneralizedGammaIntensity& in) {
  require_base(kernel, in);
  const Moments K = jump_moments(in);
  QuadraticConstants q;
  q.sigma1_sq = q.sigma4_sq = q.sigma5_sq = q.delta = kNaN;
  switch (kernel.kind) {
    case KernelKind::ornstein_uhlenbeck: {
      const double kap = kernel.param;
      q.rate_c0 = -0.5;
      q.rate_c1 = 0.5;
      q.sigma1_sq = 2.0 * K.k2 * K.k2 / kap;
      q.sigma4_sq = K.k4 + 8.0 * K.k3 * K.k1 / kap + 16.0 * K.k2 * K.k1 * K.k1 / (kap * kap);
      q.sigma5_sq = K.k4;
      q.delta = std::pow(2.0, 1.5) * K.k1 / std::sqrt(kap);
      break;
    }
    case KernelKind::rectangular: {
      const double t = kernel.param;
      q.rate_c0 = -0.5;
      q.rate_c1 = 0.5;
      q.sigma1_sq = 32.0 * t * t * t * K.k2 * K.k2 / 3.0;
      q.sigma4_sq = 4.0 * t * t * K.k4 + 32.0 * t * t * t * K.k1 * K.k3 +
                    64.0 * t * t * t * t * K.k1 * K.k1 * K.k2;
      q.sigma5_sq = 4.0 * t * t * K.k4;
      q.delta = 4.0 * t * K.k1;
      q.provenance = "derived";
      break;
    }
    case KernelKind::exponential:
      q.rate_c0 = -0.25;
      q.rate_c1 = 1.0;
      q.sigma1_sq = K.k2 * K.k2 / 16.0;
      q.provenance = "derived";
      break;
    case KernelKind::dykstra_laud:
      q.rate_c0 = -1.5;
      q.rate_c1 = -1.0;
      q.provenance = "derived";
      break;
  }
  return q;
}

CltPrediction clt_prediction(const KernelSpec& kernel, const GeneralizedGammaIntensity& in,
                             Functional functional) {
  require_base(kernel, in);
  const Moments K = jump_moments(in);
  const QuadraticConstants q = quadratic_constants(kernel, in);
  CltPrediction p;
  p.functional = functional;
  p.kernel = kernel;
  if (functional == Functional::linear) {
    switch (kernel.kind) {
      case KernelKind::ornstein_uhlenbeck:
        p.rate_exponent = -0.5;
        p.trend_coefficient = std::sqrt(2.0 / kernel.param) * K.k1;
        p.trend_exponent = 1.0;
        p.limit_variance = 2.0 * K.k2 / kernel.param;
        break;
      case KernelKind::dykstra_laud:
        p.rate_exponent = -1.5;
        p.trend_coefficient = 0.5 * K.k1;
        p.trend_exponent = 2.0;
        p.limit_variance = K.k2 / 3.0;
        break;
      case KernelKind::exponential:
        p.rate_exponent = -0.25;
        p.trend_coefficient = K.k1;
        p.trend_exponent = 0.5;
        p.limit_variance = (2.0 - std::sqrt(2.0)) * K.k2;
        break;
      case KernelKind::rectangular:
        p.rate_exponent = -0.5;
        p.trend_coefficient = 2.0 * kernel.param * K.k1;
        p.trend_exponent = 1.0;
        p.limit_variance = 4.0 * kernel.param * kernel.param * K.k2;
        p.provenance = "derived";
        break;
    }
    return p;
  }
  if (kernel.kind == KernelKind::dykstra_laud) {
    p.applicable = false;
    p.reason = "the quadratic-functional conditions already fail for the prior";
    p.provenance = "derived";
    return p;
  }
  if (kernel.kind == KernelKind::exponential) {
    p.applicable = false;
    p.reason = "the fourth-power norm condition for path second moments does not vanish";
    p.rate_exponent = 1.0;
    p.provenance = "paper";
    return p;
  }
  p.rate_exponent = q.rate_c1;
  p.trend_exponent = 0.0;
  p.provenance = q.provenance;
  double drift = 0.0;
  if (kernel.kind == KernelKind::ornstein_uhlenbeck)
    drift = 2.0 * K.k1 * K.k1 / kernel.param;
  else
    drift = 4.0 * kernel.param * kernel.param * K.k1 * K.k1;
  const double local = kernel.kind == KernelKind::rectangular ? 2.0 * kernel.param * K.k2 : K.k2;
  if (functional == Functional::path_second_moment) {
    p.trend_coefficient = local + drift;
    p.limit_variance = q.sigma1_sq + q.sigma4_sq;
  } else {
    p.trend_coefficient = local;
    p.limit_variance = q.sigma1_sq + q.sigma5_sq;
  }
  return p;
}

std::vector<double> default_condition_grid() { return {10.0, 30.0, 100.0, 300.0, 1000.0}; }

const ConditionTrajectory& ConditionReport::find(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return c;
  throw ConfigurationError("condition '" + name + "' not in report");
}

void finalize_trajectory(ConditionTrajectory& c) {
  const std::size_t n = c.values.size();
  if (n == 0) return;
  c.last_value = c.values.back();
  c.richardson = c.last_value;
  c.relative_change = 0.0;
  if (n >= 2) {
    const double prev = c.values[n - 2];
    c.relative_change = std::abs(c.last_value - prev) / std::max(std::abs(c.last_value), 1e-300);
  }
  if (n >= 3) {
    const double a = c.values[n - 3], b = c.values[n - 2], d = c.last_value;
    const double den = (d - b) - (b - a);
    if (std::abs(den) > 1e-14 * std::max({std::abs(a), std::abs(b), std::abs(d)}) &&
        (d - b) * (b - a) > 0.0)
      c.richardson = d - (d - b) * (d - b) / den;
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(c.values[i]) > 0.0 && c.horizons[i] > 0.0) {
      lx.push_back(std::log(c.horizons[i]));
      ly.push_back(std::log(std::abs(c.values[i])));
    }
  c.log_slope = lx.size() >= 2 ? least_squares(lx, ly).slope : 0.0;
  c.converged = c.relative_change < kConvergenceTolerance;
  switch (c.expectation) {
    case Expectation::limit:
      c.passed = c.converged &&
                 (!c.target || std::abs(c.last_value - *c.target) <= kTargetTolerance * std::abs(*c.target));
      break;
    case Expectation::vanishing: {
      const bool all_zero = std::all_of(c.values.begin(), c.values.end(),
                                        [](double v) { return std::abs(v) < 1e-300; });
      const bool decreasing = n < 2 || std::abs(c.last_value) < std::abs(c.values[n - 2]);
      c.passed = all_zero || (c.log_slope <= -0.1 && decreasing);
      break;
    }
    case Expectation::non_vanishing:
      c.passed = c.log_slope > -0.1;
      break;
    case Expectation::bracket:
    case Expectation::informational:
      c.passed = true;
      break;
  }
}

ConditionReport check_linear_conditions(const KernelSpec& k, const GeneralizedGammaIntensity& in,
                                          const ConditionContext& ctx, std::span<const double> grid) {
  const TiltedIntensity field = field_for(in, ctx);
  const QuadraticConstants q = quadratic_constants(k, in);
  const CltPrediction lin = clt_prediction(k, in, Functional::linear);
  ConditionReport r = header("linear", k, in, ctx);

  auto var = make("linear_variance", "C0^2 int [k0]^2 dnu -> sigma0^2", Expectation::limit, grid);
  set_target(var, lin.limit_variance, lin.provenance);
  auto third = make("linear_third_moment", "C0^3 int [k0]^3 dnu -> 0", Expectation::vanishing, grid);
  auto shift = make("fixed_atom_shift", "C0 sum_j J_j int_0^T k(t, X_j) dt -> m",
                    Expectation::vanishing, grid);
  auto lower = make("linear_variance_lower_bound", "C0^2 int [k0]^2 under the lower intensity",
                    Expectation::informational, grid);
  auto upper = make("linear_variance_upper_bound", "C0^2 int [k0]^2 under the prior intensity",
                    Expectation::informational, grid);
  auto ratio = make("posterior_prior_mean_ratio", "E[H^{n,*}(T)] / E[H(T)] -> 1",
                    Expectation::informational, grid);
  const bool post = ctx.model != nullptr;
  const TiltedIntensity prior = TiltedIntensity::prior(in);
  const TiltedIntensity low = post ? ctx.model->lower_bound_field() : prior;

  parallel_for(grid.size(), [&](std::size_t g) {
    const double T = grid[g];
    const double c0 = std::pow(T, q.rate_c0);
    auto sq = [&](const TiltedIntensity& f) {
      return c0 * c0 * moment_integral(k, f, T, [&](double x) {
               double v = time_integral(k, x, T);
               return v * v * f.jump_moment(2, x);
             });
    };
    var.values[g] = sq(field);
    third.values[g] = c0 * c0 * c0 * moment_integral(k, field, T, [&](double x) {
                        double v = time_integral(k, x, T);
                        return v * v * v * field.jump_moment(3, x);
                      });
    double s = 0.0;
    for (const auto& a : ctx.atoms) s += a.weight * time_integral(k, a.location, T);
    shift.values[g] = c0 * s;
    if (post) {
      lower.values[g] = sq(low);
      upper.values[g] = sq(prior);
      ratio.values[g] = prior_moments(k, field, T).mean_cumulative /
                        prior_moments(k, prior, T).mean_cumulative;
    }
  });
  r.conditions.push_back(var);
  r.conditions.push_back(third);
  if (!ctx.atoms.empty()) {
    shift.target = 0.0;
    shift.provenance = lin.provenance;
    r.conditions.push_back(shift);
  }
  if (post) {
    r.conditions.push_back(lower);
    r.conditions.push_back(upper);
    auto bracket = make("posterior_sandwich", "lower <= posterior <= prior at every T",
                        Expectation::bracket, grid);
    bracket.passed = true;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double slack = 1e-9 * upper.values[g];
      bracket.values[g] = (lower.values[g] <= var.values[g] + slack &&
                           var.values[g] <= upper.values[g] + slack)
                              ? 1.0
                              : 0.0;
      bracket.passed = bracket.passed && bracket.values[g] == 1.0;
    }
    finalize_trajectory(bracket);
    bracket.passed = std::all_of(bracket.values.begin(), bracket.values.end(),
                                 [](double v) { return v == 1.0; });
    r.conditions.push_back(bracket);
    ratio.target = 1.0;
    r.conditions.push_back(ratio);
  }
  finish(r);
  return r;
}

ConditionReport check_quadratic_conditions(const KernelSpec& k, const GeneralizedGammaIntensity& in,
                                          const ConditionContext& ctx, std::span<const double> grid) {
  const TiltedIntensity field = field_for(in, ctx);
  const QuadraticConstants q = quadratic_constants(k, in);
  ConditionReport r = header("path_second_moment", k, in, ctx);
  auto c1 = make("l2_norm", "2 C1^2 ||k1||^2 -> sigma1^2", Expectation::limit, grid);
  set_target(c1, q.sigma1_sq, q.provenance);
  auto c2 = make("l4_norm", "C1^4 ||k1||^4_L4 -> 0", Expectation::vanishing, grid);
  auto c3 = make("contraction_11", "C1^4 ||k1 *_1 k1||^2 -> 0", Expectation::vanishing, grid);
  auto c4 = make("contraction_21", "C1^4 ||k1 *_2 k1||^2 -> 0", Expectation::vanishing, grid);
  auto c5 = make("diagonal_l2", "C1^2 ||k2 + 2 k3 + 2 k4||^2 -> sigma4^2", Expectation::limit, grid);
  set_target(c5, q.sigma4_sq, q.provenance);
  auto c6 = make("diagonal_l3", "C1^3 ||k2 + 2 k3 + 2 k4||^3_L3 -> 0", Expectation::vanishing, grid);
  auto c7 = make("fixed_atom_square", "(C1/T) int (sum_j J_j k(t, X_j))^2 dt -> v",
                 Expectation::vanishing, grid);
  const bool contractions = true;
  const auto anchors = anchor_locations(ctx.atoms);

  parallel_for(grid.size(), [&](std::size_t g) {
    const double T = grid[g];
    const double C1 = std::pow(T, q.rate_c1);
    const ContractionNorms n = contraction_norms(k, field, T, contractions, 1e-8);
    c1.values[g] = 2.0 * C1 * C1 * n.l2_squared;
    c2.values[g] = std::pow(C1, 4) * n.l4_fourth;
    c3.values[g] = std::pow(C1, 4) * n.star11_squared;
    c4.values[g] = std::pow(C1, 4) * n.star21_squared;
    // f(s, x) = s^2 a(x) + s b(x)
    auto a = [&](double x) { return square_time_integral(k, x, T) / T; };
    auto b = [&](double x) {
      return 2.0 * kT3(k, field, 1.0, x, T) + 2.0 * atom_kernel_sum(k, ctx.atoms, x, T);
    };
    double l2 = 0.0, l3 = 0.0;
    l2 = moment_integral(
        k, field, T,
        [&](double x) {
          const double ax = a(x), bx = b(x);
          return field.jump_moment(4, x) * ax * ax + 2.0 * field.jump_moment(3, x) * ax * bx +
                 field.jump_moment(2, x) * bx * bx;
        },
        anchors);
    l3 = moment_integral(
        k, field, T,
        [&](double x) {
          const double ax = a(x), bx = b(x);
          return field.jump_moment(6, x) * ax * ax * ax + 3.0 * field.jump_moment(5, x) * ax * ax * bx +
                 3.0 * field.jump_moment(4, x) * ax * bx * bx + field.jump_moment(3, x) * bx * bx * bx;
        },
        anchors);
    c5.values[g] = C1 * C1 * l2;
    c6.values[g] = C1 * C1 * C1 * l3;
    double quad = 0.0;
    for (const auto& u : ctx.atoms)
      for (const auto& w : ctx.atoms)
        quad += u.weight * w.weight * cross_time_integral(k, u.location, w.location, T);
    c7.values[g] = C1 / T * quad;
  });
  for (auto* c : {&c1, &c2, &c3, &c4, &c5, &c6}) {
    if (!contractions && (c == &c3 || c == &c4)) continue;
    r.conditions.push_back(*c);
  }
  if (!ctx.atoms.empty()) {
    c7.target = 0.0;
    c7.provenance = q.provenance;
    r.conditions.push_back(c7);
  }
  finish(r);
  return r;
}

ConditionReport check_centred_quadratic_conditions(const KernelSpec& k, const GeneralizedGammaIntensity& in,
                                           const ConditionContext& ctx, std::span<const double> grid) {
  const TiltedIntensity field = field_for(in, ctx);
  const QuadraticConstants q = quadratic_constants(k, in);
  ConditionReport r = header("path_variance", k, in, ctx);
  auto c1 = make("rate_ratio", "C1 / (T C0)^2 -> 0", Expectation::vanishing, grid);
  auto c2 = make("delta", "2 C1 E[H^{n,*}(T)] / (T^2 C0) -> delta", Expectation::limit, grid);
  set_target(c2, q.delta, q.provenance);
  auto c3 = make("centred_diagonal_l2", "||C1 (k2 + 2 k3 + 2 k4) - delta C0 k0||^2 -> sigma5^2",
                 Expectation::limit, grid);
  set_target(c3, q.sigma5_sq, q.provenance);
  const auto anchors = anchor_locations(ctx.atoms);

  parallel_for(grid.size(), [&](std::size_t g) {
    const double T = grid[g];
    const double C0 = std::pow(T, q.rate_c0), C1 = std::pow(T, q.rate_c1);
    c1.values[g] = C1 / ((T * C0) * (T * C0));
    const double mean = prior_moments(k, field, T).mean_cumulative;
    c2.values[g] = 2.0 * C1 * mean / (T * T * C0);
    const double delta = std::isfinite(q.delta) ? q.delta : c2.values[g];
    c3.values[g] = moment_integral(
        k, field, T,
        [&](double x) {
          const double A = C1 * square_time_integral(k, x, T) / T;
          const double B = C1 * (2.0 * kT3(k, field, 1.0, x, T) + 2.0 * atom_kernel_sum(k, ctx.atoms, x, T)) -
                           delta * C0 * time_integral(k, x, T);
          return field.jump_moment(4, x) * A * A + 2.0 * field.jump_moment(3, x) * A * B +
                 field.jump_moment(2, x) * B * B;
        },
        anchors);
  });
  r.conditions.push_back(c1);
  r.conditions.push_back(c2);
  r.conditions.push_back(c3);
  finish(r);
  return r;
}

}  // namespace hazlab

#include "hazlab/crm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "hazlab/errors.hpp"

namespace hazlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Upper incomplete gamma by modified Lentz on the Legendre continued fraction.
// Valid for any real a; used for z >= 1.
double upper_gamma_cf(double a, double z) {
  const double tiny = 1e-300;
  double b = z + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-z + a * std::log(z)) * h;
}

// Gamma(a, z) for a in (-1, 0), z < 1, by quadrature in t = e^u.
double upper_gamma_quadrature(double a, double z) {
  auto f = [a](double u) { return std::exp(a * u - std::exp(u)); };
  QuadratureOptions o;
  o.rel_tol = 1e-13;
  double head = integrate(f, std::log(z), 0.0, {}, o);
  return head + upper_gamma_cf(a, 1.0);
}

// Gamma(a, z) for a in (-1, 0] and z > 0.
double upper_gamma_nonpositive(double a, double z) {
  if (a == 0.0) return boost::math::expint(1, z);
  if (z >= 1.0) return upper_gamma_cf(a, z);
  if (a > -1e-2) return upper_gamma_quadrature(a, z);
  // Gamma(a+1, z) = a Gamma(a, z) + z^a e^{-z}, with Gamma(b, z) = Gamma(b) - gamma(b, z)
  // and the positive-term series gamma(b, z) = z^b e^{-z} sum_k z^k / (b (b+1) ... (b+k)).
  const double b = a + 1.0;
  const double za = std::exp(a * std::log(z) - z);
  double term = 1.0 / b, sum = term;
  for (int k = 1; k < 200 && term > 1e-17 * sum; ++k) {
    term *= z / (b + k);
    sum += term;
  }
  return (std::tgamma(b) - z * za * sum - za) / a;
}

double gamma_one_minus(const GeneralizedGammaIntensity& in) { return std::tgamma(1.0 - in.sigma); }

// Lebesgue-restricted inverse-Weibull CDF, F(x) = Gamma(-1/2, 1/x) / (2 sqrt(pi)).
double inverse_weibull_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return kInf;
  const double z = 1.0 / x;
  if (z >= 1.0) return upper_gamma_cf(-0.5, z) / (2.0 * std::sqrt(std::numbers::pi));
  return std::sqrt(x / std::numbers::pi) * std::exp(-z) - boost::math::erfc(std::sqrt(z));
}

}  // namespace

BaseMeasure BaseMeasure::lebesgue() { return BaseMeasure{}; }

BaseMeasure BaseMeasure::inverse_weibull() {
  BaseMeasure b;
  b.kind_ = BaseMeasureKind::inverse_weibull;
  return b;
}

BaseMeasure BaseMeasure::discrete(std::vector<double> locations, std::vector<double> masses) {
  if (locations.size() != masses.size() || locations.empty())
    throw ConfigurationError("discrete base measure needs matching, nonempty atoms");
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (!(masses[i] > 0.0) || locations[i] < 0.0)
      throw ConfigurationError("discrete base measure atoms must be positive");
    if (i > 0 && !(locations[i] > locations[i - 1]))
      throw ConfigurationError("discrete base measure locations must increase");
  }
  BaseMeasure b;
  b.kind_ = BaseMeasureKind::discrete;
  b.locations_ = std::move(locations);
  b.masses_ = std::move(masses);
  return b;
}

double BaseMeasure::density(double x) const {
  switch (kind_) {
    case BaseMeasureKind::lebesgue:
      return x >= 0.0 ? 1.0 : 0.0;
    case BaseMeasureKind::inverse_weibull:
      if (x <= 0.0) return 0.0;
      return std::exp(-1.0 / x) / (2.0 * std::sqrt(std::numbers::pi * x));
    case BaseMeasureKind::discrete:
      break;
  }
  throw DomainError("discrete base measure has no density");
}

double BaseMeasure::window_mass(double a, double b) const {
  a = std::max(a, 0.0);
  if (!(b > a)) return 0.0;
  switch (kind_) {
    case BaseMeasureKind::lebesgue:
      return b - a;
    case BaseMeasureKind::inverse_weibull:
      return std::isinf(b) ? kInf : inverse_weibull_cdf(b) - inverse_weibull_cdf(a);
    case BaseMeasureKind::discrete: {
      double m = 0.0;
      for (std::size_t i = 0; i < locations_.size(); ++i)
        if (locations_[i] >= a && locations_[i] <= b) m += masses_[i];
      return m;
    }
  }
  return 0.0;
}

double BaseMeasure::integrate(const RealFunction& f, double a, double b,
                              std::span<const double> breakpoints,
                              QuadratureOptions options) const {
  a = std::max(a, 0.0);
  if (!(b > a)) return 0.0;
  switch (kind_) {
    case BaseMeasureKind::lebesgue:
      return hazlab::integrate(f, a, b, breakpoints, options);
    case BaseMeasureKind::inverse_weibull: {
      std::vector<double> br(breakpoints.begin(), breakpoints.end());
      br.push_back(1.0);
      return hazlab::integrate([&](double x) { return x > 0.0 ? f(x) * density(x) : 0.0; }, a, b,
                               br, options);
    }
    case BaseMeasureKind::discrete: {
      double s = 0.0;
      for (std::size_t i = 0; i < locations_.size(); ++i)
        if (locations_[i] >= a && locations_[i] <= b) s += masses_[i] * f(locations_[i]);
      return s;
    }
  }
  return 0.0;
}

WindowSampler::WindowSampler(const BaseMeasure& base, Window window)
    : kind_(base.kind()), window_(window) {
  if (!(window.upper > window.lower) || window.lower < 0.0 || std::isinf(window.upper))
    throw ConfigurationError("sampling window must be a finite interval in [0, inf)");
  mass_ = base.window_mass(window.lower, window.upper);
  if (!(mass_ > 0.0)) throw ConfigurationError("window has zero base-measure mass");
  switch (kind_) {
    case BaseMeasureKind::lebesgue:
      break;
    case BaseMeasureKind::inverse_weibull: {
      if (window.lower != 0.0)
        throw UnsupportedError("inverse-Weibull sampling windows must start at 0");
      // Left end of the spline: below it the restricted CDF is < 1e-18.
      double lo = std::min(1.0, window.upper / 2.0);
      while (inverse_weibull_cdf(lo) > 1e-18 * mass_) lo *= 0.5;
      const int n = 4096;
      const double y0 = std::log(lo), y1 = std::log(window.upper);
      log_x_.resize(n);
      log_cdf_.resize(n);
      for (int i = 0; i < n; ++i) {
        double y = (i == n - 1) ? y1 : y0 + (y1 - y0) * i / (n - 1);
        log_x_[i] = y;
        log_cdf_[i] = std::log(inverse_weibull_cdf(std::exp(y)));
      }
      log_cdf_[n - 1] = std::log(mass_);
      // Fritsch-Carlson slopes of log x as a function of log F.
      std::vector<double> delta(n - 1);
      for (int i = 0; i + 1 < n; ++i)
        delta[i] = (log_x_[i + 1] - log_x_[i]) / (log_cdf_[i + 1] - log_cdf_[i]);
      slope_.assign(n, 0.0);
      slope_[0] = delta[0];
      slope_[n - 1] = delta[n - 2];
      for (int i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) continue;
        double h0 = log_cdf_[i] - log_cdf_[i - 1], h1 = log_cdf_[i + 1] - log_cdf_[i];
        double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
        slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
      break;
    }
    case BaseMeasureKind::discrete: {
      double c = 0.0;
      const auto& loc = base.atom_locations();
      const auto& m = base.atom_masses();
      for (std::size_t i = 0; i < loc.size(); ++i) {
        if (loc[i] < window.lower || loc[i] > window.upper) continue;
        c += m[i];
        cum_.push_back(c);
        atoms_.push_back(loc[i]);
      }
      break;
    }
  }
}

double WindowSampler::quantile(double q) const {
  switch (kind_) {
    case BaseMeasureKind::lebesgue:
      return window_.lower + q * (window_.upper - window_.lower);
    case BaseMeasureKind::inverse_weibull: {
      const double target = std::log(q) + std::log(mass_);
      if (target <= log_cdf_.front()) return std::exp(log_x_.front());
      if (target >= log_cdf_.back()) return window_.upper;
      auto it = std::upper_bound(log_cdf_.begin(), log_cdf_.end(), target);
      std::size_t i = static_cast<std::size_t>(it - log_cdf_.begin()) - 1;
      const double h = log_cdf_[i + 1] - log_cdf_[i];
      const double t = (target - log_cdf_[i]) / h;
      const double t2 = t * t, t3 = t2 * t;
      const double y = (2 * t3 - 3 * t2 + 1) * log_x_[i] + (t3 - 2 * t2 + t) * h * slope_[i] +
                       (-2 * t3 + 3 * t2) * log_x_[i + 1] + (t3 - t2) * h * slope_[i + 1];
      return std::min(std::exp(y), window_.upper);
    }
    case BaseMeasureKind::discrete: {
      auto it = std::lower_bound(cum_.begin(), cum_.end(), q * mass_);
      if (it == cum_.end()) --it;
      return atoms_[static_cast<std::size_t>(it - cum_.begin())];
    }
  }
  return 0.0;
}

GeneralizedGammaIntensity::GeneralizedGammaIntensity(double sigma_, double gamma_, BaseMeasure base_)
    : sigma(sigma_), gamma(gamma_), base(std::move(base_)) {
  if (!(sigma >= 0.0 && sigma < 1.0)) throw DomainError("sigma must lie in [0, 1)");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
}

GeneralizedGammaIntensity GeneralizedGammaIntensity::tilted(double shift) const {
  if (shift < 0.0) throw DomainError("tilt must be nonnegative");
  return GeneralizedGammaIntensity(sigma, gamma + shift, base);
}

double levy_density(const GeneralizedGammaIntensity& in, double v) {
  if (!(v > 0.0)) throw DomainError("levy_density: v must be positive");
  return std::exp(-in.gamma * v - (1.0 + in.sigma) * std::log(v)) / gamma_one_minus(in);
}

double tilted_moment(const GeneralizedGammaIntensity& in, double c, double shift) {
  if (!(c > 0.0)) throw DomainError("moment order must be positive");
  if (!(c > in.sigma)) throw DivergenceError("moment of order <= sigma diverges");
  const double rate = in.gamma + shift;
  return std::exp(std::lgamma(c - in.sigma) - std::lgamma(1.0 - in.sigma) -
                  (c - in.sigma) * std::log(rate));
}

double moment(const GeneralizedGammaIntensity& in, double c) { return tilted_moment(in, c, 0.0); }

double tail_mass(const GeneralizedGammaIntensity& in, double v) {
  if (!(v > 0.0)) throw DomainError("tail_mass: v must be positive");
  if (std::isinf(v)) return 0.0;
  const double z = in.gamma * v;
  return std::pow(in.gamma, in.sigma) * upper_gamma_nonpositive(-in.sigma, z) /
         gamma_one_minus(in);
}

double small_jump_mass(const GeneralizedGammaIntensity& in, double eps) {
  if (eps <= 0.0) return 0.0;
  return moment(in, 1.0) * boost::math::gamma_p(1.0 - in.sigma, in.gamma * eps);
}

double inverse_tail_mass(const GeneralizedGammaIntensity& in, double u, std::optional<double> guess) {
  if (!(u > 0.0)) throw DomainError("inverse_tail_mass: u must be positive");
  const double lu = std::log(u);
  double y;
  if (guess && *guess > 0.0) {
    y = std::log(*guess);
  } else if (in.sigma > 0.0) {
    // N(v) ~ v^{-sigma} / (sigma Gamma(1-sigma)) near zero
    y = -(lu + std::log(in.sigma * std::tgamma(1.0 - in.sigma))) / in.sigma;
    y = std::min(y, std::log(1.0 / in.gamma));
  } else {
    y = std::min(-lu - 0.5772156649015329, 0.0) - std::log(in.gamma);
  }
  double lo = -kInf, hi = kInf;
  const double g1 = gamma_one_minus(in);
  for (int it = 0; it < 200; ++it) {
    const double v = std::exp(y);
    const double n = tail_mass(in, v);
    const double f = std::log(n) - lu;
    if (f > 0.0)
      lo = y;  // N(v) > u: v too small
    else
      hi = y;
    if (std::abs(f) < 1e-14) return v;
    const double rho = std::exp(-in.gamma * v - (1.0 + in.sigma) * y) / g1;
    double step = f * n / (v * rho);  // log-space Newton: f / (-v rho / N)
    step = std::clamp(step, -2.0, 2.0);
    double y_new = y + step;
    if (!(y_new > lo && y_new < hi)) {
      if (std::isfinite(lo) && std::isfinite(hi))
        y_new = 0.5 * (lo + hi);
      else
        y_new = y + (f > 0.0 ? 2.0 : -2.0);
    }
    if (std::abs(y_new - y) < 1e-15 * std::max(1.0, std::abs(y))) return std::exp(y_new);
    y = y_new;
  }
  return std::exp(y);
}

double jump_floor_for_budget(const GeneralizedGammaIntensity& in, double budget) {
  if (!(budget > 0.0 && budget < 1.0)) throw ConfigurationError("truncation budget must be in (0, 1)");
  return boost::math::gamma_p_inv(1.0 - in.sigma, budget) / in.gamma;
}

CrmRealization sample_crm(const GeneralizedGammaIntensity& in, Window window,
                          const TruncationPolicy& policy, RngStream& rng) {
  WindowSampler sampler(in.base, window);
  return sample_crm(in, window, policy, sampler, rng);
}

CrmRealization sample_crm(const GeneralizedGammaIntensity& in, Window window,
                          const TruncationPolicy& policy, const WindowSampler& sampler,
                          RngStream& rng) {
  CrmRealization out;
  out.window = window;
  out.window_mass = sampler.mass();
  const double eps =
      policy.jump_floor > 0.0 ? policy.jump_floor : jump_floor_for_budget(in, policy.budget);
  out.jump_floor = eps;
  out.expected_dropped_mass = out.window_mass * small_jump_mass(in, eps);
  const double allowed = policy.budget * out.window_mass * moment(in, 1.0);
  if (out.expected_dropped_mass > allowed * (1.0 + 1e-9))
    throw ConfigurationError("expected dropped mass " + std::to_string(out.expected_dropped_mass) +
                             " exceeds the truncation budget " + std::to_string(allowed));
  const double level = out.window_mass * tail_mass(in, eps);
  if (level > static_cast<double>(policy.max_atoms))
    throw ConfigurationError("expected atom count " + std::to_string(level) + " exceeds max_atoms");

  // Jumps: arrivals of a unit Poisson process below M N(eps), inverted.
  std::vector<double> jumps;
  jumps.reserve(static_cast<std::size_t>(level + 6.0 * std::sqrt(level) + 16.0));
  double arrival = rng.exponential();
  std::optional<double> guess;
  while (arrival <= level) {
    double v = inverse_tail_mass(in, arrival / out.window_mass, guess);
    v = std::max(v, eps);
    jumps.push_back(v);
    guess = v;
    arrival += rng.exponential();
  }
  const std::size_t n = jumps.size();
  if (n > policy.max_atoms) throw ConfigurationError("atom count exceeds max_atoms");

  // Locations: sorted i.i.d. draws from exponential spacings, paired with a
  // uniformly random permutation of the jumps.
  std::vector<double> spacing(n + 1);
  double total = 0.0;
  for (auto& s : spacing) {
    total += rng.exponential();
    s = total;
  }
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = rng.below(i);
    std::swap(jumps[i - 1], jumps[j]);
  }
  out.atoms.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double q = spacing[i] / total;
    out.atoms[i] = {sampler.quantile(q), jumps[i]};
  }
  return out;
}

double laplace_exponent_at(const GeneralizedGammaIntensity& in, double u) {
  if (u < 0.0) throw DomainError("laplace exponent needs u >= 0");
  if (in.sigma == 0.0) return std::log1p(u / in.gamma);
  return (std::pow(in.gamma + u, in.sigma) - std::pow(in.gamma, in.sigma)) / in.sigma;
}

double laplace_exponent(const GeneralizedGammaIntensity& in, const RealFunction& g, Window window,
                        std::span<const double> breakpoints) {
  auto f = [&](double x) {
    double gx = g(x);
    if (gx < 0.0 || std::isnan(gx)) throw DomainError("laplace_exponent: g must be nonnegative");
    return laplace_exponent_at(in, gx);
  };
  if (std::isinf(window.upper) && !in.base.is_discrete()) {
    // Finiteness test: the contribution of [x, inf) must vanish.
    QuadratureOptions o;
    o.rel_tol = 1e-9;
    double v = in.base.integrate(f, window.lower, window.upper, breakpoints, o);
    if (!std::isfinite(v)) throw DivergenceError("laplace exponent diverges");
    return v;
  }
  return in.base.integrate(f, window.lower, window.upper, breakpoints);
}

TiltedIntensity TiltedIntensity::prior(const GeneralizedGammaIntensity& intensity) {
  return TiltedIntensity{intensity, {}, {}};
}

double TiltedIntensity::jump_moment(double j, double x) const {
  return tilted_moment(intensity, j, tilt_at(x));
}

}  // namespace hazlab

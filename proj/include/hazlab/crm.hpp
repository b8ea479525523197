#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "hazlab/quadrature.hpp"
#include "hazlab/rng.hpp"

namespace hazlab {

enum class BaseMeasureKind { lebesgue, inverse_weibull, discrete };

struct Window {
  double lower = 0.0;
  double upper = 0.0;
};

// Base measure lambda on the half line.
//  - lebesgue:        lambda(dx) = dx
//  - inverse_weibull: lambda(dx) = x^{-1/2} e^{-1/x} (2 sqrt(pi))^{-1} dx
//  - discrete:        finite atoms; only used by enumeration oracles, it
//                     breaks the nonatomic assumption on purpose.
class BaseMeasure {
 public:
  static BaseMeasure lebesgue();
  static BaseMeasure inverse_weibull();
  static BaseMeasure discrete(std::vector<double> locations, std::vector<double> masses);

  BaseMeasureKind kind() const { return kind_; }
  bool is_discrete() const { return kind_ == BaseMeasureKind::discrete; }

  // d lambda / dx; DomainError for discrete measures.
  double density(double x) const;
  // lambda([a, b]); b may be +infinity.
  double window_mass(double a, double b) const;

  const std::vector<double>& atom_locations() const { return locations_; }
  const std::vector<double>& atom_masses() const { return masses_; }

  // Integral of f against lambda over [a, b], with breakpoints.
  double integrate(const RealFunction& f, double a, double b,
                   std::span<const double> breakpoints = {},
                   QuadratureOptions options = {}) const;

 private:
  BaseMeasureKind kind_ = BaseMeasureKind::lebesgue;
  std::vector<double> locations_;
  std::vector<double> masses_;
};

// Inverse CDF of lambda restricted to a window. For the inverse-Weibull
// density this is a monotone (Fritsch-Carlson) cubic spline of log x against
// log F, precomputed once per window.
class WindowSampler {
 public:
  WindowSampler(const BaseMeasure& base, Window window);

  // Location with normalized restricted CDF equal to q in (0, 1).
  double quantile(double q) const;
  double sample(RngStream& rng) const { return quantile(rng.uniform()); }
  double mass() const { return mass_; }

 private:
  BaseMeasureKind kind_;
  Window window_;
  double mass_ = 0.0;
  // inverse_weibull spline nodes
  std::vector<double> log_cdf_;
  std::vector<double> log_x_;
  std::vector<double> slope_;
  // discrete atoms
  std::vector<double> cum_;
  std::vector<double> atoms_;
};

// Generalized gamma Levy intensity with constant gamma:
//   nu(dv, dx) = e^{-gamma v} v^{-1-sigma} / Gamma(1-sigma) dv lambda(dx).
struct GeneralizedGammaIntensity {
  double sigma = 0.0;
  double gamma = 1.0;
  BaseMeasure base = BaseMeasure::lebesgue();

  GeneralizedGammaIntensity() = default;
  GeneralizedGammaIntensity(double sigma_, double gamma_, BaseMeasure base_ = BaseMeasure::lebesgue());

  // Same sigma, rate shifted by `shift` (exponential tilting e^{-v shift}).
  GeneralizedGammaIntensity tilted(double shift) const;
};

struct Atom {
  double location = 0.0;
  double weight = 0.0;
};

struct CrmRealization {
  std::vector<Atom> atoms;  // sorted by location, all weights >= jump_floor
  Window window;
  double jump_floor = 0.0;
  double window_mass = 0.0;
  double expected_dropped_mass = 0.0;
};

double levy_density(const GeneralizedGammaIntensity& intensity, double v);
// K^{(c)} = (1-sigma)_{c-1} gamma^{-c+sigma}
double moment(const GeneralizedGammaIntensity& intensity, double c);
// int_0^inf v^c e^{-v shift} rho(dv) = Gamma(c-sigma)/Gamma(1-sigma) (gamma+shift)^{-(c-sigma)}
double tilted_moment(const GeneralizedGammaIntensity& intensity, double c, double shift);
// N(v) = int_v^inf rho(ds)
double tail_mass(const GeneralizedGammaIntensity& intensity, double v);
// int_0^eps s rho(ds)
double small_jump_mass(const GeneralizedGammaIntensity& intensity, double eps);
// v with tail_mass(v) = u; `guess` warm-starts the Newton iteration.
double inverse_tail_mass(const GeneralizedGammaIntensity& intensity, double u,
                         std::optional<double> guess = std::nullopt);

// Jump floor eps with small_jump_mass(eps) = budget * K^{(1)}.
double jump_floor_for_budget(const GeneralizedGammaIntensity& intensity, double budget);

struct TruncationPolicy {
  double jump_floor = 0.0;     // 0 => derive from budget
  double budget = 1e-4;        // expected dropped mass / E[mu(window)]
  std::size_t max_atoms = 50'000'000;
};

// Ferguson-Klass on a window with a jump floor.
CrmRealization sample_crm(const GeneralizedGammaIntensity& intensity, Window window,
                          const TruncationPolicy& policy, RngStream& rng);
// Overload reusing a prebuilt location sampler for the same window.
CrmRealization sample_crm(const GeneralizedGammaIntensity& intensity, Window window,
                          const TruncationPolicy& policy, const WindowSampler& sampler,
                          RngStream& rng);

// int (1 - e^{-s g(x)}) nu(ds, dx) over the window.
double laplace_exponent(const GeneralizedGammaIntensity& intensity, const RealFunction& g,
                        Window window, std::span<const double> breakpoints = {});
// psi(u) = int (1 - e^{-u s}) rho(ds)
double laplace_exponent_at(const GeneralizedGammaIntensity& intensity, double u);

// Intensity with a location-dependent exponential tilt:
//   e^{-v K(x)} rho(dv) lambda(dx).
// K == 0 is the prior. Jump moments are m_j(x) = tilted_moment(j, K(x)).
struct TiltedIntensity {
  GeneralizedGammaIntensity intensity;
  std::function<double(double)> tilt;  // empty => identically zero
  std::vector<double> kinks;           // nonsmooth points of the tilt

  static TiltedIntensity prior(const GeneralizedGammaIntensity& intensity);

  double tilt_at(double x) const { return tilt ? tilt(x) : 0.0; }
  double jump_moment(double j, double x) const;
  bool is_prior() const { return !tilt; }
};

}  // namespace hazlab

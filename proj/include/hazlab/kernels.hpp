#pragma once

#include <span>
#include <string>
#include <vector>

#include "hazlab/crm.hpp"

namespace hazlab {

enum class KernelKind { dykstra_laud, rectangular, ornstein_uhlenbeck, exponential };

struct KernelSpec {
  KernelKind kind = KernelKind::dykstra_laud;
  double param = 0.0;  // tau (rectangular) or kappa (OU)

  static KernelSpec dykstra_laud() { return {KernelKind::dykstra_laud, 0.0}; }
  static KernelSpec rectangular(double tau);
  static KernelSpec ornstein_uhlenbeck(double kappa);
  static KernelSpec exponential() { return {KernelKind::exponential, 0.0}; }

  std::string name() const;
  static KernelSpec from_name(const std::string& name, double param);
};

double eval_kernel(const KernelSpec& k, double t, double x);

// int_0^T k(t, x) dt; T may be +infinity.
double time_integral(const KernelSpec& k, double x, double T);
// int_0^T k(u, x) k(u, y) du
double cross_time_integral(const KernelSpec& k, double x, double y, double T);
// int_0^T k(u, x)^2 du
inline double square_time_integral(const KernelSpec& k, double x, double T) {
  return cross_time_integral(k, x, x, T);
}

double kT0(const KernelSpec& k, double s, double x, double T);
double kT1(const KernelSpec& k, double s, double x, double t, double y, double T);
double kT2(const KernelSpec& k, double s, double x, double T);
// (s/T) int c_T(x, w) m_1(w) lambda(dw) under a (possibly tilted) intensity.
double kT3(const KernelSpec& k, const TiltedIntensity& field, double s, double x, double T);
double kT4(const KernelSpec& k, std::span<const Atom> atoms, double s, double x, double T);

// Location range outside of which time_integral(., T) vanishes.
Window location_support(const KernelSpec& k, double T);
// Range of x where k(t, x) > 0 for the given t.
Window kernel_support_at(const KernelSpec& k, double t);
// Points where x -> cross_time_integral(k, x, y, T) or time_integral is not smooth.
std::vector<double> location_breakpoints(const KernelSpec& k, double T,
                                         std::span<const double> anchors = {});

struct ContractionNorms {
  double l2_squared = 0.0;        // ||k1||^2 in L2(nu^2)
  double l4_fourth = 0.0;         // ||k1||^4 in L4(nu^2)
  double star11_squared = 0.0;    // ||k1 *_1^1 k1||^2 in L2(nu^2)
  double star21_squared = 0.0;    // ||k1 *_2^1 k1||^2 in L2(nu)
};

// The k1 kernel is s t c_T(x, y) / T, so every norm reduces to location
// quadratures weighted by the jump moments m_j(x).
ContractionNorms contraction_norms(const KernelSpec& k, const TiltedIntensity& field, double T,
                                   bool include_contractions = true, double rel_tol = 1e-8);

// Integral over the location support of f(x) lambda(dx) with the kernel and
// tilt breakpoints inserted.
double integrate_locations(const KernelSpec& k, const TiltedIntensity& field, double T,
                           const RealFunction& f, std::span<const double> extra_breaks = {},
                           double rel_tol = 1e-11);

}  // namespace hazlab

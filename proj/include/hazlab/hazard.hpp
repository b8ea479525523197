#pragma once

#include <span>
#include <vector>

#include "hazlab/crm.hpp"
#include "hazlab/kernels.hpp"

namespace hazlab {

struct HazardRealization {
  KernelSpec kernel;
  CrmRealization crm;
  std::vector<Atom> fixed_atoms;
};

struct FunctionalSample {
  double horizon = 0.0;
  double cumulative_hazard = 0.0;
  double path_second_moment = 0.0;  // (1/T) int_0^T h^2
  double path_variance = 0.0;       // psm - (H/T)^2
};

struct SurvivalDensity {
  double survival = 1.0;
  double density = 0.0;
};

double hazard_at(const HazardRealization& r, double t);
double cumulative_hazard(const HazardRealization& r, double T);
SurvivalDensity survival_and_density(const HazardRealization& r, double t);

// Inverse-transform lifetime: solves H(T*) = E, E ~ Exp(1).
double sample_lifetime(const HazardRealization& r, RngStream& rng);
double lifetime_for_level(const HazardRealization& r, double level);

// With quadratic = false only the cumulative hazard is filled in.
FunctionalSample path_functionals(const HazardRealization& r, double T, bool quadratic = true);

// sum_{i,j} w_i w_j c_T(x_i, x_j). Three implementations of the same double
// sum: serial reference, OpenMP pairwise, and sorted linear sweeps.
double quadratic_form_reference(const KernelSpec& k, std::span<const Atom> atoms, double T);
double quadratic_form_parallel(const KernelSpec& k, std::span<const Atom> atoms, double T);
double quadratic_form_sweep(const KernelSpec& k, std::span<const Atom> sorted_atoms, double T);

std::vector<Atom> merged_atoms(const HazardRealization& r);

struct PriorMoments {
  double mean_cumulative = 0.0;
  double var_cumulative = 0.0;
};

PriorMoments prior_moments(const KernelSpec& k, const TiltedIntensity& field, double T);
// E[h(t)] = int k(t, x) m_1(x) lambda(dx)
double mean_hazard(const KernelSpec& k, const TiltedIntensity& field, double t);
// (1/T) int_0^T E[h(t)^2] dt
double mean_path_second_moment(const KernelSpec& k, const TiltedIntensity& field, double T);

}  // namespace hazlab

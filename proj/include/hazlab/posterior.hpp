#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hazlab/crm.hpp"
#include "hazlab/hazard.hpp"
#include "hazlab/kernels.hpp"

namespace hazlab {

struct Observation {
  double time = 0.0;
  bool censored = false;
};

// Data plus prior. Everything here depends on the data only through K_m.
class PosteriorModel {
 public:
  PosteriorModel(KernelSpec kernel, GeneralizedGammaIntensity intensity,
                 std::vector<Observation> data);

  const KernelSpec& kernel() const { return kernel_; }
  const GeneralizedGammaIntensity& intensity() const { return intensity_; }
  const std::vector<Observation>& data() const { return data_; }
  const std::vector<std::size_t>& exact_indices() const { return exact_; }
  std::size_t exact_count() const { return exact_.size(); }
  double max_time() const;

  // K_m(x) = sum_i int_0^{y_i} k(t, x) dt over exact and censored times.
  double K_m(double x) const;
  // tau_n(x) = int v^n e^{-v K_m(x)} rho(dv)
  double tau_n(int n, double x) const;
  // density of e^{-v K_m(x)} rho(dv) lambda(dx)
  double posterior_intensity(double v, double x) const;
  // density of the lower bound exp{-n k0_{Y(n)}(v, x)} nu(dv, dx)
  double lower_bound_intensity(double v, double x) const;

  std::vector<double> tilt_kinks() const;
  TiltedIntensity prior_field() const;
  TiltedIntensity posterior_field() const;
  TiltedIntensity lower_bound_field() const;

  // int k(y_i, x) tau_1(x) lambda(dx) for exact observation number i.
  double fresh_weight(std::size_t exact_number) const { return fresh_weights_[exact_number]; }

  // Exact draw from tau_n(x) prod_{members} k(y, x) lambda(dx).
  double sample_location(std::span<const double> member_times, RngStream& rng) const;
  // Normalising constant of the same density (quadrature / enumeration).
  double location_mass(std::span<const double> member_times) const;

 private:
  KernelSpec kernel_;
  GeneralizedGammaIntensity intensity_;
  std::vector<Observation> data_;
  std::vector<std::size_t> exact_;
  std::vector<double> fresh_weights_;
};

struct Cluster {
  double location = 0.0;
  int size = 0;
  double jump = 0.0;
  double tilt = 0.0;  // cached K_m(location)
};

struct PosteriorCheckpoint {
  std::vector<int> labels;
  std::vector<Cluster> clusters;
  std::string rng_state;
  std::uint64_t sweeps = 0;
};

struct GibbsSettings {
  int burn_in = 500;
  int thin = 5;
  bool refresh_locations = true;
};

// Latent locations for the exact observations, grouped into clusters.
class PosteriorState {
 public:
  PosteriorState(const PosteriorModel& model, RngStream& rng);
  PosteriorState(const PosteriorModel& model, std::vector<int> labels, std::vector<Cluster> clusters);

  const PosteriorModel& model() const { return *model_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<Cluster>& clusters() const { return clusters_; }
  std::vector<Cluster>& clusters() { return clusters_; }
  std::vector<Atom> fixed_atoms() const;
  std::vector<double> member_times(std::size_t cluster) const;

  void gibbs_sweep(RngStream& rng, bool refresh_locations = true);
  void sample_fixed_jumps(RngStream& rng);
  // Canonical partition: label of each exact observation after relabelling
  // clusters in order of first appearance.
  std::vector<int> canonical_partition() const;
  void check_invariants() const;
  PosteriorCheckpoint checkpoint(const RngStream& rng, std::uint64_t sweeps) const;

 private:
  void remove_from_cluster(std::size_t i);
  const PosteriorModel* model_;
  std::vector<int> labels_;  // per exact observation
  std::vector<Cluster> clusters_;
};

// Tilted CRM by thinning prior Ferguson-Klass atoms with e^{-v K_m(x)}.
CrmRealization sample_posterior_crm(const PosteriorModel& model, Window window,
                                    const TruncationPolicy& policy, RngStream& rng);
CrmRealization sample_posterior_crm(const PosteriorModel& model, Window window,
                                    const TruncationPolicy& policy, const WindowSampler& sampler,
                                    RngStream& rng);
// Independent construction: Ferguson-Klass on the nonhomogeneous tilted
// intensity, tail mass integrated over locations. Slow; used as a cross-check.
CrmRealization sample_posterior_crm_direct(const PosteriorModel& model, Window window,
                                           double jump_floor, RngStream& rng);

// Fresh fixed jumps for the current clusters, then the tilted CRM part.
HazardRealization sample_posterior_hazard(PosteriorState& state, Window window,
                                          const TruncationPolicy& policy, RngStream& rng);
HazardRealization sample_posterior_hazard(PosteriorState& state, Window window,
                                          const TruncationPolicy& policy,
                                          const WindowSampler& sampler, RngStream& rng);

// E[H^{n,*}(T)] of the CRM part.
double posterior_mean_cumulative_hazard(const PosteriorModel& model, double T);
// A_T^{n,*} = sum_j (2 J_j / T) int_0^T E[h^{n,*}(t)] k(t, X_j) dt
double centering_A_T(const PosteriorModel& model, std::span<const Atom> fixed_atoms, double T);
// E[h(t) | X, Y] with the fixed jumps integrated out (Rao-Blackwellised).
double conditional_mean_hazard(const PosteriorState& state, double t);

}  // namespace hazlab

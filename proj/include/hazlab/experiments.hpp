#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hazlab/asymptotics.hpp"
#include "hazlab/crm.hpp"
#include "hazlab/hazard.hpp"
#include "hazlab/kernels.hpp"
#include "hazlab/posterior.hpp"
#include "hazlab/statistics.hpp"

namespace hazlab {

struct ModelConfig {
  KernelSpec kernel = KernelSpec::ornstein_uhlenbeck(2.0);
  double sigma = 0.0;
  double gamma = 1.0;

  // Lebesgue base measure, except inverse-Weibull for the exponential kernel.
  GeneralizedGammaIntensity intensity() const;
};

struct SyntheticRecipe {
  int observations = 5;
  int censored = 2;
  std::uint64_t seed = 7;
};

struct PosteriorConfig {
  std::string data_file;  // empty => synthetic data
  SyntheticRecipe synthetic;
  GibbsSettings gibbs;
  std::string checkpoint_in;
};

struct Tolerances {
  double mean_se_multiple = 3.0;
  double variance_relative = 0.10;
  double ks_max = 0.05;
};

struct ConsistencyConfig {
  std::vector<int> sample_sizes{10, 50, 250};
  int repetitions = 3;
  double t_min = 0.1;
  double t_max = 5.0;
  int grid_points = 50;
  int retained_states = 200;
};

struct ExperimentConfig {
  ModelConfig model;
  Functional functional = Functional::linear;
  std::vector<double> horizons{500.0};
  int replicates = 5000;
  std::uint64_t master_seed = 1;
  double truncation_budget = 1e-4;
  double window_tail_tolerance = 1e-3;
  bool has_posterior = false;
  PosteriorConfig posterior;
  Tolerances tolerances;
  ConsistencyConfig consistency;
  std::vector<double> condition_grid = default_condition_grid();
  int curve_points = 100;
  int curve_draws = 200;
  bool serial = false;
  std::string out_dir = "out";
};

struct Verdict {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  double standard_error = 0.0;
  std::string provenance;
  std::string detail;
};

struct Normalization {
  std::string name;
  std::vector<double> values;
  SampleSummary summary;
};

struct HorizonResult {
  double horizon = 0.0;
  std::vector<double> raw;
  std::vector<double> normalized;
  SampleSummary summary;
  std::vector<Normalization> alternatives;
  double max_expected_dropped_mass = 0.0;
  double dropped_mass_budget = 0.0;
  double mean_atoms = 0.0;
  std::vector<std::pair<std::string, double>> diagnostics;
};

struct CurvePoint {
  double t = 0.0;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct ExperimentResult {
  std::string experiment;
  std::string status = "ok";
  CltPrediction prediction;
  std::vector<HorizonResult> horizons;
  std::vector<Verdict> verdicts;
  std::vector<std::pair<std::string, double>> diagnostics;
  std::vector<CurvePoint> curves;
  std::vector<ConditionReport> condition_reports;
  std::vector<std::string> notes;
  std::optional<PosteriorCheckpoint> checkpoint;
  bool passed = false;
};

inline constexpr int kMinimumReplicates = 100;

// [0, T] for DL and OU, [0, T + tau] for the rectangular kernel. For the
// exponential kernel the window is cut where the neglected tail is below
// `tail_tolerance` of the prior mean hazard on [0, T].
Window experiment_window(const KernelSpec& kernel, double T, double tail_tolerance = 1e-3);

// Lifetimes from a seeded prior realization; `recipe.censored` of them are
// right-censored at U * Y.
std::vector<Observation> synthetic_data(const ModelConfig& model, const SyntheticRecipe& recipe);

struct SimulatedFunctionals {
  std::vector<FunctionalSample> samples;
  double max_expected_dropped_mass = 0.0;
  double dropped_mass_budget = 0.0;
  double mean_atoms = 0.0;
};

// R independent prior realizations at horizon T; replicate r uses the stream
// derived from (seed, horizon_index, r).
SimulatedFunctionals simulate_prior_functionals(const ModelConfig& model, double T, int replicates,
                                                std::uint64_t seed, std::uint64_t horizon_index,
                                                double budget, double tail_tolerance,
                                                bool serial = false);

// Replicate r of horizon h in simulate_prior_functionals, regenerated.
HazardRealization prior_realization(const ModelConfig& model, double T, std::uint64_t seed,
                                    std::uint64_t horizon_index, std::uint64_t replicate,
                                    double budget, double tail_tolerance);

// Gibbs chain: burn-in, then `count` states kept every `thin` sweeps.
// With `resume`, the chain continues from that state and skips the burn-in.
std::vector<PosteriorState> run_gibbs(const PosteriorModel& model, const GibbsSettings& settings,
                                      std::size_t count, RngStream& rng,
                                      const PosteriorState* resume = nullptr);

std::vector<Observation> experiment_data(const ExperimentConfig& config);

ExperimentResult run_simulate(const ExperimentConfig& config);
ExperimentResult run_prior_clt(const ExperimentConfig& config);
ExperimentResult run_posterior_clt(const ExperimentConfig& config);
ExperimentResult run_consistency_demo(const ExperimentConfig& config);
ExperimentResult run_conditions(const ExperimentConfig& config);
ExperimentResult run_posterior_fit(const ExperimentConfig& config);

}  // namespace hazlab

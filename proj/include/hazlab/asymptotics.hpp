#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hazlab/crm.hpp"
#include "hazlab/kernels.hpp"
#include "hazlab/posterior.hpp"

namespace hazlab {

enum class Functional { linear, path_second_moment, path_variance };

std::string functional_name(Functional f);
Functional functional_from_name(const std::string& name);

// C(T) = T^{rate_exponent}; the normalized statistic is
//   C(T) * (F(T) - trend(T)) ~ N(limit_mean_shift, limit_variance).
// For the linear functional trend(T) = trend_coefficient * T^{trend_exponent};
// the quadratic functionals converge to a constant centre (exponent 0).
struct CltPrediction {
  Functional functional = Functional::linear;
  KernelSpec kernel;
  double rate_exponent = 0.0;
  double trend_coefficient = 0.0;
  double trend_exponent = 0.0;
  double limit_mean_shift = 0.0;
  double limit_variance = 0.0;
  bool applicable = true;
  std::string reason;
  std::string provenance = "paper";  // "paper" or "derived"

  double rate(double T) const;
  double trend(double T) const;
  double normalize(double value, double T) const { return rate(T) * (value - trend(T)); }
};

// Same constants with or without data: the posterior limits do not depend
// on the observations.
CltPrediction clt_prediction(const KernelSpec& kernel, const GeneralizedGammaIntensity& intensity,
                             Functional functional);

// Limit constants that enter the quadratic CLTs.
struct QuadraticConstants {
  double sigma1_sq = 0.0;
  double sigma4_sq = 0.0;
  double sigma5_sq = 0.0;
  double delta = 0.0;
  double rate_c0 = 0.0;  // exponent of C0
  double rate_c1 = 0.0;  // exponent of C1
  std::string provenance = "paper";
};
QuadraticConstants quadratic_constants(const KernelSpec& kernel,
                                       const GeneralizedGammaIntensity& intensity);

enum class Expectation { limit, vanishing, non_vanishing, bracket, informational };

struct ConditionTrajectory {
  std::string name;
  std::string description;
  Expectation expectation = Expectation::limit;
  std::vector<double> horizons;
  std::vector<double> values;
  std::optional<double> target;
  std::string provenance;
  double last_value = 0.0;
  double richardson = 0.0;
  double relative_change = 0.0;
  double log_slope = 0.0;  // fitted d log|value| / d log T over the grid
  bool converged = false;
  bool passed = false;
};

struct ConditionReport {
  std::string family;  // functional whose CLT the conditions support
  KernelSpec kernel;
  double sigma = 0.0;
  double gamma = 1.0;
  bool posterior = false;
  std::vector<ConditionTrajectory> conditions;
  bool all_passed = true;

  const ConditionTrajectory& find(const std::string& name) const;
};

// Prior when model == nullptr; otherwise the posterior intensity of the model
// with `atoms` as the realized fixed jumps.
struct ConditionContext {
  const PosteriorModel* model = nullptr;
  std::vector<Atom> atoms;
};

inline constexpr double kConvergenceTolerance = 1e-2;
inline constexpr double kTargetTolerance = 1e-2;

std::vector<double> default_condition_grid();

ConditionReport check_linear_conditions(const KernelSpec& kernel,
                                          const GeneralizedGammaIntensity& intensity,
                                          const ConditionContext& context,
                                          std::span<const double> grid);
ConditionReport check_quadratic_conditions(const KernelSpec& kernel,
                                          const GeneralizedGammaIntensity& intensity,
                                          const ConditionContext& context,
                                          std::span<const double> grid);
ConditionReport check_centred_quadratic_conditions(const KernelSpec& kernel,
                                           const GeneralizedGammaIntensity& intensity,
                                           const ConditionContext& context,
                                           std::span<const double> grid);

// Fills the derived fields of a trajectory from its values.
void finalize_trajectory(ConditionTrajectory& c);

}  // namespace hazlab

#include "hazlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hazlab/errors.hpp"
#include "hazlab/io.hpp"
#include "hazlab/parallel.hpp"

namespace hazlab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kPosteriorStreams = 0x9057E7107ULL;
constexpr std::uint64_t kChainStream = 0xC4A1ULL;
constexpr std::uint64_t kDataStream = 0xDA7AULL;

double value_of(const FunctionalSample& s, Functional f) {
  switch (f) {
    case Functional::linear: return s.cumulative_hazard;
    case Functional::path_second_moment: return s.path_second_moment;
    case Functional::path_variance: return s.path_variance;
  }
  return kNaN;
}

double quantile_of(std::vector<double> v, double p) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const double pos = p * (v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - i) * (v[i + 1] - v[i]);
}

void validate(const ExperimentConfig& c) {
  if (c.replicates < 2) throw ConfigurationError("replicates must be at least 2");
  if (c.horizons.empty()) throw ConfigurationError("at least one horizon is required");
  for (std::size_t i = 0; i < c.horizons.size(); ++i) {
    if (!(c.horizons[i] > 0.0)) throw ConfigurationError("horizons must be positive");
    if (i > 0 && !(c.horizons[i] > c.horizons[i - 1]))
      throw ConfigurationError("horizons must be increasing");
  }
}

Verdict mean_verdict(const std::string& tag, const SampleSummary& s, double target, double k,
                     const std::string& provenance) {
  Verdict v;
  v.name = tag + " mean";
  v.value = s.mean;
  v.target = target;
  v.standard_error = s.se_mean;
  v.tolerance = k * s.se_mean;
  v.passed = std::abs(s.mean - target) <= v.tolerance;
  v.provenance = provenance;
  v.detail = "|mean - target| <= " + std::to_string(k) + " standard errors";
  return v;
}

Verdict variance_verdict(const std::string& tag, const SampleSummary& s, double target, double rel,
                         const std::string& provenance) {
  Verdict v;
  v.name = tag + " variance";
  v.value = s.variance;
  v.target = target;
  v.standard_error = s.se_variance;
  v.tolerance = rel;
  v.passed = std::abs(s.variance / target - 1.0) <= rel;
  v.provenance = provenance;
  v.detail = "relative deviation of the variance within tolerance";
  return v;
}

Verdict ks_verdict(const std::string& tag, const SampleSummary& s, double max_d,
                   const std::string& provenance) {
  Verdict v;
  v.name = tag + " ks";
  v.value = s.ks_distance;
  v.target = 0.0;
  v.standard_error = 1.0 / std::sqrt(static_cast<double>(s.count));
  v.tolerance = max_d;
  v.passed = s.ks_distance < max_d;
  v.provenance = provenance;
  v.detail = "Kolmogorov-Smirnov distance to the predicted normal";
  return v;
}

Verdict truncation_verdict(const std::string& tag, double dropped, double budget) {
  Verdict v;
  v.name = tag + " truncation";
  v.value = dropped;
  v.target = budget;
  v.tolerance = budget;
  v.passed = dropped <= budget * (1.0 + 1e-9);
  v.provenance = "derived";
  v.detail = "expected dropped mass within the truncation budget";
  return v;
}

std::string horizon_tag(double T) {
  std::string s = std::to_string(T);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return "T=" + s;
}

void add_clt_verdicts(ExperimentResult& res, const ExperimentConfig& cfg) {
  const auto& p = res.prediction;
  for (const auto& h : res.horizons) {
    const std::string tag = horizon_tag(h.horizon);
    res.verdicts.push_back(mean_verdict(tag, h.summary, p.limit_mean_shift,
                                        cfg.tolerances.mean_se_multiple, p.provenance));
    res.verdicts.push_back(variance_verdict(tag, h.summary, p.limit_variance,
                                            cfg.tolerances.variance_relative, p.provenance));
    res.verdicts.push_back(ks_verdict(tag, h.summary, cfg.tolerances.ks_max, p.provenance));
    res.verdicts.push_back(truncation_verdict(tag, h.max_expected_dropped_mass, h.dropped_mass_budget));
  }
  // Third and fourth cumulants of the normalized samples shrink along the horizons.
  for (std::size_t i = 1; i < res.horizons.size(); ++i) {
    const auto& a = res.horizons[i - 1].summary;
    const auto& b = res.horizons[i].summary;
    Verdict v;
    v.name = horizon_tag(res.horizons[i].horizon) + " cumulants shrink";
    v.value = std::abs(b.skewness);
    v.target = std::abs(a.skewness);
    v.standard_error = std::hypot(a.se_skewness, b.se_skewness);
    v.tolerance = 2.0 * v.standard_error;
    const double kslack = 2.0 * std::hypot(a.se_kurtosis, b.se_kurtosis);
    v.passed = std::abs(b.skewness) <= std::abs(a.skewness) + v.tolerance &&
               std::abs(b.excess_kurtosis) <= std::abs(a.excess_kurtosis) + kslack;
    v.provenance = "derived";
    v.detail = "|skewness| and |excess kurtosis| do not grow beyond 2 standard errors";
    res.verdicts.push_back(v);
  }
  res.passed = std::all_of(res.verdicts.begin(), res.verdicts.end(),
                           [](const Verdict& v) { return v.passed; });
  if (cfg.replicates < kMinimumReplicates) {
    res.status = "insufficient replicates";
    res.passed = false;
  }
}

Normalization normalization(const std::string& name, std::vector<double> values, double mean,
                            double variance) {
  Normalization n;
  n.name = name;
  n.summary = summarize(values, mean, variance);
  n.values = std::move(values);
  return n;
}

double reference_lifetime(KernelKind kind, double level) {
  if (kind == KernelKind::dykstra_laud) return std::sqrt(2.0 * level);  // H0 = t^2 / 2
  // H0(t) = t - 1 + e^{-t}, increasing and convex
  double t = level + 1.0;
  for (int i = 0; i < 100; ++i) {
    const double f = t - 1.0 + std::exp(-t) - level;
    const double d = -std::expm1(-t);
    const double next = t - f / d;
    if (std::abs(next - t) < 1e-15 * std::max(1.0, t)) return next;
    t = std::max(next, 0.5 * t);
  }
  return t;
}

double reference_hazard(KernelKind kind, double t) {
  return kind == KernelKind::dykstra_laud ? t : -std::expm1(-t);
}

std::vector<PosteriorState> posterior_chain(const ExperimentConfig& cfg, const PosteriorModel& model,
                                            std::size_t count, RngStream& rng, std::uint64_t& sweeps,
                                            std::optional<PosteriorCheckpoint>& last) {
  std::optional<PosteriorState> resume;
  if (!cfg.posterior.checkpoint_in.empty()) {
    auto cp = checkpoint_from_json(read_json(cfg.posterior.checkpoint_in));
    resume = restore_state(model, cp);
    rng.restore(cp.rng_state);
    sweeps = cp.sweeps;
  }
  auto states = run_gibbs(model, cfg.posterior.gibbs, count, rng, resume ? &*resume : nullptr);
  sweeps += (resume ? 0 : cfg.posterior.gibbs.burn_in) +
            static_cast<std::uint64_t>(count) * std::max(cfg.posterior.gibbs.thin, 1);
  if (!states.empty()) last = states.back().checkpoint(rng, sweeps);
  return states;
}

}  // namespace

GeneralizedGammaIntensity ModelConfig::intensity() const {
  return GeneralizedGammaIntensity(sigma, gamma,
                                   kernel.kind == KernelKind::exponential ? BaseMeasure::inverse_weibull()
                                                                          : BaseMeasure::lebesgue());
}

Window experiment_window(const KernelSpec& kernel, double T, double tail_tolerance) {
  switch (kernel.kind) {
    case KernelKind::dykstra_laud:
    case KernelKind::ornstein_uhlenbeck:
      return {0.0, T};
    case KernelKind::rectangular:
      return {0.0, T + kernel.param};
    case KernelKind::exponential:
      // tail share of E[h(t)] is at most 2 sqrt((t + 1) / (pi X))
      return {0.0, 4.0 * (T + 1.0) / (std::numbers::pi * tail_tolerance * tail_tolerance)};
  }
  return {0.0, T};
}

std::vector<Observation> synthetic_data(const ModelConfig& model, const SyntheticRecipe& recipe) {
  if (recipe.observations < 0 || recipe.censored < 0 || recipe.censored > recipe.observations)
    throw ConfigurationError("synthetic data recipe is inconsistent");
  if (recipe.observations == 0) return {};
  RngStream rng = RngStream::derive(recipe.seed, kDataStream);
  const auto in = model.intensity();
  TruncationPolicy policy;
  const Window w = experiment_window(model.kernel, 50.0);
  WindowSampler sampler(in.base, w);
  for (int attempt = 0; attempt < 100; ++attempt) {
    HazardRealization r{model.kernel, sample_crm(in, w, policy, sampler, rng), {}};
    std::vector<Observation> data;
    try {
      for (int i = 0; i < recipe.observations; ++i) data.push_back({sample_lifetime(r, rng), false});
    } catch (const HorizonError&) {
      continue;
    }
    for (int i = recipe.observations - recipe.censored; i < recipe.observations; ++i) {
      data[i].time *= rng.uniform();
      data[i].censored = true;
    }
    return data;
  }
  throw HorizonError("could not draw synthetic lifetimes inside the window");
}

HazardRealization prior_realization(const ModelConfig& model, double T, std::uint64_t seed,
                                    std::uint64_t horizon_index, std::uint64_t replicate,
                                    double budget, double tail_tolerance) {
  const auto in = model.intensity();
  TruncationPolicy policy;
  policy.budget = budget;
  RngStream rng = RngStream::derive(seed, horizon_index, replicate);
  return {model.kernel, sample_crm(in, experiment_window(model.kernel, T, tail_tolerance), policy, rng), {}};
}

SimulatedFunctionals simulate_prior_functionals(const ModelConfig& model, double T, int replicates,
                                                std::uint64_t seed, std::uint64_t horizon_index,
                                                double budget, double tail_tolerance, bool serial) {
  const auto in = model.intensity();
  const Window w = experiment_window(model.kernel, T, tail_tolerance);
  const WindowSampler sampler(in.base, w);
  TruncationPolicy policy;
  policy.budget = budget;
  const bool quadratic = model.kernel.kind != KernelKind::exponential;
  SimulatedFunctionals out;
  out.samples.resize(replicates);
  std::vector<double> dropped(replicates), atoms(replicates);
  parallel_for(
      replicates,
      [&](std::size_t r) {
        RngStream rng = RngStream::derive(seed, horizon_index, r);
        HazardRealization h{model.kernel, sample_crm(in, w, policy, sampler, rng), {}};
        out.samples[r] = path_functionals(h, T, quadratic);
        dropped[r] = h.crm.expected_dropped_mass;
        atoms[r] = static_cast<double>(h.crm.atoms.size());
      },
      serial);
  out.max_expected_dropped_mass = *std::max_element(dropped.begin(), dropped.end());
  out.dropped_mass_budget = budget * sampler.mass() * moment(in, 1.0);
  double s = 0.0;
  for (double a : atoms) s += a;
  out.mean_atoms = s / replicates;
  return out;
}

std::vector<PosteriorState> run_gibbs(const PosteriorModel& model, const GibbsSettings& settings,
                                      std::size_t count, RngStream& rng, const PosteriorState* resume) {
  PosteriorState state = resume ? *resume : PosteriorState(model, rng);
  if (!resume)
    for (int i = 0; i < settings.burn_in; ++i) state.gibbs_sweep(rng, settings.refresh_locations);
  std::vector<PosteriorState> kept;
  kept.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    for (int i = 0; i < std::max(settings.thin, 1); ++i) state.gibbs_sweep(rng, settings.refresh_locations);
    kept.push_back(state);
  }
  return kept;
}

std::vector<Observation> experiment_data(const ExperimentConfig& config) {
  if (!config.posterior.data_file.empty()) return read_data_csv(config.posterior.data_file);
  return synthetic_data(config.model, config.posterior.synthetic);
}

ExperimentResult run_prior_clt(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto in = cfg.model.intensity();
  ExperimentResult res;
  res.experiment = "prior-clt";
  res.prediction = clt_prediction(cfg.model.kernel, in, cfg.functional);
  if (!res.prediction.applicable) throw UnsupportedError(res.prediction.reason);
  const auto prior = TiltedIntensity::prior(in);
  for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
    const double T = cfg.horizons[h];
    auto sim = simulate_prior_functionals(cfg.model, T, cfg.replicates, cfg.master_seed, h,
                                          cfg.truncation_budget, cfg.window_tail_tolerance, cfg.serial);
    HorizonResult hr;
    hr.horizon = T;
    hr.max_expected_dropped_mass = sim.max_expected_dropped_mass;
    hr.dropped_mass_budget = sim.dropped_mass_budget;
    hr.mean_atoms = sim.mean_atoms;
    for (const auto& s : sim.samples) {
      hr.raw.push_back(value_of(s, cfg.functional));
      hr.normalized.push_back(res.prediction.normalize(hr.raw.back(), T));
    }
    hr.summary = summarize(hr.normalized, res.prediction.limit_mean_shift, res.prediction.limit_variance);
    // Finite-T centring by the exact prior mean on the simulation window.
    const Window w = experiment_window(cfg.model.kernel, T, cfg.window_tail_tolerance);
    PriorMoments pm = prior_moments(cfg.model.kernel, prior, T);
    double centre = pm.mean_cumulative;
    if (cfg.functional != Functional::linear) {
      centre = mean_path_second_moment(cfg.model.kernel, prior, T);
      if (cfg.functional == Functional::path_variance)
        centre -= (pm.var_cumulative + pm.mean_cumulative * pm.mean_cumulative) / (T * T);
    }
    std::vector<double> alt;
    const double rate = res.prediction.rate(T);
    for (double v : hr.raw) alt.push_back(rate * (v - centre));
    hr.alternatives.push_back(normalization("exact_mean_centred", std::move(alt), 0.0,
                                            res.prediction.limit_variance));
    hr.diagnostics.push_back({"exact_mean", centre});
    hr.diagnostics.push_back({"window_upper", w.upper});
    res.horizons.push_back(std::move(hr));
  }
  add_clt_verdicts(res, cfg);
  return res;
}

ExperimentResult run_posterior_clt(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto in = cfg.model.intensity();
  ExperimentResult res;
  res.experiment = "posterior-clt";
  res.prediction = clt_prediction(cfg.model.kernel, in, cfg.functional);
  if (!res.prediction.applicable) throw UnsupportedError(res.prediction.reason);
  const PosteriorModel model(cfg.model.kernel, in, experiment_data(cfg));
  RngStream chain = RngStream::derive(cfg.master_seed, kChainStream);
  std::uint64_t sweeps = 0;
  auto states = posterior_chain(cfg, model, cfg.replicates, chain, sweeps, res.checkpoint);
  res.diagnostics.push_back({"observations", static_cast<double>(model.data().size())});
  res.diagnostics.push_back({"exact_observations", static_cast<double>(model.exact_count())});
  double clusters = 0.0;
  for (const auto& s : states) clusters += s.clusters().size();
  res.diagnostics.push_back({"mean_clusters", clusters / states.size()});
  res.notes.push_back("posterior samples are compared with the prior limit constants");

  const auto field = model.posterior_field();
  const auto prior = TiltedIntensity::prior(in);
  TruncationPolicy policy;
  policy.budget = cfg.truncation_budget;
  const bool quadratic = cfg.functional != Functional::linear;
  for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
    const double T = cfg.horizons[h];
    const Window w = experiment_window(cfg.model.kernel, T, cfg.window_tail_tolerance);
    const WindowSampler sampler(in.base, w);
    const std::size_t R = cfg.replicates;
    std::vector<FunctionalSample> fs(R);
    std::vector<double> dropped(R), atoms(R), a_t(R), fixed_term(R);
    const double rate = res.prediction.rate(T);
    parallel_for(
        R,
        [&](std::size_t r) {
          RngStream rng = RngStream::derive(cfg.master_seed ^ kPosteriorStreams, h, r);
          PosteriorState state = states[r];
          HazardRealization hz = sample_posterior_hazard(state, w, policy, sampler, rng);
          fs[r] = path_functionals(hz, T, quadratic);
          // The functional of the fixed jumps alone, on the normalized scale; it vanishes only as T grows.
          const HazardRealization fixed{hz.kernel, CrmRealization{}, hz.fixed_atoms};
          fixed_term[r] = rate * value_of(path_functionals(fixed, T, quadratic), cfg.functional);
          dropped[r] = hz.crm.expected_dropped_mass;
          atoms[r] = static_cast<double>(hz.crm.atoms.size());
          a_t[r] = quadratic ? centering_A_T(model, hz.fixed_atoms, T) : 0.0;
        },
        cfg.serial);
    HorizonResult hr;
    hr.horizon = T;
    hr.max_expected_dropped_mass = *std::max_element(dropped.begin(), dropped.end());
    hr.dropped_mass_budget = cfg.truncation_budget * sampler.mass() * moment(in, 1.0);
    double sa = 0.0;
    for (double a : atoms) sa += a;
    hr.mean_atoms = sa / R;
    double ft = 0.0;
    for (double f : fixed_term) ft += f;
    hr.diagnostics.push_back({"mean_fixed_atom_term", ft / R});
    const PriorMoments post = prior_moments(cfg.model.kernel, field, T);
    const double prior_mean = prior_moments(cfg.model.kernel, prior, T).mean_cumulative;
    hr.diagnostics.push_back({"posterior_mean_cumulative_hazard", post.mean_cumulative});
    hr.diagnostics.push_back({"prior_mean_cumulative_hazard", prior_mean});
    hr.diagnostics.push_back({"posterior_prior_mean_ratio", post.mean_cumulative / prior_mean});
    // Linear: centred by E[H^{n,*}(T)]. Quadratic: by A_T^{n,*} plus the tilted-CRM mean.
    double centre = post.mean_cumulative;
    if (quadratic) {
      centre = mean_path_second_moment(cfg.model.kernel, field, T);
      if (cfg.functional == Functional::path_variance)
        centre -= (post.var_cumulative + post.mean_cumulative * post.mean_cumulative) / (T * T);
      hr.diagnostics.push_back({"posterior_centre", centre});
    }
    std::vector<double> alt;
    for (std::size_t r = 0; r < R; ++r) {
      hr.raw.push_back(value_of(fs[r], cfg.functional));
      hr.normalized.push_back(rate * (hr.raw.back() - centre - a_t[r]));
      alt.push_back(res.prediction.normalize(hr.raw.back(), T));
    }
    hr.summary = summarize(hr.normalized, res.prediction.limit_mean_shift, res.prediction.limit_variance);
    hr.alternatives.push_back(normalization("prior_trend_centred", std::move(alt),
                                            res.prediction.limit_mean_shift,
                                            res.prediction.limit_variance));
    res.horizons.push_back(std::move(hr));
  }
  add_clt_verdicts(res, cfg);
  return res;
}

ExperimentResult run_consistency_demo(const ExperimentConfig& cfg) {
  const KernelKind kind = cfg.model.kernel.kind;
  if (kind != KernelKind::dykstra_laud && kind != KernelKind::ornstein_uhlenbeck)
    throw UnsupportedError("consistency demo supports the DL and OU kernels");
  const auto& cc = cfg.consistency;
  if (cc.sample_sizes.size() < 2 || cc.repetitions < 1 || cc.grid_points < 2 || !(cc.t_min > 0.0))
    throw ConfigurationError("consistency demo needs two sample sizes and a grid starting at t > 0");
  const auto in = cfg.model.intensity();
  ExperimentResult res;
  res.experiment = "consistency";
  std::vector<double> grid(cc.grid_points);
  for (int g = 0; g < cc.grid_points; ++g)
    grid[g] = cc.t_min + (cc.t_max - cc.t_min) * g / (cc.grid_points - 1);

  std::vector<std::vector<double>> errors(cc.repetitions, std::vector<double>(cc.sample_sizes.size()));
  const std::size_t jobs = cc.repetitions * cc.sample_sizes.size();
  parallel_for(
      jobs,
      [&](std::size_t job) {
        const std::size_t rep = job / cc.sample_sizes.size(), i = job % cc.sample_sizes.size();
        RngStream rng = RngStream::derive(cfg.master_seed, kDataStream + rep, i);
        std::vector<Observation> data(cc.sample_sizes[i]);
        for (auto& o : data) o = {reference_lifetime(kind, rng.exponential()), false};
        const PosteriorModel model(cfg.model.kernel, in, data);
        auto states = run_gibbs(model, cfg.posterior.gibbs, cc.retained_states, rng);
        double worst = 0.0;
        for (double t : grid) {
          double mean = 0.0;
          for (const auto& s : states) mean += conditional_mean_hazard(s, t);
          mean /= states.size();
          worst = std::max(worst, std::abs(mean - reference_hazard(kind, t)));
        }
        errors[rep][i] = worst;
      },
      cfg.serial);

  res.passed = true;
  for (int rep = 0; rep < cc.repetitions; ++rep) {
    int inversions = 0;
    for (std::size_t i = 0; i < cc.sample_sizes.size(); ++i) {
      res.diagnostics.push_back({"rep" + std::to_string(rep) + ".n" + std::to_string(cc.sample_sizes[i]),
                                 errors[rep][i]});
      if (i > 0 && errors[rep][i] >= errors[rep][i - 1]) ++inversions;
    }
    Verdict v;
    v.name = "repetition " + std::to_string(rep) + " error shrinks";
    v.value = errors[rep].back();
    v.target = errors[rep].front();
    v.tolerance = 1.0;
    v.passed = errors[rep].back() < errors[rep].front() && inversions <= 1;
    v.provenance = "derived";
    v.detail = "sup error at the largest n below the smallest n; " + std::to_string(inversions) +
               " inversion(s) along the sequence";
    res.passed = res.passed && v.passed;
    res.verdicts.push_back(v);
  }
  return res;
}

ExperimentResult run_conditions(const ExperimentConfig& cfg) {
  const auto in = cfg.model.intensity();
  const auto& grid = cfg.condition_grid;
  ExperimentResult res;
  res.experiment = "conditions";
  res.prediction = clt_prediction(cfg.model.kernel, in, Functional::linear);
  ConditionContext prior;
  res.condition_reports.push_back(check_linear_conditions(cfg.model.kernel, in, prior, grid));
  res.condition_reports.push_back(check_quadratic_conditions(cfg.model.kernel, in, prior, grid));
  res.condition_reports.push_back(check_centred_quadratic_conditions(cfg.model.kernel, in, prior, grid));
  if (cfg.has_posterior) {
    const PosteriorModel model(cfg.model.kernel, in, experiment_data(cfg));
    RngStream chain = RngStream::derive(cfg.master_seed, kChainStream);
    std::uint64_t sweeps = 0;
    auto states = posterior_chain(cfg, model, 1, chain, sweeps, res.checkpoint);
    PosteriorState state = states.back();
    state.sample_fixed_jumps(chain);
    ConditionContext post{&model, state.fixed_atoms()};
    res.condition_reports.push_back(check_linear_conditions(cfg.model.kernel, in, post, grid));
    res.condition_reports.push_back(check_quadratic_conditions(cfg.model.kernel, in, post, grid));
    res.condition_reports.push_back(check_centred_quadratic_conditions(cfg.model.kernel, in, post, grid));
  }
  res.passed = true;
  for (const auto& rep : res.condition_reports)
    for (const auto& c : rep.conditions) {
      if (c.expectation == Expectation::informational) continue;
      Verdict v;
      v.name = std::string(rep.posterior ? "posterior." : "prior.") + rep.family + "." + c.name;
      v.passed = c.passed;
      v.value = c.last_value;
      v.target = c.target.value_or(kNaN);
      v.tolerance = c.expectation == Expectation::limit ? kTargetTolerance : -0.1;
      v.provenance = c.provenance;
      v.detail = c.description;
      res.passed = res.passed && v.passed;
      res.verdicts.push_back(v);
    }
  return res;
}

ExperimentResult run_simulate(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto in = cfg.model.intensity();
  ExperimentResult res;
  res.experiment = "simulate";
  res.prediction = clt_prediction(cfg.model.kernel, in, cfg.functional);
  const double t_end = cfg.horizons.back();
  for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
    const double T = cfg.horizons[h];
    auto sim = simulate_prior_functionals(cfg.model, T, cfg.replicates, cfg.master_seed, h,
                                          cfg.truncation_budget, cfg.window_tail_tolerance, cfg.serial);
    HorizonResult hr;
    hr.horizon = T;
    hr.max_expected_dropped_mass = sim.max_expected_dropped_mass;
    hr.dropped_mass_budget = sim.dropped_mass_budget;
    hr.mean_atoms = sim.mean_atoms;
    for (const auto& s : sim.samples) {
      hr.raw.push_back(value_of(s, cfg.functional));
      hr.normalized.push_back(res.prediction.applicable ? res.prediction.normalize(hr.raw.back(), T)
                                                        : hr.raw.back());
    }
    hr.summary = summarize(hr.normalized, res.prediction.limit_mean_shift,
                           res.prediction.applicable ? res.prediction.limit_variance : 1.0);
    res.verdicts.push_back(truncation_verdict(horizon_tag(T), hr.max_expected_dropped_mass,
                                              hr.dropped_mass_budget));
    res.horizons.push_back(std::move(hr));
  }
  // Hazard paths of the last horizon: prior mean and empirical 5%-95% band.
  const auto prior = TiltedIntensity::prior(in);
  const std::size_t h_last = cfg.horizons.size() - 1;
  const int draws = std::min(cfg.curve_draws, cfg.replicates);
  std::vector<double> ts(cfg.curve_points);
  for (int i = 0; i < cfg.curve_points; ++i) ts[i] = t_end * (i + 1) / cfg.curve_points;
  std::vector<std::vector<double>> paths(draws);
  parallel_for(
      draws,
      [&](std::size_t r) {
        auto hz = prior_realization(cfg.model, t_end, cfg.master_seed, h_last, r,
                                    cfg.truncation_budget, cfg.window_tail_tolerance);
        for (double t : ts) paths[r].push_back(hazard_at(hz, t));
      },
      cfg.serial);
  for (int i = 0; i < cfg.curve_points; ++i) {
    std::vector<double> col;
    for (const auto& p : paths) col.push_back(p[i]);
    res.curves.push_back({ts[i], mean_hazard(cfg.model.kernel, prior, ts[i]), quantile_of(col, 0.05),
                          quantile_of(col, 0.95)});
  }
  res.passed = std::all_of(res.verdicts.begin(), res.verdicts.end(),
                           [](const Verdict& v) { return v.passed; });
  return res;
}

ExperimentResult run_posterior_fit(const ExperimentConfig& cfg) {
  const auto in = cfg.model.intensity();
  ExperimentResult res;
  res.experiment = "posterior-fit";
  res.prediction = clt_prediction(cfg.model.kernel, in, Functional::linear);
  const PosteriorModel model(cfg.model.kernel, in, experiment_data(cfg));
  if (model.data().empty()) throw ConfigurationError("posterior-fit needs data");
  RngStream chain = RngStream::derive(cfg.master_seed, kChainStream);
  std::uint64_t sweeps = 0;
  auto states = posterior_chain(cfg, model, cfg.curve_draws, chain, sweeps, res.checkpoint);
  const double t_end = 1.5 * model.max_time();
  const Window w = experiment_window(cfg.model.kernel, t_end, cfg.window_tail_tolerance);
  const WindowSampler sampler(in.base, w);
  TruncationPolicy policy;
  policy.budget = cfg.truncation_budget;
  std::vector<double> ts(cfg.curve_points);
  for (int i = 0; i < cfg.curve_points; ++i) ts[i] = t_end * (i + 1) / cfg.curve_points;
  std::vector<std::vector<double>> paths(states.size());
  std::vector<double> dropped(states.size());
  parallel_for(
      states.size(),
      [&](std::size_t r) {
        RngStream rng = RngStream::derive(cfg.master_seed ^ kPosteriorStreams, 0, r);
        PosteriorState s = states[r];
        auto hz = sample_posterior_hazard(s, w, policy, sampler, rng);
        dropped[r] = hz.crm.expected_dropped_mass;
        for (double t : ts) paths[r].push_back(hazard_at(hz, t));
      },
      cfg.serial);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::vector<double> col;
    double mean = 0.0;
    for (std::size_t r = 0; r < states.size(); ++r) {
      col.push_back(paths[r][i]);
      mean += conditional_mean_hazard(states[r], ts[i]);
    }
    mean /= states.size();
    res.curves.push_back({ts[i], mean, quantile_of(col, 0.05), quantile_of(col, 0.95)});
  }
  double clusters = 0.0;
  for (const auto& s : states) clusters += s.clusters().size();
  res.diagnostics.push_back({"mean_clusters", clusters / states.size()});
  res.diagnostics.push_back({"sweeps", static_cast<double>(sweeps)});
  res.diagnostics.push_back({"posterior_mean_cumulative_hazard", posterior_mean_cumulative_hazard(model, t_end)});
  const double budget = cfg.truncation_budget * sampler.mass() * moment(in, 1.0);
  res.verdicts.push_back(truncation_verdict("curves", *std::max_element(dropped.begin(), dropped.end()), budget));
  res.passed = res.verdicts.back().passed;
  return res;
}

}  // namespace hazlab

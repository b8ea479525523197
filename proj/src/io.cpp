#include "hazlab/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "hazlab/errors.hpp"

namespace hazlab {
namespace {

template <class T>
void read_opt(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigurationError(std::string("bad value for '") + key + "': " + e.what());
  }
}

// JSON has no NaN/inf; those become null.
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
double num_from(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

Json kernel_to_json(const KernelSpec& k) { return {{"name", k.name()}, {"param", k.param}}; }

KernelSpec kernel_from_json(const Json& j) {
  if (j.is_string()) return KernelSpec::from_name(j.get<std::string>(), 0.0);
  double param = 0.0;
  read_opt(j, "param", param);
  if (j.contains("tau")) param = j.at("tau").get<double>();
  if (j.contains("kappa")) param = j.at("kappa").get<double>();
  if (!j.contains("name")) throw ConfigurationError("kernel needs a name");
  return KernelSpec::from_name(j.at("name").get<std::string>(), param);
}

Json base_to_json(const BaseMeasure& b) {
  switch (b.kind()) {
    case BaseMeasureKind::lebesgue: return "lebesgue";
    case BaseMeasureKind::inverse_weibull: return "inverse_weibull";
    case BaseMeasureKind::discrete:
      return {{"locations", b.atom_locations()}, {"masses", b.atom_masses()}};
  }
  return nullptr;
}

BaseMeasure base_from_json(const Json& j) {
  if (j.is_object())
    return BaseMeasure::discrete(j.at("locations").get<std::vector<double>>(),
                                 j.at("masses").get<std::vector<double>>());
  const auto name = j.get<std::string>();
  if (name == "lebesgue") return BaseMeasure::lebesgue();
  if (name == "inverse_weibull") return BaseMeasure::inverse_weibull();
  throw ConfigurationError("unknown base measure '" + name + "'");
}

Json atoms_to_json(const std::vector<Atom>& atoms) {
  Json a = Json::array();
  for (const auto& x : atoms) a.push_back({x.location, x.weight});
  return a;
}

std::vector<Atom> atoms_from_json(const Json& j) {
  std::vector<Atom> out;
  for (const auto& x : j) out.push_back({x.at(0).get<double>(), x.at(1).get<double>()});
  return out;
}

Json verdict_to_json(const Verdict& v) {
  return {{"name", v.name},           {"passed", v.passed},       {"value", num(v.value)},
          {"target", num(v.target)},  {"tolerance", num(v.tolerance)},
          {"standard_error", num(v.standard_error)}, {"provenance", v.provenance},
          {"detail", v.detail}};
}

Json pairs_to_json(const std::vector<std::pair<std::string, double>>& d) {
  Json j = Json::object();
  for (const auto& [k, v] : d) j[k] = num(v);
  return j;
}

std::string expectation_name(Expectation e) {
  switch (e) {
    case Expectation::limit: return "limit";
    case Expectation::vanishing: return "vanishing";
    case Expectation::non_vanishing: return "non_vanishing";
    case Expectation::bracket: return "bracket";
    case Expectation::informational: return "informational";
  }
  return "unknown";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigurationError("cannot write '" + path + "'");
  os << std::setprecision(17);
  return os;
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  if (!j.is_object()) throw ConfigurationError("config must be a JSON object");
  if (j.contains("model")) {
    const auto& m = j.at("model");
    if (m.contains("kernel")) {
      const auto& k = m.at("kernel");
      if (k.is_string()) {
        double param = 0.0;
        read_opt(m, "param", param);
        c.model.kernel = KernelSpec::from_name(k.get<std::string>(), param);
      } else {
        c.model.kernel = kernel_from_json(k);
      }
    }
    read_opt(m, "sigma", c.model.sigma);
    read_opt(m, "gamma", c.model.gamma);
  }
  if (j.contains("functional")) c.functional = functional_from_name(j.at("functional").get<std::string>());
  read_opt(j, "horizons", c.horizons);
  read_opt(j, "replicates", c.replicates);
  read_opt(j, "seed", c.master_seed);
  read_opt(j, "master_seed", c.master_seed);
  read_opt(j, "truncation_budget", c.truncation_budget);
  read_opt(j, "window_tail_tolerance", c.window_tail_tolerance);
  if (j.contains("posterior") && !j.at("posterior").is_null()) {
    c.has_posterior = true;
    const auto& p = j.at("posterior");
    read_opt(p, "data_file", c.posterior.data_file);
    read_opt(p, "checkpoint_in", c.posterior.checkpoint_in);
    if (p.contains("synthetic")) {
      const auto& s = p.at("synthetic");
      read_opt(s, "observations", c.posterior.synthetic.observations);
      read_opt(s, "censored", c.posterior.synthetic.censored);
      read_opt(s, "seed", c.posterior.synthetic.seed);
    }
    if (p.contains("gibbs")) {
      const auto& g = p.at("gibbs");
      read_opt(g, "burn_in", c.posterior.gibbs.burn_in);
      read_opt(g, "thin", c.posterior.gibbs.thin);
      read_opt(g, "refresh_locations", c.posterior.gibbs.refresh_locations);
    }
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    read_opt(t, "mean_se_multiple", c.tolerances.mean_se_multiple);
    read_opt(t, "variance_relative", c.tolerances.variance_relative);
    read_opt(t, "ks_max", c.tolerances.ks_max);
  }
  if (j.contains("consistency")) {
    const auto& t = j.at("consistency");
    read_opt(t, "sample_sizes", c.consistency.sample_sizes);
    read_opt(t, "repetitions", c.consistency.repetitions);
    read_opt(t, "t_min", c.consistency.t_min);
    read_opt(t, "t_max", c.consistency.t_max);
    read_opt(t, "grid_points", c.consistency.grid_points);
    read_opt(t, "retained_states", c.consistency.retained_states);
  }
  read_opt(j, "condition_grid", c.condition_grid);
  read_opt(j, "curve_points", c.curve_points);
  read_opt(j, "curve_draws", c.curve_draws);
  read_opt(j, "serial", c.serial);
  read_opt(j, "out_dir", c.out_dir);
  if (c.replicates < 2) throw ConfigurationError("replicates must be at least 2");
  return c;
}

ExperimentConfig load_config(const std::string& path) { return config_from_json(read_json(path)); }

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["model"] = {{"kernel", kernel_to_json(c.model.kernel)}, {"sigma", c.model.sigma}, {"gamma", c.model.gamma}};
  j["functional"] = functional_name(c.functional);
  j["horizons"] = c.horizons;
  j["replicates"] = c.replicates;
  j["seed"] = c.master_seed;
  j["truncation_budget"] = c.truncation_budget;
  j["window_tail_tolerance"] = c.window_tail_tolerance;
  if (c.has_posterior) {
    const auto& p = c.posterior;
    j["posterior"] = {{"data_file", p.data_file},
                      {"checkpoint_in", p.checkpoint_in},
                      {"synthetic", {{"observations", p.synthetic.observations},
                                     {"censored", p.synthetic.censored},
                                     {"seed", p.synthetic.seed}}},
                      {"gibbs", {{"burn_in", p.gibbs.burn_in},
                                 {"thin", p.gibbs.thin},
                                 {"refresh_locations", p.gibbs.refresh_locations}}}};
  }
  j["tolerances"] = {{"mean_se_multiple", c.tolerances.mean_se_multiple},
                     {"variance_relative", c.tolerances.variance_relative},
                     {"ks_max", c.tolerances.ks_max}};
  j["consistency"] = {{"sample_sizes", c.consistency.sample_sizes},
                      {"repetitions", c.consistency.repetitions},
                      {"t_min", c.consistency.t_min},
                      {"t_max", c.consistency.t_max},
                      {"grid_points", c.consistency.grid_points},
                      {"retained_states", c.consistency.retained_states}};
  j["condition_grid"] = c.condition_grid;
  j["curve_points"] = c.curve_points;
  j["curve_draws"] = c.curve_draws;
  j["serial"] = c.serial;
  j["out_dir"] = c.out_dir;
  return j;
}

Json summary_to_json(const SampleSummary& s) {
  return {{"count", s.count},
          {"mean", num(s.mean)},
          {"variance", num(s.variance)},
          {"skewness", num(s.skewness)},
          {"excess_kurtosis", num(s.excess_kurtosis)},
          {"ks_distance", num(s.ks_distance)},
          {"reference_mean", num(s.reference_mean)},
          {"reference_variance", num(s.reference_variance)},
          {"se_mean", num(s.se_mean)},
          {"se_variance", num(s.se_variance)},
          {"se_skewness", num(s.se_skewness)},
          {"se_kurtosis", num(s.se_kurtosis)}};
}

Json prediction_to_json(const CltPrediction& p) {
  return {{"functional", functional_name(p.functional)},
          {"kernel", kernel_to_json(p.kernel)},
          {"rate_exponent", num(p.rate_exponent)},
          {"trend_coefficient", num(p.trend_coefficient)},
          {"trend_exponent", num(p.trend_exponent)},
          {"limit_mean_shift", num(p.limit_mean_shift)},
          {"limit_variance", num(p.limit_variance)},
          {"applicable", p.applicable},
          {"reason", p.reason},
          {"provenance", p.provenance}};
}

Json condition_report_to_json(const ConditionReport& r) {
  Json conds = Json::array();
  for (const auto& c : r.conditions) {
    Json values = Json::array();
    for (double v : c.values) values.push_back(num(v));
    conds.push_back({{"name", c.name},
                     {"description", c.description},
                     {"expectation", expectation_name(c.expectation)},
                     {"horizons", c.horizons},
                     {"values", values},
                     {"target", c.target ? num(*c.target) : Json(nullptr)},
                     {"fitted_limit", num(c.richardson)},
                     {"last_value", num(c.last_value)},
                     {"relative_change", num(c.relative_change)},
                     {"log_slope", num(c.log_slope)},
                     {"converged", c.converged},
                     {"passed", c.passed},
                     {"provenance", c.provenance}});
  }
  return {{"family", r.family},   {"kernel", kernel_to_json(r.kernel)},
          {"sigma", r.sigma},       {"gamma", r.gamma},
          {"posterior", r.posterior}, {"all_passed", r.all_passed},
          {"conditions", conds}};
}

Json checkpoint_to_json(const PosteriorCheckpoint& cp) {
  Json clusters = Json::array();
  for (const auto& c : cp.clusters)
    clusters.push_back({{"location", c.location}, {"size", c.size}, {"jump", c.jump}, {"tilt", c.tilt}});
  return {{"labels", cp.labels}, {"clusters", clusters}, {"rng_state", cp.rng_state}, {"sweeps", cp.sweeps}};
}

PosteriorCheckpoint checkpoint_from_json(const Json& j) {
  PosteriorCheckpoint cp;
  try {
    cp.labels = j.at("labels").get<std::vector<int>>();
    for (const auto& c : j.at("clusters"))
      cp.clusters.push_back({c.at("location").get<double>(), c.at("size").get<int>(),
                             c.at("jump").get<double>(), c.at("tilt").get<double>()});
    cp.rng_state = j.at("rng_state").get<std::string>();
    cp.sweeps = j.value("sweeps", std::uint64_t{0});
  } catch (const Json::exception& e) {
    throw ConfigurationError(std::string("malformed checkpoint: ") + e.what());
  }
  return cp;
}

PosteriorState restore_state(const PosteriorModel& model, const PosteriorCheckpoint& cp) {
  if (cp.labels.size() != model.exact_count())
    throw ConfigurationError("checkpoint does not match the number of exact observations");
  PosteriorState s(model, cp.labels, cp.clusters);
  s.check_invariants();
  return s;
}

Json result_to_json(const ExperimentResult& r) {
  Json j;
  j["experiment"] = r.experiment;
  j["status"] = r.status;
  j["passed"] = r.passed;
  j["prediction"] = prediction_to_json(r.prediction);
  Json hs = Json::array();
  for (const auto& h : r.horizons) {
    Json alts = Json::array();
    for (const auto& a : h.alternatives) alts.push_back({{"name", a.name}, {"summary", summary_to_json(a.summary)}});
    hs.push_back({{"horizon", h.horizon},
                  {"summary", summary_to_json(h.summary)},
                  {"alternatives", alts},
                  {"max_expected_dropped_mass", num(h.max_expected_dropped_mass)},
                  {"dropped_mass_budget", num(h.dropped_mass_budget)},
                  {"mean_atoms", num(h.mean_atoms)},
                  {"diagnostics", pairs_to_json(h.diagnostics)}});
  }
  j["horizons"] = hs;
  Json vs = Json::array();
  for (const auto& v : r.verdicts) vs.push_back(verdict_to_json(v));
  j["verdicts"] = vs;
  j["diagnostics"] = pairs_to_json(r.diagnostics);
  Json reps = Json::array();
  for (const auto& c : r.condition_reports) reps.push_back(condition_report_to_json(c));
  j["condition_reports"] = reps;
  j["notes"] = r.notes;
  j["notes"].push_back(
      "limits hold almost surely over data sets; each run checks the realized data set only");
  return j;
}

void write_samples_csv(const ExperimentResult& r, const std::string& path) {
  auto os = open_out(path);
  os << "horizon,replicate,raw,normalized\n";
  for (const auto& h : r.horizons)
    for (std::size_t i = 0; i < h.raw.size(); ++i)
      os << h.horizon << ',' << i << ',' << h.raw[i] << ',' << h.normalized[i] << '\n';
}

void write_curves_csv(const ExperimentResult& r, const std::string& path) {
  auto os = open_out(path);
  os << "t,mean,lower,upper\n";
  for (const auto& c : r.curves) os << c.t << ',' << c.mean << ',' << c.lower << ',' << c.upper << '\n';
}

void write_result(const ExperimentResult& r, const ExperimentConfig& config, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  Json j = result_to_json(r);
  j["config"] = config_to_json(config);
  write_json(j, (dir / "result.json").string());
  write_samples_csv(r, (dir / "samples.csv").string());
  write_curves_csv(r, (dir / "curves.csv").string());
  if (r.checkpoint) write_json(checkpoint_to_json(*r.checkpoint), (dir / "checkpoint.json").string());
}

Json realization_to_json(const RealizationDump& d) {
  const auto& c = d.realization.crm;
  return {{"kernel", kernel_to_json(d.realization.kernel)},
          {"intensity", {{"sigma", d.intensity.sigma}, {"gamma", d.intensity.gamma},
                         {"base", base_to_json(d.intensity.base)}}},
          {"window", {c.window.lower, c.window.upper}},
          {"jump_floor", c.jump_floor},
          {"window_mass", c.window_mass},
          {"expected_dropped_mass", c.expected_dropped_mass},
          {"atoms", atoms_to_json(c.atoms)},
          {"fixed_atoms", atoms_to_json(d.realization.fixed_atoms)},
          {"seed", d.seed}};
}

RealizationDump realization_from_json(const Json& j) {
  RealizationDump d;
  try {
    d.realization.kernel = kernel_from_json(j.at("kernel"));
    const auto& in = j.at("intensity");
    d.intensity = GeneralizedGammaIntensity(in.at("sigma").get<double>(), in.at("gamma").get<double>(),
                                            base_from_json(in.value("base", Json("lebesgue"))));
    auto& c = d.realization.crm;
    c.window = {j.at("window").at(0).get<double>(), j.at("window").at(1).get<double>()};
    c.jump_floor = j.at("jump_floor").get<double>();
    c.window_mass = j.value("window_mass", 0.0);
    c.expected_dropped_mass = j.value("expected_dropped_mass", 0.0);
    c.atoms = atoms_from_json(j.at("atoms"));
    d.realization.fixed_atoms = atoms_from_json(j.value("fixed_atoms", Json::array()));
    d.seed = j.value("seed", std::uint64_t{0});
  } catch (const Json::exception& e) {
    throw ConfigurationError(std::string("malformed realization dump: ") + e.what());
  }
  return d;
}

std::vector<Observation> read_data_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigurationError("cannot read data file '" + path + "'");
  std::vector<Observation> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigurationError("data line " + std::to_string(lineno) + ": expected time,censored");
    const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
    if (lineno == 1 && a.find("time") != std::string::npos) continue;  // header
    Observation o;
    try {
      std::size_t used = 0;
      o.time = std::stod(a, &used);
      const int flag = std::stoi(b);
      if (flag != 0 && flag != 1) throw ConfigurationError("censored must be 0 or 1");
      o.censored = flag == 1;
    } catch (const std::logic_error&) {
      throw ConfigurationError("data line " + std::to_string(lineno) + " is not numeric");
    }
    if (!(o.time > 0.0) || !std::isfinite(o.time))
      throw ConfigurationError("data line " + std::to_string(lineno) + ": times must be positive");
    out.push_back(o);
  }
  return out;
}

void write_data_csv(const std::vector<Observation>& data, const std::string& path) {
  auto os = open_out(path);
  os << "time,censored\n";
  for (const auto& o : data) os << o.time << ',' << (o.censored ? 1 : 0) << '\n';
}

Json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigurationError("cannot read '" + path + "'");
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigurationError("invalid JSON in '" + path + "': " + e.what());
  }
}

void write_json(const Json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigurationError("cannot write '" + path + "'");
  os << j.dump(2) << '\n';
}

}  // namespace hazlab

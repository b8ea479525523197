#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "hazlab/errors.hpp"
#include "hazlab/experiments.hpp"
#include "hazlab/io.hpp"
#include "hazlab/parallel.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> replicates;
  std::vector<double> horizons;
  std::string data;
  std::string checkpoint;
  int threads = 0;
  bool serial = false;
};

hazlab::ExperimentConfig build_config(const Overrides& o) {
  hazlab::ExperimentConfig c = o.config.empty() ? hazlab::ExperimentConfig{} : hazlab::load_config(o.config);
  if (o.seed) c.master_seed = *o.seed;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.replicates) c.replicates = *o.replicates;
  if (!o.horizons.empty()) c.horizons = o.horizons;
  if (!o.data.empty()) {
    c.has_posterior = true;
    c.posterior.data_file = o.data;
  }
  if (!o.checkpoint.empty()) {
    c.has_posterior = true;
    c.posterior.checkpoint_in = o.checkpoint;
  }
  if (o.serial) c.serial = true;
  if (c.replicates < 2) throw hazlab::ConfigurationError("replicates must be at least 2");
  return c;
}

void dump_first_realization(const hazlab::ExperimentConfig& c) {
  const std::size_t h = c.horizons.size() - 1;
  hazlab::RealizationDump d;
  d.realization = hazlab::prior_realization(c.model, c.horizons[h], c.master_seed, h, 0,
                                            c.truncation_budget, c.window_tail_tolerance);
  d.intensity = c.model.intensity();
  d.seed = c.master_seed;
  hazlab::write_json(hazlab::realization_to_json(d),
                     (std::filesystem::path(c.out_dir) / "realization.json").string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hazlab: kernel mixture hazards driven by generalized gamma random measures"};
  app.require_subcommand(1);
  Overrides o;

  using Runner = hazlab::ExperimentResult (*)(const hazlab::ExperimentConfig&);
  const std::map<std::string, std::pair<Runner, std::string>> commands{
      {"simulate", {hazlab::run_simulate, "simulate prior hazard paths and functionals"}},
      {"prior-clt", {hazlab::run_prior_clt, "check a prior CLT against its predicted normal law"}},
      {"posterior-clt", {hazlab::run_posterior_clt, "check the posterior CLT with the prior constants"}},
      {"conditions", {hazlab::run_conditions, "evaluate the CLT sufficient conditions on a horizon grid"}},
      {"consistency", {hazlab::run_consistency_demo, "posterior mean hazard error against a true hazard"}},
      {"posterior-fit", {hazlab::run_posterior_fit, "Gibbs on a dataset and posterior hazard curves"}},
  };
  std::map<CLI::App*, Runner> runners;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    sub->add_option("-c,--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out-dir", o.out_dir, "output directory");
    sub->add_option("--replicates", o.replicates, "replicates per horizon");
    sub->add_option("--horizons", o.horizons, "horizon list")->delimiter(',');
    sub->add_option("--data", o.data, "CSV data file (time,censored)")->check(CLI::ExistingFile);
    sub->add_option("--checkpoint", o.checkpoint, "resume the Gibbs chain from a checkpoint")
        ->check(CLI::ExistingFile);
    sub->add_option("--threads", o.threads, "worker threads (0 = all)");
    sub->add_flag("--serial", o.serial, "run replicates on one thread");
    runners[sub] = entry.first;
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (o.threads > 0) hazlab::set_worker_count(o.threads);
    const auto config = build_config(o);
    for (const auto& [sub, run] : runners) {
      if (!sub->parsed()) continue;
      const auto result = run(config);
      hazlab::write_result(result, config, config.out_dir);
      if (sub->get_name() == "simulate") dump_first_realization(config);
      for (const auto& v : result.verdicts)
        std::cout << (v.passed ? "PASS " : "FAIL ") << v.name << "  value=" << v.value
                  << " target=" << v.target << " tol=" << v.tolerance << '\n';
      std::cout << result.experiment << ": " << result.status << (result.passed ? ", passed" : ", failed")
                << " -> " << config.out_dir << '\n';
      return result.passed ? 0 : 2;
    }
  } catch (const hazlab::UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

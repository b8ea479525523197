#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hazlab/errors.hpp"
#include "hazlab/experiments.hpp"
#include "hazlab/io.hpp"
#include "hazlab/posterior.hpp"
#include "hazlab/rng.hpp"

using namespace hazlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hazlab_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream os(p);
  os << s;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + HAZLAB_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
#ifdef WEXITSTATUS
  return WEXITSTATUS(status);
#else
  return status;
#endif
}

ExperimentConfig small_ou() {
  ExperimentConfig c;
  c.model = {KernelSpec::ornstein_uhlenbeck(2.0), 0.0, 1.0};
  c.replicates = 20;
  c.horizons = {5.0, 10.0};
  c.master_seed = 7;
  c.truncation_budget = 1e-3;
  c.curve_points = 10;
  c.curve_draws = 20;
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  const Json j = Json::parse(R"({
    "model": {"kernel": "rectangular", "param": 1.5, "sigma": 0.25, "gamma": 2.0},
    "functional": "path_variance",
    "horizons": [10, 20, 40],
    "replicates": 300,
    "seed": 99,
    "truncation_budget": 1e-3,
    "posterior": {"synthetic": {"observations": 5, "censored": 2, "seed": 3},
                  "gibbs": {"burn_in": 10, "thin": 2, "refresh_locations": false}},
    "tolerances": {"mean_se_multiple": 4, "variance_relative": 0.2, "ks_max": 0.1},
    "consistency": {"sample_sizes": [10, 20], "repetitions": 2},
    "serial": true,
    "out_dir": "somewhere"
  })");
  const auto c = config_from_json(j);
  CHECK(c.model.kernel.kind == KernelKind::rectangular);
  CHECK(c.model.kernel.param == 1.5);
  CHECK(c.model.sigma == 0.25);
  CHECK(c.model.gamma == 2.0);
  CHECK(c.functional == Functional::path_variance);
  CHECK(c.horizons == std::vector<double>{10, 20, 40});
  CHECK(c.replicates == 300);
  CHECK(c.master_seed == 99);
  CHECK(c.truncation_budget == 1e-3);
  CHECK(c.has_posterior);
  CHECK(c.posterior.synthetic.observations == 5);
  CHECK(c.posterior.synthetic.censored == 2);
  CHECK(c.posterior.gibbs.burn_in == 10);
  CHECK(c.posterior.gibbs.thin == 2);
  CHECK_FALSE(c.posterior.gibbs.refresh_locations);
  CHECK(c.tolerances.mean_se_multiple == 4.0);
  CHECK(c.tolerances.ks_max == 0.1);
  CHECK(c.consistency.sample_sizes == std::vector<int>{10, 20});
  CHECK(c.serial);
  CHECK(c.out_dir == "somewhere");

  const auto ou = config_from_json(Json::parse(R"({"model": {"kernel": {"name": "ou", "kappa": 3}}})"));
  CHECK(ou.model.kernel.kind == KernelKind::ornstein_uhlenbeck);
  CHECK(ou.model.kernel.param == 3.0);
  CHECK_FALSE(ou.has_posterior);

  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"model": {"kernel": "weibull"}})")), ConfigurationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"functional": "cubic"})")), ConfigurationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"replicates": 1})")), ConfigurationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"replicates": "many"})")), ConfigurationError);
  CHECK_THROWS_AS(config_from_json(Json::parse("[1, 2]")), ConfigurationError);
  CHECK_THROWS_AS(load_config("/nonexistent/hazlab.json"), ConfigurationError);
  const auto dir = scratch("badjson");
  write_text(dir / "bad.json", "{ not json");
  CHECK_THROWS_AS(load_config((dir / "bad.json").string()), ConfigurationError);
}

TEST_CASE("config round trip") {
  auto c = small_ou();
  c.functional = Functional::path_second_moment;
  c.has_posterior = true;
  c.posterior.synthetic = {7, 3, 11};
  c.posterior.gibbs.burn_in = 12;
  c.consistency.t_max = 4.0;
  const auto back = config_from_json(config_to_json(c));
  CHECK(back.model.kernel.kind == c.model.kernel.kind);
  CHECK(back.model.kernel.param == c.model.kernel.param);
  CHECK(back.model.sigma == c.model.sigma);
  CHECK(back.functional == c.functional);
  CHECK(back.horizons == c.horizons);
  CHECK(back.replicates == c.replicates);
  CHECK(back.master_seed == c.master_seed);
  CHECK(back.truncation_budget == c.truncation_budget);
  CHECK(back.has_posterior);
  CHECK(back.posterior.synthetic.observations == 7);
  CHECK(back.posterior.synthetic.censored == 3);
  CHECK(back.posterior.synthetic.seed == 11);
  CHECK(back.posterior.gibbs.burn_in == 12);
  CHECK(back.consistency.t_max == 4.0);
  CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("data csv") {
  const auto dir = scratch("data");
  const std::vector<Observation> data{{0.1, false}, {1.0 / 3.0, true}, {2.5, false}};
  write_data_csv(data, (dir / "d.csv").string());
  const auto back = read_data_csv((dir / "d.csv").string());
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].time == data[i].time);
    CHECK(back[i].censored == data[i].censored);
  }

  write_text(dir / "noheader.csv", "1.5,0\n\n2.0,1\n");
  const auto nh = read_data_csv((dir / "noheader.csv").string());
  REQUIRE(nh.size() == 2);
  CHECK(nh[1].censored);

  write_text(dir / "flag.csv", "time,censored\n1.0,2\n");
  CHECK_THROWS_AS(read_data_csv((dir / "flag.csv").string()), ConfigurationError);
  write_text(dir / "neg.csv", "time,censored\n-1.0,0\n");
  CHECK_THROWS_AS(read_data_csv((dir / "neg.csv").string()), ConfigurationError);
  write_text(dir / "zero.csv", "time,censored\n0,0\n");
  CHECK_THROWS_AS(read_data_csv((dir / "zero.csv").string()), ConfigurationError);
  write_text(dir / "text.csv", "time,censored\nabc,0\n");
  CHECK_THROWS_AS(read_data_csv((dir / "text.csv").string()), ConfigurationError);
  CHECK_THROWS_AS(read_data_csv((dir / "missing.csv").string()), ConfigurationError);
}

TEST_CASE("realization dump round trip") {
  const auto c = small_ou();
  RealizationDump d;
  d.realization = prior_realization(c.model, 10.0, 5, 0, 0, c.truncation_budget, c.window_tail_tolerance);
  d.realization.fixed_atoms = {{0.5, 1.25}, {2.0, 0.75}};
  d.intensity = c.model.intensity();
  d.seed = 5;
  REQUIRE_FALSE(d.realization.crm.atoms.empty());
  const auto back = realization_from_json(Json::parse(realization_to_json(d).dump()));
  CHECK(back.seed == 5);
  CHECK(back.realization.kernel.kind == KernelKind::ornstein_uhlenbeck);
  CHECK(back.realization.kernel.param == 2.0);
  CHECK(back.intensity.sigma == d.intensity.sigma);
  CHECK(back.intensity.gamma == d.intensity.gamma);
  CHECK(back.realization.crm.window.lower == d.realization.crm.window.lower);
  CHECK(back.realization.crm.window.upper == d.realization.crm.window.upper);
  CHECK(back.realization.crm.jump_floor == d.realization.crm.jump_floor);
  REQUIRE(back.realization.crm.atoms.size() == d.realization.crm.atoms.size());
  for (std::size_t i = 0; i < d.realization.crm.atoms.size(); ++i) {
    CHECK(back.realization.crm.atoms[i].location == d.realization.crm.atoms[i].location);
    CHECK(back.realization.crm.atoms[i].weight == d.realization.crm.atoms[i].weight);
  }
  REQUIRE(back.realization.fixed_atoms.size() == 2);
  CHECK(back.realization.fixed_atoms[1].weight == 0.75);
  // Reloaded realization gives the same hazard path.
  for (double t : {0.5, 3.0, 9.0})
    CHECK(hazard_at(back.realization, t) == hazard_at(d.realization, t));

  RealizationDump disc;
  disc.intensity = GeneralizedGammaIntensity(0.5, 1.0, BaseMeasure::discrete({1.0, 2.0}, {0.3, 0.7}));
  disc.realization.kernel = KernelSpec::dykstra_laud();
  const auto db = realization_from_json(realization_to_json(disc));
  REQUIRE(db.intensity.base.is_discrete());
  CHECK(db.intensity.base.atom_masses() == std::vector<double>{0.3, 0.7});
  RealizationDump iw;
  iw.intensity = GeneralizedGammaIntensity(0.0, 1.0, BaseMeasure::inverse_weibull());
  iw.realization.kernel = KernelSpec::exponential();
  CHECK(realization_from_json(realization_to_json(iw)).intensity.base.kind() == BaseMeasureKind::inverse_weibull);

  CHECK_THROWS_AS(realization_from_json(Json::parse(R"({"kernel": "dl"})")), ConfigurationError);
}

TEST_CASE("checkpoint round trip restores the chain exactly") {
  const std::vector<Observation> data{{0.4, false}, {1.1, false}, {1.7, true}, {2.2, false}};
  const PosteriorModel model(KernelSpec::ornstein_uhlenbeck(2.0),
                             GeneralizedGammaIntensity(0.0, 1.0, BaseMeasure::lebesgue()), data);
  RngStream rng(17);
  PosteriorState s(model, rng);
  for (int i = 0; i < 5; ++i) s.gibbs_sweep(rng);
  const auto cp = s.checkpoint(rng, 5);
  const auto cp2 = checkpoint_from_json(Json::parse(checkpoint_to_json(cp).dump()));
  CHECK(cp2.labels == cp.labels);
  CHECK(cp2.sweeps == 5);
  CHECK(cp2.rng_state == cp.rng_state);
  REQUIRE(cp2.clusters.size() == cp.clusters.size());
  for (std::size_t i = 0; i < cp.clusters.size(); ++i) {
    CHECK(cp2.clusters[i].location == cp.clusters[i].location);
    CHECK(cp2.clusters[i].size == cp.clusters[i].size);
  }

  auto resumed = restore_state(model, cp2);
  RngStream rng2(0);
  rng2.restore(cp2.rng_state);
  for (int i = 0; i < 5; ++i) {
    s.gibbs_sweep(rng);
    resumed.gibbs_sweep(rng2);
  }
  CHECK(resumed.labels() == s.labels());
  REQUIRE(resumed.clusters().size() == s.clusters().size());
  for (std::size_t i = 0; i < s.clusters().size(); ++i)
    CHECK(resumed.clusters()[i].location == s.clusters()[i].location);

  auto bad = cp2;
  bad.labels.pop_back();
  CHECK_THROWS_AS(restore_state(model, bad), ConfigurationError);
  CHECK_THROWS_AS(checkpoint_from_json(Json::parse(R"({"labels": [0]})")), ConfigurationError);
}

TEST_CASE("write_result files") {
  auto c = small_ou();
  const auto dir = scratch("result");
  c.out_dir = dir.string();
  const auto r = run_prior_clt(c);
  write_result(r, c, c.out_dir);

  const auto j = read_json((dir / "result.json").string());
  CHECK(j.at("experiment") == r.experiment);
  CHECK(j.at("passed") == r.passed);
  CHECK(j.at("horizons").size() == 2);
  CHECK(j.at("verdicts").size() == r.verdicts.size());
  CHECK(j.at("prediction").at("functional") == "linear");
  CHECK(config_from_json(j.at("config")).replicates == 20);

  const auto rows = read_csv(dir / "samples.csv");
  REQUIRE(rows.size() == 1 + 2 * 20);
  CHECK(rows[0] == std::vector<std::string>{"horizon", "replicate", "raw", "normalized"});
  // Full precision: values parse back exactly.
  CHECK(std::stod(rows[1][0]) == 5.0);
  CHECK(std::stod(rows[1][2]) == r.horizons[0].raw[0]);
  CHECK(std::stod(rows[40][3]) == r.horizons[1].normalized[19]);
  CHECK(read_csv(dir / "curves.csv").at(0) == std::vector<std::string>{"t", "mean", "lower", "upper"});
  CHECK_FALSE(fs::exists(dir / "checkpoint.json"));
}

TEST_CASE("condition report json") {
  auto c = small_ou();
  c.condition_grid = {10.0, 20.0, 40.0};
  const auto r = run_conditions(c);
  REQUIRE_FALSE(r.condition_reports.empty());
  const auto j = condition_report_to_json(r.condition_reports.front());
  CHECK(j.contains("family"));
  CHECK(j.at("kernel").at("name") == "ornstein_uhlenbeck");
  REQUIRE_FALSE(j.at("conditions").empty());
  const auto& cond = j.at("conditions").at(0);
  for (const char* key : {"name", "expectation", "horizons", "values", "fitted_limit", "passed"})
    CHECK(cond.contains(key));
  CHECK(cond.at("values").size() == 3);
}

TEST_CASE("cli end to end") {
  const auto dir = scratch("cli");
  const auto cfg = dir / "ou.json";
  write_text(cfg, R"({"model": {"kernel": "ou", "param": 2, "sigma": 0, "gamma": 1},
                      "functional": "linear", "horizons": [50], "replicates": 100,
                      "truncation_budget": 1e-3, "curve_points": 10, "curve_draws": 10,
                      "posterior": {"synthetic": {"observations": 5, "censored": 2, "seed": 1},
                                    "gibbs": {"burn_in": 5, "thin": 1}}})");
  const auto c = "-c \"" + cfg.string() + "\" ";

  SUBCASE("prior-clt with overrides") {
    const auto out = dir / "prior";
    const int code = run_cli("prior-clt " + c + "--seed 3 --replicates 40 --horizons 5,10 --out-dir \"" +
                                 out.string() + "\"",
                             dir / "prior.log");
    CHECK((code == 0 || code == 2));
    const auto j = read_json((out / "result.json").string());
    CHECK(j.at("config").at("replicates") == 40);
    CHECK(j.at("horizons").size() == 2);
    CHECK(read_csv(out / "samples.csv").size() == 1 + 2 * 40);
    CHECK(fs::exists(out / "curves.csv"));
    // Same seed, same samples.
    const auto out2 = dir / "prior2";
    run_cli("prior-clt " + c + "--seed 3 --replicates 40 --horizons 5,10 --out-dir \"" + out2.string() + "\"",
            dir / "prior2.log");
    CHECK(read_csv(out / "samples.csv") == read_csv(out2 / "samples.csv"));
  }

  SUBCASE("simulate writes a realization dump") {
    const auto out = dir / "sim";
    CHECK(run_cli("simulate " + c + "--replicates 10 --horizons 5 --out-dir \"" + out.string() + "\"",
                  dir / "sim.log") == 0);
    const auto d = realization_from_json(read_json((out / "realization.json").string()));
    CHECK(d.realization.kernel.kind == KernelKind::ornstein_uhlenbeck);
    CHECK_FALSE(d.realization.crm.atoms.empty());
    CHECK(read_csv(out / "curves.csv").size() == 11);
  }

  SUBCASE("posterior-fit with data and checkpoint resume") {
    const auto data = dir / "data.csv";
    write_data_csv({{0.5, false}, {1.2, false}, {2.0, true}, {0.8, false}}, data.string());
    const auto out = dir / "fit";
    const std::string common = "posterior-fit " + c + "--data \"" + data.string() + "\" ";
    CHECK(run_cli(common + "--out-dir \"" + out.string() + "\"", dir / "fit.log") == 0);
    const auto cp = checkpoint_from_json(read_json((out / "checkpoint.json").string()));
    CHECK(cp.labels.size() == 3);
    const auto out2 = dir / "fit2";
    CHECK(run_cli(common + "--checkpoint \"" + (out / "checkpoint.json").string() + "\" --out-dir \"" +
                      out2.string() + "\"",
                  dir / "fit2.log") == 0);
    const auto cp2 = checkpoint_from_json(read_json((out2 / "checkpoint.json").string()));
    CHECK(cp2.sweeps > cp.sweeps);
  }

  SUBCASE("exit codes") {
    const auto dl = dir / "dl.json";
    write_text(dl, R"({"model": {"kernel": "dl"}, "functional": "path_second_moment", "horizons": [10],
                       "replicates": 10})");
    CHECK(run_cli("prior-clt -c \"" + dl.string() + "\" --out-dir \"" + (dir / "dl").string() + "\"",
                  dir / "dl.log") == 3);
    const auto bad = dir / "bad.json";
    write_text(bad, R"({"model": {"kernel": "nope"}})");
    CHECK(run_cli("prior-clt -c \"" + bad.string() + "\"", dir / "bad.log") == 1);
    CHECK(run_cli("prior-clt " + c + "--replicates 1", dir / "r1.log") == 1);
    CHECK(run_cli("no-such-command", dir / "none.log") != 0);
  }
}

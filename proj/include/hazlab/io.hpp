#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hazlab/asymptotics.hpp"
#include "hazlab/experiments.hpp"
#include "hazlab/hazard.hpp"
#include "hazlab/posterior.hpp"

namespace hazlab {

using Json = nlohmann::json;

// Experiment configuration. Missing keys keep their defaults; unknown
// kernel or functional names raise ConfigurationError.
ExperimentConfig config_from_json(const Json& j);
ExperimentConfig load_config(const std::string& path);
Json config_to_json(const ExperimentConfig& config);

Json summary_to_json(const SampleSummary& s);
Json prediction_to_json(const CltPrediction& p);
Json condition_report_to_json(const ConditionReport& report);
Json result_to_json(const ExperimentResult& result);

void write_result(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::string& out_dir);
// horizon, replicate, raw, normalized
void write_samples_csv(const ExperimentResult& result, const std::string& path);
// t, mean, lower, upper
void write_curves_csv(const ExperimentResult& result, const std::string& path);

struct RealizationDump {
  HazardRealization realization;
  GeneralizedGammaIntensity intensity;
  std::uint64_t seed = 0;
};
Json realization_to_json(const RealizationDump& dump);
RealizationDump realization_from_json(const Json& j);

// time, censored
std::vector<Observation> read_data_csv(const std::string& path);
void write_data_csv(const std::vector<Observation>& data, const std::string& path);

Json checkpoint_to_json(const PosteriorCheckpoint& checkpoint);
PosteriorCheckpoint checkpoint_from_json(const Json& j);
PosteriorState restore_state(const PosteriorModel& model, const PosteriorCheckpoint& checkpoint);

Json read_json(const std::string& path);
void write_json(const Json& j, const std::string& path);

}  // namespace hazlab

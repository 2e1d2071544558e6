#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "pdrls/experiment.hpp"

namespace pdrls {

/// Parses and validates a JSON experiment description; see README for the
/// schema.  Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig load_config_file(const std::string& path);

/// Built-in configurations: "desk" (5 nodes, m = 4) and "paper"
/// (10 nodes, m = 8).
ExperimentConfig preset_config(const std::string& name);

/// Command-line overrides, applied after loading.
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> entries_l;
    std::optional<double> lambda;
    std::optional<std::string> scheme;
    std::optional<double> link_noise_scale;
    std::optional<int> n_runs;
    std::optional<int> iterations;
};

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& o);

/// Fully resolved provenance record embedded in every output: topology,
/// weights, profiles and ground truth as realized, plus the original knobs.
/// Loading the echo back reproduces the identical experiment.
nlohmann::json config_echo(const ResolvedExperiment& experiment);

} // namespace pdrls

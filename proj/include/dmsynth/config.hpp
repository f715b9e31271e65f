#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dmsynth/privacy.hpp"
#include "dmsynth/taskbench.hpp"
#include "dmsynth/theory.hpp"

namespace dmsynth {

// Knobs for the bound command beyond BoundParams: the Monte-Carlo experiment
// size and deviation threshold.
struct BoundConfig {
    BoundParams params{1.0, std::exp(-1.0), 2};
    int num_hypotheses = 50;
    double threshold = 0.1;
    int trials = 1000;
};

// Cross-command experiment plumbing: seed list for multi-seed arms, the
// scale-sweep multipliers, synthetic-set size (0 = match the train split),
// the report lambda, and the task-generation seed.
struct ExperimentConfig {
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::vector<double> scale_k = {1.0, 2.0, 5.0, 10.0};
    int synthetic_n = 0;
    double eval_lambda = 0.0;
    std::uint64_t task_seed = 0;
};

struct RunConfig {
    TaskSpec task = TaskSpec::default_task();
    TrainConfig train;
    PipelineToggles toggles;
    SamplerConfig sampler;
    BoundConfig bound;
    MiaConfig mia;
    ExperimentConfig experiment;

    // throws std::invalid_argument naming the offending field
    void validate() const;
};

// JSON text listing every field, defaults included, in a stable key order.
// Re-parsing a snapshot reproduces the config exactly.
std::string config_snapshot(const RunConfig& cfg);

// Parses JSON text. Empty (or whitespace-only) input yields all defaults.
// Unknown keys, type mismatches, and invariant violations raise
// std::invalid_argument with the field name and a line number.
RunConfig parse_config_text(const std::string& text);

RunConfig parse_config(const std::filesystem::path& path);

} // namespace dmsynth

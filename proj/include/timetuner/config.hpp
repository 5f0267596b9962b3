// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "timetuner/oracle.hpp"
#include "timetuner/samplers.hpp"
#include "timetuner/schedule.hpp"
#include "timetuner/trajectory.hpp"
#include "timetuner/tuner.hpp"

namespace timetuner {

struct OracleConfig {
    std::string preset;  // "gmm8", "standard-gaussian", or empty for explicit components
    int dim = 2;         // standard-gaussian only
    std::vector<MixtureComponent> components;
};

struct TrajectoryConfig {
    TrajectoryKind kind = TrajectoryKind::Quadratic;
    int steps = 10;
    double t_min = 0.0;
};

struct AnalysisConfig {
    int n_paths = 4096;
    int dense_steps = 1000;
    std::size_t n_samples = 50000;
    int n_projections = 128;
};

/// One experiment: every block with its defaults filled in.
struct ExperimentConfig {
    NoiseSchedule schedule;
    OracleConfig oracle;
    TrajectoryConfig trajectory;
    SamplerConfig sampler;
    TunerConfig tuner;
    AnalysisConfig analysis;
    std::uint64_t seed = 0;
    std::string output_dir = "out";

    GaussianMixtureOracle make_oracle() const;
    Trajectory make_trajectory() const;
    /// Propagates the master seed into the sampler and tuner blocks.
    void set_seed(std::uint64_t s);
};

/// Required: schedule, oracle (preset or components), trajectory.kind,
/// trajectory.K, sampler.kind. Everything else has a default. Throws ConfigError
/// naming the dotted field path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace timetuner

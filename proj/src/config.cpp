// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "timetuner/config.hpp"

#include <fstream>
#include <type_traits>

#include <fmt/format.h>

#include "timetuner/errors.hpp"

namespace timetuner {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(join(path, key), "missing required field");
    return *it;
}

template <typename T>
T as(const json& value, const std::string& field) {
    try {
        if constexpr (std::is_same_v<T, std::string>) {
            if (!value.is_string()) throw ConfigError(field, "expected a string");
        } else if constexpr (std::is_integral_v<T>) {
            if (!value.is_number_integer()) throw ConfigError(field, "expected an integer");
            if constexpr (std::is_unsigned_v<T>)
                if (!value.is_number_integer() || (!value.is_number_unsigned() && value.get<long long>() < 0))
                    throw ConfigError(field, "expected a non-negative integer");
        } else {
            if (!value.is_number()) throw ConfigError(field, "expected a number");
        }
        return value.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(field, e.what());
    }
}

template <typename T>
T optional_field(const json& obj, const std::string& path, const std::string& key, T fallback) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return as<T>(*it, join(path, key));
}

// Runs `fn`, turning domain errors from the module constructors into config errors at `field`.
template <typename Fn>
auto checked(const std::string& field, Fn&& fn) {
    try {
        return fn();
    } catch (const DomainError& e) {
        throw ConfigError(field, e.what());
    } catch (const ShapeError& e) {
        throw ConfigError(field, e.what());
    }
}

Point parse_point(const json& value, const std::string& field) {
    if (!value.is_array() || value.empty()) throw ConfigError(field, "expected a non-empty array");
    Point p(static_cast<Eigen::Index>(value.size()));
    for (std::size_t d = 0; d < value.size(); ++d)
        p[static_cast<Eigen::Index>(d)] = as<double>(value[d], field + "[" + std::to_string(d) + "]");
    return p;
}

}  // namespace

GaussianMixtureOracle ExperimentConfig::make_oracle() const {
    if (oracle.preset == "gmm8") return GaussianMixtureOracle::gmm8(schedule);
    if (oracle.preset == "standard-gaussian")
        return GaussianMixtureOracle::standard_gaussian(schedule, oracle.dim);
    return GaussianMixtureOracle(schedule, oracle.components);
}

Trajectory ExperimentConfig::make_trajectory() const {
    return timetuner::make_trajectory(trajectory.kind, trajectory.steps, schedule, trajectory.t_min);
}

void ExperimentConfig::set_seed(std::uint64_t s) {
    seed = s;
    sampler.seed = s;
    tuner.seed = s;
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("<root>", "expected an object");
    ExperimentConfig cfg;

    if (auto it = doc.find("schedule"); it != doc.end()) {
        const json& s = *it;
        const auto kind = optional_field<std::string>(s, "schedule", "kind", "linear-vp");
        checked("schedule.kind", [&] { return schedule_kind_from_string(kind); });
        const double beta_min = optional_field<double>(s, "schedule", "beta_min", 0.1);
        const double beta_max = optional_field<double>(s, "schedule", "beta_max", 20.0);
        const double horizon = optional_field<double>(s, "schedule", "T", 1000.0);
        cfg.schedule = checked("schedule", [&] { return NoiseSchedule(beta_min, beta_max, horizon); });
    }

    const json& o = require(doc, "", "oracle");
    if (o.is_object() && o.contains("preset")) {
        cfg.oracle.preset = as<std::string>(o.at("preset"), "oracle.preset");
        if (cfg.oracle.preset != "gmm8" && cfg.oracle.preset != "standard-gaussian")
            throw ConfigError("oracle.preset", "unknown preset '" + cfg.oracle.preset + "'");
        cfg.oracle.dim = optional_field<int>(o, "oracle", "dim", 2);
        if (cfg.oracle.dim < 1) throw ConfigError("oracle.dim", "must be positive");
    } else {
        const json& comps = require(o, "oracle", "components");
        if (!comps.is_array() || comps.empty())
            throw ConfigError("oracle.components", "expected a non-empty array");
        for (std::size_t k = 0; k < comps.size(); ++k) {
            const std::string p = "oracle.components[" + std::to_string(k) + "]";
            cfg.oracle.components.push_back({as<double>(require(comps[k], p, "weight"), p + ".weight"),
                                             parse_point(require(comps[k], p, "mean"), p + ".mean"),
                                             as<double>(require(comps[k], p, "scale"), p + ".scale")});
        }
    }
    checked("oracle", [&] { return cfg.make_oracle(); });

    const json& t = require(doc, "", "trajectory");
    cfg.trajectory.kind = checked("trajectory.kind", [&] {
        return trajectory_kind_from_string(as<std::string>(require(t, "trajectory", "kind"), "trajectory.kind"));
    });
    cfg.trajectory.steps = as<int>(require(t, "trajectory", "K"), "trajectory.K");
    cfg.trajectory.t_min = optional_field<double>(t, "trajectory", "t_min", 0.0);
    checked("trajectory", [&] { return cfg.make_trajectory(); });

    const json& s = require(doc, "", "sampler");
    cfg.sampler.kind = checked("sampler.kind", [&] {
        return sampler_kind_from_string(as<std::string>(require(s, "sampler", "kind"), "sampler.kind"));
    });
    cfg.sampler.eta = optional_field<double>(s, "sampler", "eta", 0.0);
    if (!(cfg.sampler.eta >= 0.0 && cfg.sampler.eta <= 1.0))
        throw ConfigError("sampler.eta", "must lie in [0, 1]");
    if (cfg.sampler.kind == SamplerKind::DpmSolver2 && cfg.trajectory.t_min < t_eps(cfg.schedule))
        throw ConfigError("trajectory.t_min", fmt::format("dpm-solver-2 needs t_min >= t_eps = {}",
                                                          t_eps(cfg.schedule)));

    if (auto it = doc.find("tuner"); it != doc.end()) {
        const json& u = *it;
        cfg.tuner.strategy = checked("tuner.strategy", [&] {
            return strategy_from_string(optional_field<std::string>(u, "tuner", "strategy", "sequential"));
        });
        cfg.tuner.batch = optional_field<int>(u, "tuner", "batch", 4096);
        cfg.tuner.search.grid_points = optional_field<int>(u, "tuner", "grid_points", 33);
        cfg.tuner.search.tolerance = optional_field<double>(u, "tuner", "tolerance", 1e-2);
        cfg.tuner.search.max_iterations = optional_field<int>(u, "tuner", "max_iterations", 200);
        cfg.tuner.bounds = checked("tuner.bounds", [&] {
            return bounds_mode_from_string(optional_field<std::string>(u, "tuner", "bounds", "interval"));
        });
        if (cfg.tuner.batch < 1) throw ConfigError("tuner.batch", "must be at least 1");
        if (cfg.tuner.search.grid_points < 2) throw ConfigError("tuner.grid_points", "must be at least 2");
        if (!(cfg.tuner.search.tolerance > 0.0)) throw ConfigError("tuner.tolerance", "must be positive");
    }

    if (auto it = doc.find("analysis"); it != doc.end()) {
        const json& a = *it;
        cfg.analysis.n_paths = optional_field<int>(a, "analysis", "n_paths", 4096);
        cfg.analysis.dense_steps = optional_field<int>(a, "analysis", "dense_K", 1000);
        cfg.analysis.n_samples = optional_field<std::size_t>(a, "analysis", "n_samples", 50000);
        cfg.analysis.n_projections = optional_field<int>(a, "analysis", "n_projections", 128);
        if (cfg.analysis.n_paths < 1) throw ConfigError("analysis.n_paths", "must be at least 1");
        if (cfg.analysis.dense_steps < 1) throw ConfigError("analysis.dense_K", "must be at least 1");
        if (cfg.analysis.n_projections < 1)
            throw ConfigError("analysis.n_projections", "must be at least 1");
    }

    cfg.set_seed(optional_field<std::uint64_t>(doc, "", "seed", 0));
    cfg.output_dir = optional_field<std::string>(doc, "", "output_dir", "out");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open config '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
    json oracle;
    if (!cfg.oracle.preset.empty()) {
        oracle["preset"] = cfg.oracle.preset;
        if (cfg.oracle.preset == "standard-gaussian") oracle["dim"] = cfg.oracle.dim;
    } else {
        json comps = json::array();
        for (const auto& c : cfg.oracle.components)
            comps.push_back({{"weight", c.weight},
                             {"mean", std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size())},
                             {"scale", c.scale}});
        oracle["components"] = comps;
    }
    return {
        {"schedule",
         {{"kind", to_string(cfg.schedule.kind())},
          {"beta_min", cfg.schedule.beta_min()},
          {"beta_max", cfg.schedule.beta_max()},
          {"T", cfg.schedule.horizon()}}},
        {"oracle", oracle},
        {"trajectory",
         {{"kind", to_string(cfg.trajectory.kind)}, {"K", cfg.trajectory.steps}, {"t_min", cfg.trajectory.t_min}}},
        {"sampler", {{"kind", to_string(cfg.sampler.kind)}, {"eta", cfg.sampler.eta}}},
        {"tuner",
         {{"strategy", to_string(cfg.tuner.strategy)},
          {"batch", cfg.tuner.batch},
          {"grid_points", cfg.tuner.search.grid_points},
          {"tolerance", cfg.tuner.search.tolerance},
          {"max_iterations", cfg.tuner.search.max_iterations},
          {"bounds", to_string(cfg.tuner.bounds)}}},
        {"analysis",
         {{"n_paths", cfg.analysis.n_paths},
          {"dense_K", cfg.analysis.dense_steps},
          {"n_samples", cfg.analysis.n_samples},
          {"n_projections", cfg.analysis.n_projections}}},
        {"seed", cfg.seed},
        {"output_dir", cfg.output_dir},
    };
}

}  // namespace timetuner

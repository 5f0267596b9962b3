// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "timetuner/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "timetuner/errors.hpp"

namespace timetuner {

std::string to_string(TrajectoryKind kind) {
    switch (kind) {
        case TrajectoryKind::Uniform: return "uniform";
        case TrajectoryKind::Quadratic: return "quadratic";
        case TrajectoryKind::LogSnr: return "log-snr";
    }
    return "?";
}

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
    if (name == "uniform") return TrajectoryKind::Uniform;
    if (name == "quadratic") return TrajectoryKind::Quadratic;
    if (name == "log-snr") return TrajectoryKind::LogSnr;
    throw DomainError("unknown trajectory kind '" + name + "'");
}

std::string to_string(SamplerKind kind) {
    return kind == SamplerKind::DdimFamily ? "ddim" : "dpm-solver-2";
}

SamplerKind sampler_kind_from_string(const std::string& name) {
    if (name == "ddim" || name == "ddim-family") return SamplerKind::DdimFamily;
    if (name == "dpm-solver-2") return SamplerKind::DpmSolver2;
    throw DomainError("unknown sampler kind '" + name + "'");
}

int evaluations_per_step(SamplerKind kind) { return kind == SamplerKind::DpmSolver2 ? 2 : 1; }

Trajectory make_trajectory(TrajectoryKind kind, int steps, const NoiseSchedule& schedule,
                           double t_min) {
    const double horizon = schedule.horizon();
    if (steps < 1) throw DomainError("trajectory needs K >= 1");
    if (!(t_min >= 0.0) || !(t_min < horizon)) throw DomainError("trajectory needs 0 <= t_min < T");

    Trajectory traj;
    traj.kind = kind;
    traj.points.resize(static_cast<std::size_t>(steps) + 1);
    const double span = horizon - t_min;
    switch (kind) {
        case TrajectoryKind::Uniform:
            for (int i = 0; i <= steps; ++i)
                traj.points[i] = t_min + span * static_cast<double>(i) / steps;
            break;
        case TrajectoryKind::Quadratic:
            for (int i = 0; i <= steps; ++i) {
                const double r = static_cast<double>(i) / steps;
                traj.points[i] = t_min + span * r * r;
            }
            break;
        case TrajectoryKind::LogSnr: {
            const double anchor = std::max(t_min, t_eps(schedule));
            const double lambda_lo = schedule.log_snr(anchor);
            const double lambda_hi = schedule.log_snr(horizon);
            for (int i = 1; i < steps; ++i) {
                const double r = static_cast<double>(i) / steps;
                const double lambda = lambda_lo + (lambda_hi - lambda_lo) * r;
                traj.points[i] = schedule.t_from_log_snr(lambda, anchor, 1e-12 * horizon);
            }
            break;
        }
    }
    traj.points.front() = t_min;
    traj.points.back() = horizon;
    for (int i = 1; i <= steps; ++i)
        if (!(traj.points[i] > traj.points[i - 1]))
            throw DomainError("trajectory is not strictly increasing (K too large for t_min?)");
    return traj;
}

double TunedTrajectory::tau(int step, int eval) const {
    return taus.at(static_cast<std::size_t>((step - 1) * evals_per_step() + eval));
}

double& TunedTrajectory::tau(int step, int eval) {
    return taus.at(static_cast<std::size_t>((step - 1) * evals_per_step() + eval));
}

void TunedTrajectory::validate() const {
    const std::size_t expected = static_cast<std::size_t>(steps()) * evals_per_step();
    if (base.points.size() < 2) throw ContractError("tuned trajectory has no steps");
    if (taus.size() != expected)
        throw ContractError("tuned trajectory has " + std::to_string(taus.size()) +
                            " taus, sampler " + to_string(sampler) + " with K = " +
                            std::to_string(steps()) + " needs " + std::to_string(expected));
    if (!bounds.empty() && bounds.size() != taus.size())
        throw ContractError("tuned trajectory bounds/taus length mismatch");
    for (std::size_t j = 0; j < taus.size(); ++j) {
        if (!std::isfinite(taus[j])) throw ContractError("non-finite tau");
        if (!bounds.empty() && (taus[j] < bounds[j].lo || taus[j] > bounds[j].hi))
            throw ContractError("tau " + std::to_string(j) + " outside its search interval");
    }
}

TunedTrajectory baseline_tuned(const Trajectory& traj, SamplerKind sampler,
                               const NoiseSchedule& schedule) {
    TunedTrajectory tuned;
    tuned.base = traj;
    tuned.sampler = sampler;
    if (sampler == SamplerKind::DpmSolver2 && traj[0] < t_eps(schedule))
        throw DomainError("dpm-solver-2 needs t_0 >= t_eps; set a positive t_min");
    for (int i = 1; i <= traj.steps(); ++i) {
        tuned.taus.push_back(traj[i]);
        if (sampler == SamplerKind::DpmSolver2) {
            const double h = schedule.log_snr(traj[i - 1]) - schedule.log_snr(traj[i]);
            const double lambda_mid = schedule.log_snr(traj[i]) + 0.5 * h;
            tuned.taus.push_back(
                schedule.t_from_log_snr(lambda_mid, traj[i - 1], 1e-12 * schedule.horizon()));
        }
    }
    for (double tau : tuned.taus) tuned.bounds.push_back({tau, tau});
    return tuned;
}

TunedTrajectory replace_first_steps(const TunedTrajectory& tuned, const TunedTrajectory& baseline,
                                    int replaced) {
    if (tuned.taus.size() != baseline.taus.size() || tuned.steps() != baseline.steps())
        throw ContractError("replace_first_steps: trajectories differ in shape");
    if (replaced < 0 || replaced > tuned.steps())
        throw DomainError("replacement count outside [0, K]");
    TunedTrajectory out = baseline;
    out.bounds = tuned.bounds;
    const int e = tuned.evals_per_step();
    for (int step = tuned.steps(); step > tuned.steps() - replaced; --step)
        for (int k = 0; k < e; ++k) out.tau(step, k) = tuned.tau(step, k);
    return out;
}

nlohmann::json to_json(const TunedTrajectory& tuned) {
    nlohmann::json steps = nlohmann::json::array();
    const int e = tuned.evals_per_step();
    for (int i = 1; i <= tuned.steps(); ++i) {
        nlohmann::json taus = nlohmann::json::array();
        nlohmann::json bounds = nlohmann::json::array();
        for (int k = 0; k < e; ++k) {
            taus.push_back(tuned.tau(i, k));
            if (!tuned.bounds.empty()) {
                const auto& b = tuned.bounds[static_cast<std::size_t>((i - 1) * e + k)];
                bounds.push_back({b.lo, b.hi});
            }
        }
        steps.push_back({{"i", i}, {"t", tuned.base[i]}, {"tau", taus}, {"bounds", bounds}});
    }
    return {{"sampler", to_string(tuned.sampler)},
            {"trajectory", {{"kind", to_string(tuned.base.kind)}, {"points", tuned.base.points}}},
            {"steps", steps}};
}

TunedTrajectory tuned_from_json(const nlohmann::json& doc) {
    TunedTrajectory tuned;
    try {
        tuned.sampler = sampler_kind_from_string(doc.at("sampler").get<std::string>());
        tuned.base.kind = trajectory_kind_from_string(doc.at("trajectory").at("kind").get<std::string>());
        tuned.base.points = doc.at("trajectory").at("points").get<std::vector<double>>();
        const auto& steps = doc.at("steps");
        if (steps.size() + 1 != tuned.base.points.size())
            throw ContractError("tuned document: step count does not match trajectory");
        for (std::size_t s = 0; s < steps.size(); ++s) {
            const auto& row = steps[s];
            if (row.at("i").get<int>() != static_cast<int>(s) + 1)
                throw ContractError("tuned document: steps must be listed in order i = 1..K");
            for (const auto& tau : row.at("tau")) tuned.taus.push_back(tau.get<double>());
            for (const auto& b : row.at("bounds"))
                tuned.bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("malformed tuned trajectory document: ") + e.what());
    }
    tuned.validate();
    return tuned;
}

}  // namespace timetuner

// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "timetuner/schedule.hpp"

namespace timetuner {

enum class TrajectoryKind { Uniform, Quadratic, LogSnr };

std::string to_string(TrajectoryKind kind);
TrajectoryKind trajectory_kind_from_string(const std::string& name);

// Which reverse solver a set of conditioning times belongs to. Lives here because
// the number of taus per step is a property of the tuned trajectory.
enum class SamplerKind { DdimFamily, DpmSolver2 };

std::string to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(const std::string& name);

/// Network evaluations per step: 1 for the eta-family, 2 for DPM-Solver-2.
int evaluations_per_step(SamplerKind kind);

/// Lower anchor of the log-SNR grid and the replacement conditioning time for t = 0.
inline double t_eps(const NoiseSchedule& schedule) { return 1e-3 * schedule.horizon(); }

/// Discretization t_0 < t_1 < ... < t_K = T.
struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::Uniform;
    std::vector<double> points;

    int steps() const { return static_cast<int>(points.size()) - 1; }
    double operator[](int i) const { return points[static_cast<std::size_t>(i)]; }
};

Trajectory make_trajectory(TrajectoryKind kind, int steps, const NoiseSchedule& schedule,
                           double t_min = 0.0);

struct TauBounds {
    double lo;
    double hi;
};

/// A trajectory plus the conditioning times fed to the model. Step i (1..K, going
/// from t_i to t_{i-1}) owns taus[(i-1)*e .. (i-1)*e + e - 1] with e evaluations per step.
struct TunedTrajectory {
    Trajectory base;
    SamplerKind sampler = SamplerKind::DdimFamily;
    std::vector<double> taus;
    std::vector<TauBounds> bounds;

    int steps() const { return base.steps(); }
    int evals_per_step() const { return evaluations_per_step(sampler); }
    double tau(int step, int eval = 0) const;
    double& tau(int step, int eval = 0);

    /// Throws ContractError on a tau count mismatch or a tau outside its bounds.
    void validate() const;
};

/// Untuned conditioning times: tau = t_i for the eta-family, (t_i, midpoint) for
/// DPM-Solver-2. Bounds are left as the degenerate [tau, tau].
TunedTrajectory baseline_tuned(const Trajectory& traj, SamplerKind sampler,
                               const NoiseSchedule& schedule);

/// Tuned taus on the first `replaced` steps counted from t_K downwards, baseline elsewhere.
TunedTrajectory replace_first_steps(const TunedTrajectory& tuned, const TunedTrajectory& baseline,
                                    int replaced);

nlohmann::json to_json(const TunedTrajectory& tuned);
TunedTrajectory tuned_from_json(const nlohmann::json& doc);

}  // namespace timetuner

// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "timetuner/oracle.hpp"
#include "timetuner/schedule.hpp"
#include "timetuner/trajectory.hpp"

namespace timetuner {

struct SamplerConfig {
    SamplerKind kind = SamplerKind::DdimFamily;
    double eta = 0.0;  // ignored by dpm-solver-2
    std::uint64_t seed = 0;

    bool stochastic() const { return kind == SamplerKind::DdimFamily && eta > 0.0; }
};

/// States x~_{t_K}, ..., x~_{t_0} of one reverse rollout.
struct SamplePath {
    std::vector<Point> states;  // states[0] is x~_T
    std::vector<double> times;  // times[j] is the time of states[j]
    std::uint64_t path_id = 0;

    int steps() const { return static_cast<int>(states.size()) - 1; }
    const Point& initial() const { return states.front(); }
    const Point& final_state() const { return states.back(); }
    /// State at trajectory index i (t_i).
    const Point& at(int i) const { return states[static_cast<std::size_t>(steps() - i)]; }
};

/// DDIM step conditioned on the trajectory time, written out as
/// x' = (a_to / a_from) x - (a_to s_from / a_from - s_to) eps(x, t_from).
Point ddim_baseline_step(const NoiseSchedule& schedule, const EpsilonModel& model, const Point& x,
                         double t_from, double t_to);

/// Output-noise scale of the eta-interpolated step:
/// eta * (s_to / s_from) * sqrt(1 - a_from^2 / a_to^2).
double ddim_noise_scale(const NoiseSchedule& schedule, double t_from, double t_to, double eta);

/// Eta-family step with conditioning time `tau`. With eta = 0 it is the baseline
/// formula with eps(x, tau); with eta > 0 the eps coefficient uses
/// sqrt(s_to^2 - s~^2) and s~ * noise is added. `noise` is required iff eta > 0.
Point ddim_step(const NoiseSchedule& schedule, const EpsilonModel& model, const Point& x,
                double t_from, double t_to, double tau, double eta,
                const std::optional<Point>& noise = std::nullopt);

/// Log-SNR midpoint of [t_to, t_from].
double dpm_solver2_midpoint(const NoiseSchedule& schedule, double t_from, double t_to);

/// Second-order DPM-Solver step; taus replace only the conditioning arguments.
Point dpm_solver2_step(const NoiseSchedule& schedule, const EpsilonModel& model, const Point& x,
                       double t_from, double t_to, double tau_a, double tau_b);

/// Step i (t_i -> t_{i-1}) of `tuned` under `sampler`. `noise` per ddim_step.
Point apply_step(const NoiseSchedule& schedule, const EpsilonModel& model,
                 const SamplerConfig& sampler, const TunedTrajectory& tuned, int step,
                 const Point& x, const std::optional<Point>& noise = std::nullopt);

/// Full rollout from x_T. Stochastic samplers draw step noise from an engine
/// derived from (sampler.seed, path_id).
SamplePath sample_path(const NoiseSchedule& schedule, const EpsilonModel& model,
                       const Point& x_T, const TunedTrajectory& tuned,
                       const SamplerConfig& sampler, std::uint64_t path_id = 0);

/// Final states only; path j uses path_id = j.
std::vector<Point> sample_finals(const NoiseSchedule& schedule, const EpsilonModel& model,
                                 const std::vector<Point>& initial, const TunedTrajectory& tuned,
                                 const SamplerConfig& sampler, int workers = 1);

std::vector<SamplePath> sample_paths(const NoiseSchedule& schedule, const EpsilonModel& model,
                                     const std::vector<Point>& initial,
                                     const TunedTrajectory& tuned, const SamplerConfig& sampler,
                                     int workers = 1);

/// n draws of x~_T ~ N(0, I), point j from its own engine.
std::vector<Point> initial_noise(std::size_t n, int dim, std::uint64_t seed);

}  // namespace timetuner

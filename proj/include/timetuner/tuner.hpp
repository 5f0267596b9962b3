// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "timetuner/oracle.hpp"
#include "timetuner/samplers.hpp"
#include "timetuner/trajectory.hpp"

namespace timetuner {

enum class Strategy { Sequential, Parallel };
enum class BoundsMode { Interval, Wide };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);
std::string to_string(BoundsMode m);
BoundsMode bounds_mode_from_string(const std::string& name);

struct SearchConfig {
    int grid_points = 33;
    double tolerance = 1e-2;  // t-units
    int max_iterations = 200;
};

struct TunerConfig {
    Strategy strategy = Strategy::Sequential;
    int batch = 4096;
    SearchConfig search;
    BoundsMode bounds = BoundsMode::Interval;
    std::uint64_t seed = 0;
    int workers = 1;
};

struct LossEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int batch = 0;
};

/// Everything a loss needs besides the taus. The oracle acts both as q_0 sampler
/// and as eps_theta. Holds references; keep the referents alive.
struct TuningProblem {
    const NoiseSchedule& schedule;
    const GaussianMixtureOracle& oracle;
    const Trajectory& trajectory;
    SamplerConfig sampler;
};

/// Monte Carlo estimate of the noise-consistency loss of one step with the
/// (x_0, eps) batch frozen at construction (common random numbers).
///
/// Sample j of step i uses an engine derived from (seed, Tuning, i, j) and draws,
/// in order, x_0, eps, and then one noise vector per stochastic step it applies.
/// The input state is the rollout of x~_T = a_T x_0 + s_T eps through the tuned
/// prefix (sequential) or the exact forward sample a_{t_i} x_0 + s_{t_i} eps
/// (parallel). The target is eps(x~_{t_i}, t_i), the output is conditioned at
/// max(t_{i-1}, t_eps).
class StepLoss {
public:
    static StepLoss sequential(const TuningProblem& problem, int step,
                               const TunedTrajectory& prefix, int batch, std::uint64_t seed,
                               int workers = 1);
    static StepLoss parallel(const TuningProblem& problem, int step, int batch,
                             std::uint64_t seed, int workers = 1);

    /// E || eps(f_tau(x~), t') - eps(x~, t_i) ||^2. `taus` has one entry per evaluation.
    LossEstimate operator()(std::span<const double> taus) const;
    LossEstimate operator()(double tau) const { return (*this)(std::span<const double>(&tau, 1)); }

    /// Same output term against the true noise (x~ - a_{t_i} x_0) / s_{t_i}.
    LossEstimate dpm_style(std::span<const double> taus) const;
    LossEstimate dpm_style(double tau) const { return dpm_style(std::span<const double>(&tau, 1)); }

    int step() const { return step_; }
    double conditioning_time() const { return t_cond_; }
    const std::vector<Point>& states() const { return states_; }

private:
    StepLoss(const TuningProblem& problem, int step, int batch, int workers);
    LossEstimate evaluate(std::span<const double> taus, const std::vector<Point>& targets) const;

    const NoiseSchedule* schedule_;
    const GaussianMixtureOracle* oracle_;
    SamplerConfig sampler_;
    double t_from_;
    double t_to_;
    double t_cond_;
    int step_;
    int workers_;
    std::vector<Point> states_;
    std::vector<Point> base_eps_;
    std::vector<Point> true_noise_;
    std::vector<std::optional<Point>> step_noise_;
};

LossEstimate loss_sequential(const TuningProblem& problem, int step, double tau,
                             const TunedTrajectory& prefix, int batch, std::uint64_t seed,
                             int workers = 1);
LossEstimate loss_parallel(const TuningProblem& problem, int step, double tau, int batch,
                           std::uint64_t seed, int workers = 1);

struct SearchResult {
    double tau = 0.0;
    double loss = 0.0;
    bool at_boundary = false;
    int evaluations = 0;
};

/// Coarse grid scan over [lo, hi] (plus `extra` candidates) followed by
/// golden-section refinement inside the cell pair around the best grid point.
/// Returns the best point seen; throws NumericError on a non-finite loss.
SearchResult optimize_tau(const std::function<double(double)>& loss, TauBounds bounds,
                          const SearchConfig& search, std::span<const double> extra = {});

/// Search interval of evaluation `eval` of step i.
TauBounds tau_bounds(const NoiseSchedule& schedule, const Trajectory& traj, int step,
                     BoundsMode mode);

struct StepRecord {
    int step = 0;
    int eval = 0;
    double t = 0.0;
    double tau = 0.0;
    double loss_baseline = 0.0;
    double loss_tuned = 0.0;
    double std_error = 0.0;
    bool at_boundary = false;
};

struct TuneResult {
    TunedTrajectory tuned;
    std::vector<StepRecord> records;  // ordered by step K..1, then evaluation
};

TuneResult tune(const TunerConfig& config, const TuningProblem& problem);

/// CSV: i,t_i,tau_i,loss_baseline,loss_tuned,stderr,boundary_flag
std::string step_records_csv(const std::vector<StepRecord>& records);

}  // namespace timetuner

// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "timetuner/samplers.hpp"
#include "timetuner/tuner.hpp"

namespace timetuner {

/// Untuned DDIM (eta = 0) over a uniform `dense_steps`-point trajectory on [0, T].
SamplePath reference_path(const NoiseSchedule& schedule, const EpsilonModel& model,
                          const Point& x_T, int dense_steps = 1000);

std::vector<SamplePath> reference_paths(const NoiseSchedule& schedule, const EpsilonModel& model,
                                        const std::vector<Point>& initial, int dense_steps = 1000,
                                        int workers = 1);

struct GapCheckpoint {
    int step_index = 0;
    double t = 0.0;
    double mean_gap = 0.0;
    double std_error = 0.0;
    int n_paths = 0;
};

struct GapReport {
    std::vector<GapCheckpoint> checkpoints;  // step_index K..0
    std::string sampler;
    std::string trajectory;
    bool tuned = false;
};

/// Mean || x~_{t_i} - x^gt_{t_i} || over paths at every coarse checkpoint. The
/// reference state is taken from the nearest dense time. Throws ContractError when
/// a coarse path and its reference do not start from the same x~_T.
GapReport gap_profile(const std::vector<SamplePath>& coarse,
                      const std::vector<SamplePath>& reference);

/// CSV: step_index,t,mean_gap,stderr,n_paths
std::string gap_report_csv(const GapReport& report);

/// Squared Frechet distance between Gaussians fitted to the two sample sets.
double frechet_distance(const std::vector<Point>& a, const std::vector<Point>& b);

/// Mean over random unit directions of the 1-D 2-Wasserstein distance.
double sliced_wasserstein(const std::vector<Point>& a, const std::vector<Point>& b,
                          int n_projections = 128, std::uint64_t seed = 0);

struct EvalReport {
    double frechet = 0.0;
    double sliced_wasserstein = 0.0;
    double mean_delta = 0.0;  // || m_a - m_b ||
    double cov_delta = 0.0;   // Frobenius norm of C_a - C_b
    std::size_t n_samples = 0;
    std::size_t n_reference = 0;
    std::uint64_t seed = 0;
};

EvalReport evaluate_samples(const std::vector<Point>& samples,
                            const std::vector<Point>& reference, int n_projections = 128,
                            std::uint64_t seed = 0);

nlohmann::json to_json(const EvalReport& report);

struct SweepRow {
    int replaced = 0;
    EvalReport report;
};

/// For m = 0..K, replace the conditioning times of the first m steps (from t_K
/// down) with the tuned ones and evaluate n_samples finals against n_samples fresh
/// data points. Initial states and reference data are shared across m.
std::vector<SweepRow> step_replacement_sweep(const TuningProblem& problem,
                                             const TunedTrajectory& tuned, std::size_t n_samples,
                                             std::uint64_t seed, int workers = 1,
                                             int n_projections = 128);

/// CSV: m,fd,swd
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct ErrorBoundRow {
    int step = 0;          // i; the bound concerns t_{i-1}
    double t = 0.0;        // t_{i-1}
    double lhs = 0.0;      // E || x~_{t_{i-1}} - x^gt_{t_{i-1}} ||
    double lhs_se = 0.0;
    double loss_sum = 0.0;        // sum_{n=i}^K sqrt(L_n)
    double loss_sum_se = 0.0;
    double continuity_sum = 0.0;  // sum_{l=i}^K E || eps(x^gt_l, t_l) - eps(x^gt_{l-1}, t_{l-1}) ||
    double continuity_se = 0.0;
    std::optional<double> rhs;    // C * (loss_sum + continuity_sum) when C is known
    std::optional<bool> holds;    // lhs - 3 se <= rhs + 3 C se
};

struct ErrorBoundReport {
    std::optional<double> constant;  // C, known only for single-component oracles
    std::vector<ErrorBoundRow> rows;   // step K..1
};

/// Both sides of the accumulated-error bound along dense reference paths started
/// from x~_T = a_T x_0 + s_T eps. Deterministic samplers only.
ErrorBoundReport error_bound_report(const TuningProblem& problem, const TunedTrajectory& tuned,
                               int n_paths, std::uint64_t seed, int dense_steps = 1000,
                               int workers = 1);

struct ArgminComparison {
    int step = 0;
    std::vector<double> grid;
    std::vector<double> noise_consistency;  // against eps(x~, t_i)
    std::vector<double> dpm_style;          // against the true noise
    int argmin_consistency = 0;
    int argmin_dpm = 0;
};

/// Both loss curves of step i over an n-point grid on the interval bounds, from one
/// frozen batch rolled through `prefix`.
ArgminComparison loss_argmin_comparison(const TuningProblem& problem, int step,
                                        const TunedTrajectory& prefix, int grid_points,
                                        int batch, std::uint64_t seed, int workers = 1);

}  // namespace timetuner

// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "timetuner/samplers.hpp"

#include <cmath>
#include <string>

#include "timetuner/errors.hpp"
#include "timetuner/parallel.hpp"

namespace timetuner {

namespace {

void check_interval(double t_from, double t_to) {
    if (!(t_to < t_from)) throw DomainError("reverse step needs t_to < t_from");
}

void check_tau(const NoiseSchedule& schedule, double tau) {
    if (!(tau > 0.0 && tau <= schedule.horizon()))
        throw DomainError("conditioning time " + std::to_string(tau) + " outside (0, T]");
}

}  // namespace

Point ddim_baseline_step(const NoiseSchedule& schedule, const EpsilonModel& model, const Point& x,
                         double t_from, double t_to) {
    check_interval(t_from, t_to);
    const auto [a_from, s_from] = schedule.alpha_sigma(t_from);
    const auto [a_to, s_to] = schedule.alpha_sigma(t_to);
    const Point eps = model.epsilon(x, t_from);
    return (a_to / a_from) * x - (a_to * s_from / a_from - s_to) * eps;
}

double ddim_noise_scale(const NoiseSchedule& schedule, double t_from, double t_to, double eta) {
    if (eta == 0.0) return 0.0;
    const auto [a_from, s_from] = schedule.alpha_sigma(t_from);
    const auto [a_to, s_to] = schedule.alpha_sigma(t_to);
    const double ratio = (a_from * a_from) / (a_to * a_to);
    return eta * (s_to / s_from) * std::sqrt(std::max(0.0, 1.0 - ratio));
}

Point ddim_step(const NoiseSchedule& schedule, const EpsilonModel& model, const Point& x,
                double t_from, double t_to, double tau, double eta,
                const std::optional<Point>& noise) {
    check_interval(t_from, t_to);
    check_tau(schedule, tau);
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0, 1]");
    if ((eta > 0.0) != noise.has_value())
        throw ContractError("ddim_step: noise must be supplied exactly when eta > 0");

    const auto [a_from, s_from] = schedule.alpha_sigma(t_from);
    const auto [a_to, s_to] = schedule.alpha_sigma(t_to);
    const Point eps = model.epsilon(x, tau);
    if (eta == 0.0) return (a_to / a_from) * x - (a_to * s_from / a_from - s_to) * eps;

    if (noise->size() != x.size()) throw ShapeError("ddim_step: noise dimension mismatch");
    const double s_noise = ddim_noise_scale(schedule, t_from, t_to, eta);
    const double s_dir = std::sqrt(std::max(0.0, s_to * s_to - s_noise * s_noise));
    return (a_to / a_from) * x - (a_to * s_from / a_from - s_dir) * eps + s_noise * *noise;
}

double dpm_solver2_midpoint(const NoiseSchedule& schedule, double t_from, double t_to) {
    check_interval(t_from, t_to);
    if (t_to < t_eps(schedule))
        throw DomainError("dpm-solver-2 cannot step below t_eps (log-SNR diverges at t = 0)");
    const double lambda_from = schedule.log_snr(t_from);
    const double h = schedule.log_snr(t_to) - lambda_from;
    return schedule.t_from_log_snr(lambda_from + 0.5 * h, t_to, 1e-12 * schedule.horizon());
}

Point dpm_solver2_step(const NoiseSchedule& schedule, const EpsilonModel& model, const Point& x,
                       double t_from, double t_to, double tau_a, double tau_b) {
    check_tau(schedule, tau_a);
    check_tau(schedule, tau_b);
    const double s = dpm_solver2_midpoint(schedule, t_from, t_to);
    const double h = schedule.log_snr(t_to) - schedule.log_snr(t_from);
    const double a_from = schedule.alpha_sigma(t_from).alpha;
    const auto [a_mid, s_mid] = schedule.alpha_sigma(s);
    const auto [a_to, s_to] = schedule.alpha_sigma(t_to);
    const Point u = (a_mid / a_from) * x - (s_mid * std::expm1(0.5 * h)) * model.epsilon(x, tau_a);
    return (a_to / a_from) * x - (s_to * std::expm1(h)) * model.epsilon(u, tau_b);
}

Point apply_step(const NoiseSchedule& schedule, const EpsilonModel& model,
                 const SamplerConfig& sampler, const TunedTrajectory& tuned, int step,
                 const Point& x, const std::optional<Point>& noise) {
    const double t_from = tuned.base[step];
    const double t_to = tuned.base[step - 1];
    if (sampler.kind == SamplerKind::DpmSolver2)
        return dpm_solver2_step(schedule, model, x, t_from, t_to, tuned.tau(step, 0),
                                tuned.tau(step, 1));
    return ddim_step(schedule, model, x, t_from, t_to, tuned.tau(step), sampler.eta, noise);
}

namespace {

void check_consistent(const TunedTrajectory& tuned, const SamplerConfig& sampler) {
    if (tuned.sampler != sampler.kind)
        throw ContractError("tuned trajectory was built for sampler " + to_string(tuned.sampler) +
                            ", not " + to_string(sampler.kind));
    const std::size_t expected =
        static_cast<std::size_t>(tuned.steps()) * evaluations_per_step(sampler.kind);
    if (tuned.taus.size() != expected)
        throw ContractError("tau count " + std::to_string(tuned.taus.size()) +
                            " does not match sampler (expected " + std::to_string(expected) + ")");
}

template <typename Visit>
Point rollout(const NoiseSchedule& schedule, const EpsilonModel& model, const Point& x_T,
              const TunedTrajectory& tuned, const SamplerConfig& sampler, std::uint64_t path_id,
              Visit&& visit) {
    if (!x_T.allFinite()) throw DomainError("initial state is not finite");
    const bool stochastic = sampler.stochastic();
    std::optional<Engine> engine;
    if (stochastic)
        engine = make_engine(sampler.seed, {static_cast<std::uint64_t>(Stream::SamplerNoise), path_id});
    Point x = x_T;
    for (int step = tuned.steps(); step >= 1; --step) {
        std::optional<Point> noise;
        if (stochastic) noise = standard_normal(*engine, static_cast<int>(x.size()));
        x = apply_step(schedule, model, sampler, tuned, step, x, noise);
        visit(step - 1, x);
    }
    return x;
}

}  // namespace

SamplePath sample_path(const NoiseSchedule& schedule, const EpsilonModel& model,
                       const Point& x_T, const TunedTrajectory& tuned,
                       const SamplerConfig& sampler, std::uint64_t path_id) {
    check_consistent(tuned, sampler);
    SamplePath path;
    path.path_id = path_id;
    path.states.reserve(static_cast<std::size_t>(tuned.steps()) + 1);
    path.states.push_back(x_T);
    path.times.push_back(tuned.base[tuned.steps()]);
    rollout(schedule, model, x_T, tuned, sampler, path_id, [&](int index, const Point& x) {
        path.states.push_back(x);
        path.times.push_back(tuned.base[index]);
    });
    return path;
}

std::vector<Point> sample_finals(const NoiseSchedule& schedule, const EpsilonModel& model,
                                 const std::vector<Point>& initial, const TunedTrajectory& tuned,
                                 const SamplerConfig& sampler, int workers) {
    check_consistent(tuned, sampler);
    std::vector<Point> out(initial.size());
    parallel_for(initial.size(), workers, [&](std::size_t j) {
        out[j] = rollout(schedule, model, initial[j], tuned, sampler, j, [](int, const Point&) {});
    });
    return out;
}

std::vector<SamplePath> sample_paths(const NoiseSchedule& schedule, const EpsilonModel& model,
                                     const std::vector<Point>& initial,
                                     const TunedTrajectory& tuned, const SamplerConfig& sampler,
                                     int workers) {
    std::vector<SamplePath> out(initial.size());
    parallel_for(initial.size(), workers, [&](std::size_t j) {
        out[j] = sample_path(schedule, model, initial[j], tuned, sampler, j);
    });
    return out;
}

std::vector<Point> initial_noise(std::size_t n, int dim, std::uint64_t seed) {
    std::vector<Point> out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        Engine engine = make_engine(seed, {static_cast<std::uint64_t>(Stream::InitialState), j});
        out.push_back(standard_normal(engine, dim));
    }
    return out;
}

}  // namespace timetuner

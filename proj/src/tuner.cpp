// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "timetuner/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "timetuner/errors.hpp"
#include "timetuner/parallel.hpp"

namespace timetuner {

std::string to_string(Strategy s) { return s == Strategy::Sequential ? "sequential" : "parallel"; }

Strategy strategy_from_string(const std::string& name) {
    if (name == "sequential") return Strategy::Sequential;
    if (name == "parallel") return Strategy::Parallel;
    throw DomainError("unknown tuning strategy '" + name + "'");
}

std::string to_string(BoundsMode m) { return m == BoundsMode::Interval ? "interval" : "wide"; }

BoundsMode bounds_mode_from_string(const std::string& name) {
    if (name == "interval") return BoundsMode::Interval;
    if (name == "wide") return BoundsMode::Wide;
    throw DomainError("unknown bounds mode '" + name + "'");
}

StepLoss::StepLoss(const TuningProblem& problem, int step, int batch, int workers)
    : schedule_(&problem.schedule),
      oracle_(&problem.oracle),
      sampler_(problem.sampler),
      step_(step),
      workers_(workers) {
    const Trajectory& traj = problem.trajectory;
    if (step < 1 || step > traj.steps())
        throw DomainError("step index " + std::to_string(step) + " outside [1, K]");
    if (batch < 1) throw DomainError("loss batch must be at least 1");
    t_from_ = traj[step];
    t_to_ = traj[step - 1];
    t_cond_ = std::max(t_to_, t_eps(problem.schedule));
    const auto n = static_cast<std::size_t>(batch);
    states_.resize(n);
    base_eps_.resize(n);
    true_noise_.resize(n);
    step_noise_.resize(n);
}

namespace {

// prefix == nullptr selects exact forward samples at t_i.
void fill_batch(const TuningProblem& problem, int step, const TunedTrajectory* prefix,
                       std::uint64_t seed, int workers, std::vector<Point>& states,
                       std::vector<Point>& base_eps, std::vector<Point>& true_noise,
                       std::vector<std::optional<Point>>& step_noise) {
    const NoiseSchedule& schedule = problem.schedule;
    const GaussianMixtureOracle& oracle = problem.oracle;
    const Trajectory& traj = problem.trajectory;
    const int K = traj.steps();
    const bool stochastic = problem.sampler.stochastic();
    const auto [alpha_i, sigma_i] = schedule.alpha_sigma(traj[step]);
    parallel_for(states.size(), workers, [&](std::size_t j) {
        Engine engine = make_engine(
            seed, {static_cast<std::uint64_t>(Stream::Tuning), static_cast<std::uint64_t>(step), j});
        const Point x0 = oracle.sample_one(engine);
        const Point eps = standard_normal(engine, oracle.dim());
        Point x;
        if (prefix != nullptr) {
            x = schedule.forward_sample(x0, traj[K], eps);
            for (int s = K; s > step; --s) {
                std::optional<Point> noise;
                if (stochastic) noise = standard_normal(engine, oracle.dim());
                x = apply_step(schedule, oracle, problem.sampler, *prefix, s, x, noise);
            }
        } else {
            x = schedule.forward_sample(x0, traj[step], eps);
        }
        if (stochastic) step_noise[j] = standard_normal(engine, oracle.dim());
        base_eps[j] = oracle.epsilon(x, traj[step]);
        true_noise[j] = (x - alpha_i * x0) / sigma_i;
        states[j] = std::move(x);
    });
}

}  // namespace

StepLoss StepLoss::sequential(const TuningProblem& problem, int step,
                              const TunedTrajectory& prefix, int batch, std::uint64_t seed,
                              int workers) {
    StepLoss loss(problem, step, batch, workers);
    if (prefix.steps() != problem.trajectory.steps() || prefix.sampler != problem.sampler.kind)
        throw ContractError("tuned prefix does not match the tuning problem");
    prefix.validate();
    fill_batch(problem, step, &prefix, seed, workers, loss.states_, loss.base_eps_,
               loss.true_noise_, loss.step_noise_);
    return loss;
}

StepLoss StepLoss::parallel(const TuningProblem& problem, int step, int batch, std::uint64_t seed,
                            int workers) {
    StepLoss loss(problem, step, batch, workers);
    fill_batch(problem, step, nullptr, seed, workers, loss.states_, loss.base_eps_,
               loss.true_noise_, loss.step_noise_);
    return loss;
}

LossEstimate StepLoss::evaluate(std::span<const double> taus,
                                const std::vector<Point>& targets) const {
    const int evals = evaluations_per_step(sampler_.kind);
    if (static_cast<int>(taus.size()) != evals)
        throw ContractError("step loss needs " + std::to_string(evals) + " conditioning times");
    std::vector<double> terms(states_.size());
    parallel_for(states_.size(), workers_, [&](std::size_t j) {
        Point next;
        if (sampler_.kind == SamplerKind::DpmSolver2)
            next = dpm_solver2_step(*schedule_, *oracle_, states_[j], t_from_, t_to_, taus[0], taus[1]);
        else
            next = ddim_step(*schedule_, *oracle_, states_[j], t_from_, t_to_, taus[0], sampler_.eta,
                             step_noise_[j]);
        terms[j] = (oracle_->epsilon(next, t_cond_) - targets[j]).squaredNorm();
    });
    const double n = static_cast<double>(terms.size());
    double sum = 0.0;
    for (double v : terms) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : terms) ss += (v - mean) * (v - mean);
    const double var = terms.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n), static_cast<int>(terms.size())};
}

LossEstimate StepLoss::operator()(std::span<const double> taus) const {
    return evaluate(taus, base_eps_);
}

LossEstimate StepLoss::dpm_style(std::span<const double> taus) const {
    return evaluate(taus, true_noise_);
}

LossEstimate loss_sequential(const TuningProblem& problem, int step, double tau,
                             const TunedTrajectory& prefix, int batch, std::uint64_t seed,
                             int workers) {
    return StepLoss::sequential(problem, step, prefix, batch, seed, workers)(tau);
}

LossEstimate loss_parallel(const TuningProblem& problem, int step, double tau, int batch,
                           std::uint64_t seed, int workers) {
    return StepLoss::parallel(problem, step, batch, seed, workers)(tau);
}

SearchResult optimize_tau(const std::function<double(double)>& loss, TauBounds bounds,
                          const SearchConfig& search, std::span<const double> extra) {
    const double lo = bounds.lo;
    const double hi = bounds.hi;
    if (!(lo < hi)) throw DomainError("optimize_tau needs lo < hi");
    if (!(search.tolerance > 0.0)) throw DomainError("search tolerance must be positive");

    SearchResult best;
    bool have_best = false;
    auto evaluate = [&](double tau) {
        const double v = loss(tau);
        if (!std::isfinite(v)) throw NumericError(fmt::format("non-finite loss at tau = {:.17g}", tau));
        ++best.evaluations;
        if (!have_best || v < best.loss) {
            best.tau = tau;
            best.loss = v;
            have_best = true;
        }
        return v;
    };

    const int n = std::max(search.grid_points, 2);
    std::vector<double> grid(static_cast<std::size_t>(n));
    std::vector<double> values(grid.size());
    for (int k = 0; k < n; ++k) grid[k] = lo + (hi - lo) * static_cast<double>(k) / (n - 1);
    grid.back() = hi;
    for (int k = 0; k < n; ++k) values[k] = evaluate(grid[k]);
    for (double tau : extra)
        if (tau >= lo && tau <= hi) evaluate(tau);

    const auto j = static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
    double a = grid[std::max(j - 1, 0)];
    double b = grid[std::min(j + 1, n - 1)];
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = evaluate(c);
    double fd = evaluate(d);
    for (int it = 0; it < search.max_iterations && (b - a) > search.tolerance; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = evaluate(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = evaluate(d);
        }
    }
    best.at_boundary = best.tau == lo || best.tau == hi;
    return best;
}

TauBounds tau_bounds(const NoiseSchedule& schedule, const Trajectory& traj, int step,
                     BoundsMode mode) {
    if (step < 1 || step > traj.steps()) throw DomainError("step index outside [1, K]");
    // Conditioning at t = 0 is degenerate (sigma_0 = 0); use a small positive floor.
    const double floor = std::min(t_eps(schedule), 0.5 * traj[1]);
    if (mode == BoundsMode::Interval) {
        const double lo = traj[step - 1] > 0.0 ? traj[step - 1] : floor;
        return {lo, traj[step]};
    }
    return {floor, traj[std::min(step + 1, traj.steps())]};
}

TuneResult tune(const TunerConfig& config, const TuningProblem& problem) {
    if (config.batch < 1) throw DomainError("tuner batch must be at least 1");
    const Trajectory& traj = problem.trajectory;
    const int K = traj.steps();
    const TunedTrajectory baseline = baseline_tuned(traj, problem.sampler.kind, problem.schedule);
    const int e = baseline.evals_per_step();

    TuneResult result;
    result.tuned = baseline;
    for (int step = 1; step <= K; ++step)
        for (int k = 0; k < e; ++k)
            result.tuned.bounds[static_cast<std::size_t>((step - 1) * e + k)] =
                tau_bounds(problem.schedule, traj, step, config.bounds);

    for (int step = K; step >= 1; --step) {
        const StepLoss loss =
            config.strategy == Strategy::Sequential
                ? StepLoss::sequential(problem, step, result.tuned, config.batch, config.seed,
                                       config.workers)
                : StepLoss::parallel(problem, step, config.batch, config.seed, config.workers);
        std::vector<double> base_taus(static_cast<std::size_t>(e));
        for (int k = 0; k < e; ++k) base_taus[k] = baseline.tau(step, k);
        const LossEstimate base_loss = loss(base_taus);

        std::vector<double> taus = base_taus;
        for (int k = 0; k < e; ++k) {
            auto objective = [&](double tau) {
                std::vector<double> trial = taus;
                trial[k] = tau;
                return loss(trial).value;
            };
            const double extras[] = {base_taus[k], taus[k]};
            const TauBounds bounds = result.tuned.bounds[static_cast<std::size_t>((step - 1) * e + k)];
            const SearchResult found = optimize_tau(objective, bounds, config.search, extras);
            taus[k] = found.tau;
            result.tuned.tau(step, k) = found.tau;
            const LossEstimate tuned_loss = loss(taus);
            result.records.push_back({step, k, traj[step], found.tau, base_loss.value,
                                      tuned_loss.value, tuned_loss.std_error, found.at_boundary});
        }
    }
    return result;
}

std::string step_records_csv(const std::vector<StepRecord>& records) {
    std::string out = "i,t_i,tau_i,loss_baseline,loss_tuned,stderr,boundary_flag\n";
    for (const auto& r : records)
        out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.step, r.t, r.tau,
                           r.loss_baseline, r.loss_tuned, r.std_error, r.at_boundary ? 1 : 0);
    return out;
}

}  // namespace timetuner

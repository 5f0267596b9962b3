// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "timetuner/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "timetuner/errors.hpp"
#include "timetuner/parallel.hpp"

namespace timetuner {

SamplePath reference_path(const NoiseSchedule& schedule, const EpsilonModel& model,
                          const Point& x_T, int dense_steps) {
    const Trajectory dense = make_trajectory(TrajectoryKind::Uniform, dense_steps, schedule, 0.0);
    const TunedTrajectory plain = baseline_tuned(dense, SamplerKind::DdimFamily, schedule);
    return sample_path(schedule, model, x_T, plain, SamplerConfig{});
}

std::vector<SamplePath> reference_paths(const NoiseSchedule& schedule, const EpsilonModel& model,
                                        const std::vector<Point>& initial, int dense_steps,
                                        int workers) {
    const Trajectory dense = make_trajectory(TrajectoryKind::Uniform, dense_steps, schedule, 0.0);
    const TunedTrajectory plain = baseline_tuned(dense, SamplerKind::DdimFamily, schedule);
    return sample_paths(schedule, model, initial, plain, SamplerConfig{}, workers);
}

namespace {

bool same_point(const Point& a, const Point& b) {
    return a.size() == b.size() && (a.array() == b.array()).all();
}

// Index into a path's states (times descending) of the time nearest to t.
std::size_t nearest_state(const SamplePath& path, double t) {
    const auto& times = path.times;
    auto it = std::lower_bound(times.begin(), times.end(), t, std::greater<double>());
    if (it == times.end()) return times.size() - 1;
    const auto j = static_cast<std::size_t>(it - times.begin());
    if (j > 0 && std::abs(times[j - 1] - t) < std::abs(times[j] - t)) return j - 1;
    return j;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

Eigen::MatrixXd to_matrix(const std::vector<Point>& samples) {
    const auto n = static_cast<Eigen::Index>(samples.size());
    const Eigen::Index d = samples.front().size();
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (samples[i].size() != d) throw ShapeError("sample set mixes dimensions");
        if (!samples[i].allFinite()) throw DomainError("sample set contains non-finite values");
        m.row(i) = samples[i].transpose();
    }
    return m;
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& m, const Eigen::VectorXd& mean) {
    const Eigen::MatrixXd centered = m.rowwise() - mean.transpose();
    return (centered.transpose() * centered) / static_cast<double>(m.rows() - 1);
}

}  // namespace

GapReport gap_profile(const std::vector<SamplePath>& coarse,
                      const std::vector<SamplePath>& reference) {
    if (coarse.empty() || coarse.size() != reference.size())
        throw ContractError("gap_profile needs one reference path per coarse path");
    for (std::size_t p = 0; p < coarse.size(); ++p)
        if (!same_point(coarse[p].initial(), reference[p].initial()))
            throw ContractError("gap_profile: coarse path " + std::to_string(p) +
                                " does not share x_T with its reference");

    const SamplePath& layout = coarse.front();
    GapReport report;
    const int K = layout.steps();
    for (std::size_t j = 0; j < layout.states.size(); ++j) {
        const double t = layout.times[j];
        std::vector<double> gaps(coarse.size());
        for (std::size_t p = 0; p < coarse.size(); ++p) {
            const SamplePath& ref = reference[p];
            gaps[p] = (coarse[p].states[j] - ref.states[nearest_state(ref, t)]).norm();
        }
        const MeanSe stats = mean_se(gaps);
        report.checkpoints.push_back(
            {K - static_cast<int>(j), t, stats.mean, stats.se, static_cast<int>(coarse.size())});
    }
    return report;
}

std::string gap_report_csv(const GapReport& report) {
    std::string out = "step_index,t,mean_gap,stderr,n_paths\n";
    for (const auto& c : report.checkpoints)
        out += fmt::format("{},{:.17g},{:.17g},{:.17g},{}\n", c.step_index, c.t, c.mean_gap,
                           c.std_error, c.n_paths);
    return out;
}

double frechet_distance(const std::vector<Point>& a, const std::vector<Point>& b) {
    if (a.empty() || b.empty()) throw DomainError("frechet_distance needs non-empty sample sets");
    const Eigen::Index d = a.front().size();
    if (b.front().size() != d) throw ShapeError("frechet_distance: dimension mismatch");
    if (static_cast<Eigen::Index>(a.size()) < d + 1 || static_cast<Eigen::Index>(b.size()) < d + 1)
        throw DomainError("frechet_distance needs at least D + 1 points per set");
    const Eigen::MatrixXd ma = to_matrix(a);
    const Eigen::MatrixXd mb = to_matrix(b);
    const Eigen::VectorXd mean_a = ma.colwise().mean();
    const Eigen::VectorXd mean_b = mb.colwise().mean();
    const Eigen::MatrixXd cov_a = covariance(ma, mean_a);
    const Eigen::MatrixXd cov_b = covariance(mb, mean_b);

    // tr (C_a C_b)^{1/2} = tr (C_a^{1/2} C_b C_a^{1/2})^{1/2}, both factors symmetric PSD
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_a(cov_a);
    const Eigen::VectorXd root_vals = eig_a.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd root_a =
        eig_a.eigenvectors() * root_vals.asDiagonal() * eig_a.eigenvectors().transpose();
    const Eigen::MatrixXd inner = root_a * cov_b * root_a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_inner(0.5 * (inner + inner.transpose()),
                                                             Eigen::EigenvaluesOnly);
    const double cross = eig_inner.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double fd2 = (mean_a - mean_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * cross;
    return std::max(fd2, 0.0);
}

namespace {

// Quantile of sorted values at level q in (0, 1), nearest rank.
double sorted_quantile(const std::vector<double>& sorted, double q) {
    const auto n = sorted.size();
    auto idx = static_cast<std::size_t>(q * static_cast<double>(n));
    return sorted[std::min(idx, n - 1)];
}

}  // namespace

double sliced_wasserstein(const std::vector<Point>& a, const std::vector<Point>& b,
                          int n_projections, std::uint64_t seed) {
    if (a.empty() || b.empty()) throw DomainError("sliced_wasserstein needs non-empty sample sets");
    if (n_projections < 1) throw DomainError("sliced_wasserstein needs at least one projection");
    const auto d = static_cast<int>(a.front().size());
    if (b.front().size() != d) throw ShapeError("sliced_wasserstein: dimension mismatch");
    const Eigen::MatrixXd ma = to_matrix(a);
    const Eigen::MatrixXd mb = to_matrix(b);
    const std::size_t n = std::max(a.size(), b.size());

    double total = 0.0;
    for (int p = 0; p < n_projections; ++p) {
        Engine engine = make_engine(seed, {static_cast<std::uint64_t>(Stream::Projections),
                                           static_cast<std::uint64_t>(p)});
        Point dir = standard_normal(engine, d);
        dir /= dir.norm();
        const Eigen::VectorXd pa = ma * dir;
        const Eigen::VectorXd pb = mb * dir;
        std::vector<double> sa(pa.data(), pa.data() + pa.size());
        std::vector<double> sb(pb.data(), pb.data() + pb.size());
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        double sq = 0.0;
        if (sa.size() == sb.size()) {
            for (std::size_t k = 0; k < sa.size(); ++k) sq += (sa[k] - sb[k]) * (sa[k] - sb[k]);
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                const double q = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
                const double diff = sorted_quantile(sa, q) - sorted_quantile(sb, q);
                sq += diff * diff;
            }
        }
        total += std::sqrt(sq / static_cast<double>(sa.size() == sb.size() ? sa.size() : n));
    }
    return total / n_projections;
}

EvalReport evaluate_samples(const std::vector<Point>& samples,
                            const std::vector<Point>& reference, int n_projections,
                            std::uint64_t seed) {
    EvalReport report;
    report.frechet = frechet_distance(samples, reference);
    report.sliced_wasserstein = sliced_wasserstein(samples, reference, n_projections, seed);
    const Eigen::MatrixXd ma = to_matrix(samples);
    const Eigen::MatrixXd mb = to_matrix(reference);
    const Eigen::VectorXd mean_a = ma.colwise().mean();
    const Eigen::VectorXd mean_b = mb.colwise().mean();
    report.mean_delta = (mean_a - mean_b).norm();
    report.cov_delta = (covariance(ma, mean_a) - covariance(mb, mean_b)).norm();
    report.n_samples = samples.size();
    report.n_reference = reference.size();
    report.seed = seed;
    return report;
}

nlohmann::json to_json(const EvalReport& report) {
    return {{"frechet_distance_sq", report.frechet},
            {"sliced_wasserstein", report.sliced_wasserstein},
            {"mean_delta", report.mean_delta},
            {"cov_delta", report.cov_delta},
            {"n_samples", report.n_samples},
            {"n_reference", report.n_reference},
            {"seed", report.seed}};
}

std::vector<SweepRow> step_replacement_sweep(const TuningProblem& problem,
                                             const TunedTrajectory& tuned, std::size_t n_samples,
                                             std::uint64_t seed, int workers, int n_projections) {
    tuned.validate();
    const TunedTrajectory baseline =
        baseline_tuned(problem.trajectory, problem.sampler.kind, problem.schedule);
    const std::vector<Point> initial = initial_noise(n_samples, problem.oracle.dim(), seed);
    const std::vector<Point> reference =
        problem.oracle.sample_data(n_samples, derive_seed(seed, {static_cast<std::uint64_t>(Stream::Reference)}));
    std::vector<SweepRow> rows;
    for (int m = 0; m <= tuned.steps(); ++m) {
        const TunedTrajectory partial = replace_first_steps(tuned, baseline, m);
        const std::vector<Point> finals =
            sample_finals(problem.schedule, problem.oracle, initial, partial, problem.sampler, workers);
        rows.push_back({m, evaluate_samples(finals, reference, n_projections, seed)});
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "m,fd,swd\n";
    for (const auto& r : rows)
        out += fmt::format("{},{:.17g},{:.17g}\n", r.replaced, r.report.frechet,
                           r.report.sliced_wasserstein);
    return out;
}

ErrorBoundReport error_bound_report(const TuningProblem& problem, const TunedTrajectory& tuned,
                               int n_paths, std::uint64_t seed, int dense_steps, int workers) {
    if (problem.sampler.stochastic())
        throw ContractError("error_bound_report applies to deterministic samplers only");
    if (n_paths < 2) throw DomainError("error_bound_report needs at least two paths");
    tuned.validate();
    const NoiseSchedule& schedule = problem.schedule;
    const GaussianMixtureOracle& oracle = problem.oracle;
    const Trajectory& traj = problem.trajectory;
    const int K = traj.steps();
    const double t_cond_last = std::max(traj[0], t_eps(schedule));

    // Per path and step n (1..K): gap at t_{n-1}, loss term of step n, continuity term l = n.
    const auto n = static_cast<std::size_t>(n_paths);
    std::vector<std::vector<double>> gap(n), loss(n), cont(n);
    parallel_for(n, workers, [&](std::size_t j) {
        Engine engine = make_engine(seed, {static_cast<std::uint64_t>(Stream::Reference), j});
        const Point x0 = oracle.sample_one(engine);
        const Point eps = standard_normal(engine, oracle.dim());
        const Point x_T = schedule.forward_sample(x0, traj[K], eps);
        const SamplePath coarse = sample_path(schedule, oracle, x_T, tuned, problem.sampler, j);
        const SamplePath ref = reference_path(schedule, oracle, x_T, dense_steps);
        auto gt = [&](int i) -> const Point& { return ref.states[nearest_state(ref, traj[i])]; };
        gap[j].resize(static_cast<std::size_t>(K) + 1);
        loss[j].resize(gap[j].size());
        cont[j].resize(gap[j].size());
        for (int step = 1; step <= K; ++step) {
            const double t_cond = step == 1 ? t_cond_last : traj[step - 1];
            gap[j][step] = (coarse.at(step - 1) - gt(step - 1)).norm();
            loss[j][step] = (oracle.epsilon(coarse.at(step - 1), t_cond) -
                             oracle.epsilon(coarse.at(step), traj[step]))
                                .squaredNorm();
            // ground-truth eps at t_0 = 0 vanishes identically; it is evaluated as is
            cont[j][step] = (oracle.epsilon(gt(step), traj[step]) -
                             oracle.epsilon(gt(step - 1), traj[step - 1]))
                                .norm();
        }
    });

    ErrorBoundReport report;
    if (const auto coef = oracle.linear_coefficient(traj[1]); coef.has_value()) {
        double smallest = *coef;
        for (int i = 2; i <= K; ++i) smallest = std::min(smallest, *oracle.linear_coefficient(traj[i]));
        report.constant = 1.0 / smallest;
    }

    std::vector<double> sqrt_loss(static_cast<std::size_t>(K) + 1), sqrt_loss_se(sqrt_loss.size());
    for (int step = 1; step <= K; ++step) {
        std::vector<double> col(n);
        for (std::size_t j = 0; j < n; ++j) col[j] = loss[j][step];
        const MeanSe s = mean_se(col);
        sqrt_loss[step] = std::sqrt(s.mean);
        sqrt_loss_se[step] = s.mean > 0.0 ? s.se / (2.0 * std::sqrt(s.mean)) : 0.0;
    }

    double loss_sum = 0.0;
    double loss_var = 0.0;
    std::vector<double> cont_running(n, 0.0);
    for (int step = K; step >= 1; --step) {
        loss_sum += sqrt_loss[step];
        loss_var += sqrt_loss_se[step] * sqrt_loss_se[step];
        std::vector<double> col(n);
        for (std::size_t j = 0; j < n; ++j) {
            cont_running[j] += cont[j][step];
            col[j] = gap[j][step];
        }
        const MeanSe lhs = mean_se(col);
        const MeanSe continuity = mean_se(cont_running);

        ErrorBoundRow row;
        row.step = step;
        row.t = traj[step - 1];
        row.lhs = lhs.mean;
        row.lhs_se = lhs.se;
        row.loss_sum = loss_sum;
        row.loss_sum_se = std::sqrt(loss_var);
        row.continuity_sum = continuity.mean;
        row.continuity_se = continuity.se;
        if (report.constant) {
            const double c = *report.constant;
            row.rhs = c * (row.loss_sum + row.continuity_sum);
            row.holds = row.lhs - 3.0 * row.lhs_se <=
                        *row.rhs + 3.0 * c * (row.loss_sum_se + row.continuity_se);
        }
        report.rows.push_back(row);
    }
    return report;
}

ArgminComparison loss_argmin_comparison(const TuningProblem& problem, int step,
                                        const TunedTrajectory& prefix, int grid_points, int batch,
                                        std::uint64_t seed, int workers) {
    if (problem.sampler.kind != SamplerKind::DdimFamily)
        throw ContractError("loss_argmin_comparison scans a single conditioning time per step");
    if (grid_points < 2) throw DomainError("loss_argmin_comparison needs at least two grid points");
    const StepLoss loss = StepLoss::sequential(problem, step, prefix, batch, seed, workers);
    const TauBounds bounds =
        tau_bounds(problem.schedule, problem.trajectory, step, BoundsMode::Interval);
    ArgminComparison out;
    out.step = step;
    for (int k = 0; k < grid_points; ++k) {
        const double tau = k + 1 == grid_points
                               ? bounds.hi
                               : bounds.lo + (bounds.hi - bounds.lo) * k / (grid_points - 1);
        out.grid.push_back(tau);
        out.noise_consistency.push_back(loss(tau).value);
        out.dpm_style.push_back(loss.dpm_style(tau).value);
    }
    auto argmin = [](const std::vector<double>& v) {
        return static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
    };
    out.argmin_consistency = argmin(out.noise_consistency);
    out.argmin_dpm = argmin(out.dpm_style);
    return out;
}

}  // namespace timetuner

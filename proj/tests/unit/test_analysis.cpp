// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "timetuner/analysis.hpp"
#include "timetuner/errors.hpp"

using namespace timetuner;
using tt_test::vec;

TEST_CASE("dense reference path on a standard Gaussian") {
    const NoiseSchedule s;
    const auto g = GaussianMixtureOracle::standard_gaussian(s, 2);
    const Point xT = vec({1.5, -0.5});
    const SamplePath r1 = reference_path(s, g, xT, 1000);
    const SamplePath r2 = reference_path(s, g, xT, 2000);
    REQUIRE(r1.states.size() == 1001);
    const double e1 = (r1.final_state() - xT).norm() / xT.norm();
    const double e2 = (r2.final_state() - xT).norm() / xT.norm();
    // first-order convergence toward the identity flow
    CHECK(e2 < e1);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.02));
    CHECK(e1 == doctest::Approx(1.8811e-3).epsilon(1e-3));
    const SamplePath again = reference_path(s, g, xT, 1000);
    for (std::size_t j = 0; j < r1.states.size(); ++j) REQUIRE(tt_test::bitwise_equal(r1.states[j], again.states[j]));
}

TEST_CASE("gap profile") {
    const NoiseSchedule s;
    const auto g = GaussianMixtureOracle::gmm8(s);
    const Trajectory tr = make_trajectory(TrajectoryKind::Quadratic, 10, s);
    const TunedTrajectory base = baseline_tuned(tr, SamplerKind::DdimFamily, s);
    const auto init = initial_noise(64, 2, 3);
    const auto coarse = sample_paths(s, g, init, base, {});
    const GapReport self = gap_profile(coarse, coarse);
    REQUIRE(self.checkpoints.size() == 11);
    for (const auto& c : self.checkpoints) {
        CHECK(c.mean_gap == 0.0);
        CHECK(c.n_paths == 64);
    }
    CHECK(self.checkpoints.front().step_index == 10);
    CHECK(self.checkpoints.back().t == 0.0);

    const auto ref = reference_paths(s, g, init, 1000);
    const GapReport rep = gap_profile(coarse, ref);
    CHECK(rep.checkpoints.front().mean_gap == 0.0);
    for (const auto& c : rep.checkpoints) CHECK(c.mean_gap >= 0.0);
    CHECK(rep.checkpoints[9].mean_gap > rep.checkpoints[1].mean_gap);

    const auto other = reference_paths(s, g, initial_noise(64, 2, 4), 1000);
    CHECK_THROWS_AS(gap_profile(coarse, other), ContractError);
    CHECK_THROWS_AS(gap_profile(coarse, {}), ContractError);

    const std::string csv = gap_report_csv(rep);
    CHECK(csv.rfind("step_index,t,mean_gap,stderr,n_paths\n10,1000,0,0,64\n", 0) == 0);
}

TEST_CASE("Frechet distance closed forms") {
    std::vector<Point> a, b, c;
    Engine e(21);
    for (int j = 0; j < 50000; ++j) {
        const Point z = standard_normal(e, 2);
        a.push_back(z);
        b.push_back(z + vec({3.0, -4.0}));
        c.push_back(standard_normal(e, 2) + vec({3.0, -4.0}));
    }
    CHECK(frechet_distance(a, a) < 1e-12);
    CHECK(frechet_distance(a, b) == doctest::Approx(25.0).epsilon(1e-10));
    // population 25; sampling error from means and covariances
    CHECK(std::abs(frechet_distance(a, c) - 25.0) < 3 * std::sqrt(2 * 25.0 * 2.0 / 50000.0) + 1e-3);
    CHECK(frechet_distance(a, c) == doctest::Approx(frechet_distance(c, a)).epsilon(1e-12));

    std::vector<Point> flat;
    for (int j = 0; j < 10; ++j) flat.push_back(vec({double(j), 0.0}));
    CHECK(frechet_distance(flat, flat) >= 0.0);
    CHECK(std::isfinite(frechet_distance(flat, a)));
    CHECK_THROWS_AS(frechet_distance({vec({0.0, 0.0}), vec({1.0, 0.0})}, a), DomainError);
    CHECK_THROWS_AS(frechet_distance(a, {vec({0.0}), vec({1.0}), vec({2.0})}), ShapeError);
    std::vector<Point> bad = flat;
    bad[3][1] = NAN;
    CHECK_THROWS_AS(frechet_distance(bad, a), DomainError);

    const NoiseSchedule s;
    const auto g = GaussianMixtureOracle::gmm8(s);
    CHECK(frechet_distance(g.sample_data(50000, 1), g.sample_data(50000, 2)) < 0.01);
}

TEST_CASE("sliced Wasserstein properties") {
    std::vector<Point> a, shifted, one_d, one_d_shift;
    Engine e(8);
    for (int j = 0; j < 5000; ++j) {
        a.push_back(standard_normal(e, 2));
        shifted.push_back(a.back() + vec({0.5, 0.0}));
        one_d.push_back(standard_normal(e, 1));
        one_d_shift.push_back(one_d.back() + vec({0.7}));
    }
    CHECK(sliced_wasserstein(a, a) == 0.0);
    CHECK(sliced_wasserstein(one_d, one_d_shift, 16, 3) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(sliced_wasserstein(a, shifted, 64, 1) == sliced_wasserstein(a, shifted, 64, 1));
    CHECK(sliced_wasserstein(a, shifted, 64, 1) == doctest::Approx(sliced_wasserstein(shifted, a, 64, 1)).epsilon(1e-12));
    const double w128 = sliced_wasserstein(a, shifted, 128, 5);
    const double w512 = sliced_wasserstein(a, shifted, 512, 5);
    CHECK(std::abs(w128 - w512) / w512 < 0.05);
    std::vector<Point> half(a.begin(), a.begin() + 2500);
    CHECK(sliced_wasserstein(half, shifted) > 0.0);
    CHECK_THROWS_AS(sliced_wasserstein({}, a), DomainError);
    CHECK_THROWS_AS(sliced_wasserstein(a, a, 0), DomainError);
}

TEST_CASE("replacement sweep endpoints") {
    const NoiseSchedule s;
    const auto g = GaussianMixtureOracle::gmm8(s);
    const Trajectory tr = make_trajectory(TrajectoryKind::Quadratic, 10, s);
    const TuningProblem problem{s, g, tr, {}};
    TunerConfig cfg;
    cfg.batch = 512;
    const TunedTrajectory tuned = tune(cfg, problem).tuned;
    const std::size_t n = 2000;
    const auto rows = step_replacement_sweep(problem, tuned, n, 77, 2, 32);
    REQUIRE(rows.size() == 11);

    const auto init = initial_noise(n, 2, 77);
    const auto ref = g.sample_data(n, derive_seed(77, {static_cast<std::uint64_t>(Stream::Reference)}));
    const auto base = baseline_tuned(tr, SamplerKind::DdimFamily, s);
    const EvalReport b = evaluate_samples(sample_finals(s, g, init, base, {}), ref, 32, 77);
    const EvalReport t = evaluate_samples(sample_finals(s, g, init, tuned, {}), ref, 32, 77);
    CHECK(rows.front().report.frechet == b.frechet);
    CHECK(rows.front().report.sliced_wasserstein == b.sliced_wasserstein);
    CHECK(rows.back().report.frechet == t.frechet);
    CHECK(sweep_csv(rows).rfind("m,fd,swd\n0,", 0) == 0);

    const auto j = to_json(b);
    CHECK(j.at("n_samples") == n);
    CHECK(j.at("frechet_distance_sq") == b.frechet);
}

TEST_CASE("accumulated-error bound diagnostic") {
    const NoiseSchedule s;
    const auto g = GaussianMixtureOracle::standard_gaussian(s, 2);
    const Trajectory tr = make_trajectory(TrajectoryKind::Quadratic, 10, s);
    const TuningProblem problem{s, g, tr, {}};
    const TunedTrajectory base = baseline_tuned(tr, SamplerKind::DdimFamily, s);
    const ErrorBoundReport rep = error_bound_report(problem, base, 256, 1, 1000);
    REQUIRE(rep.constant.has_value());
    CHECK(*rep.constant == doctest::Approx(1.0 / s.alpha_sigma(tr[1]).sigma).epsilon(1e-14));
    REQUIRE(rep.rows.size() == 10);
    for (const auto& row : rep.rows) {
        REQUIRE(row.holds.has_value());
        CHECK(*row.holds);
        CHECK(row.lhs >= 0.0);
    }

    TunerConfig cfg;
    cfg.batch = 1024;
    const TunedTrajectory tuned = tune(cfg, problem).tuned;
    const ErrorBoundReport trep = error_bound_report(problem, tuned, 256, 1, 1000);
    CHECK(trep.rows.back().loss_sum < rep.rows.back().loss_sum);

    const Trajectory dense = make_trajectory(TrajectoryKind::Uniform, 1000, s);
    const TuningProblem dense_problem{s, g, dense, {}};
    const ErrorBoundReport drep =
        error_bound_report(dense_problem, baseline_tuned(dense, SamplerKind::DdimFamily, s), 4, 1, 1000);
    for (const auto& row : drep.rows) CHECK(row.lhs == 0.0);

    const auto mix = GaussianMixtureOracle::gmm8(s);
    const TuningProblem mix_problem{s, mix, tr, {}};
    CHECK(!error_bound_report(mix_problem, base, 16, 1, 200).constant.has_value());
    const TuningProblem stochastic{s, g, tr, {SamplerKind::DdimFamily, 1.0, 0}};
    CHECK_THROWS_AS(error_bound_report(stochastic, base, 16, 1), ContractError);
}

TEST_CASE("loss argmin comparison shares one frozen batch") {
    const NoiseSchedule s;
    const auto g = GaussianMixtureOracle::gmm8(s);
    const Trajectory tr = make_trajectory(TrajectoryKind::Quadratic, 10, s);
    const TuningProblem problem{s, g, tr, {}};
    const TunedTrajectory base = baseline_tuned(tr, SamplerKind::DdimFamily, s);
    const ArgminComparison cmp = loss_argmin_comparison(problem, 10, base, 21, 256, 3);
    REQUIRE(cmp.grid.size() == 21);
    CHECK(cmp.grid.front() == tr[9]);
    CHECK(cmp.grid.back() == tr[10]);
    const StepLoss loss = StepLoss::sequential(problem, 10, base, 256, 3);
    CHECK(cmp.noise_consistency[7] == loss(cmp.grid[7]).value);
    CHECK(cmp.dpm_style[7] == loss.dpm_style(cmp.grid[7]).value);
    const TuningProblem dpm{s, g, make_trajectory(TrajectoryKind::LogSnr, 4, s, 1.0), {SamplerKind::DpmSolver2, 0, 0}};
    CHECK_THROWS_AS(loss_argmin_comparison(dpm, 1, base, 5, 8, 1), ContractError);
}

// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "timetuner/errors.hpp"
#include "timetuner/schedule.hpp"

using namespace timetuner;

TEST_CASE("alpha_sigma at t = 0 is exactly (1, 0)") {
    const NoiseSchedule s;
    const auto [a, sg] = s.alpha_sigma(0.0);
    CHECK(a == 1.0);
    CHECK(sg == 0.0);
}

TEST_CASE("variance-preserving identity on a dense grid") {
    const NoiseSchedule s;
    for (int k = 0; k <= 10000; ++k) {
        const double t = 1000.0 * k / 10000.0;
        const auto [a, sg] = s.alpha_sigma(t);
        REQUIRE(std::abs(a * a + sg * sg - 1.0) <= 1e-12);
    }
}

TEST_CASE("alpha_T^2 agrees with the discrete linear schedule product") {
    // beta_i linear in [1e-4, 0.02] over 1000 steps
    double prod = 1.0;
    for (int i = 0; i < 1000; ++i) prod *= 1.0 - (1e-4 + (0.02 - 1e-4) * i / 999.0);
    const NoiseSchedule s(1e-4 * 1000, 0.02 * 1000, 1000);
    const double a2 = std::pow(s.alpha_sigma(1000).alpha, 2);
    CHECK(prod == doctest::Approx(4.0358e-5).epsilon(1e-3));
    CHECK(a2 == doctest::Approx(std::exp(-10.05)).epsilon(1e-14));
    // continuous vs discrete differ by the O(beta^2) terms of log(1 - beta)
    CHECK(std::abs(a2 - prod) / prod < 0.08);
}

TEST_CASE("times outside [0, T] are rejected") {
    const NoiseSchedule s;
    CHECK_THROWS_AS(s.alpha_sigma(-1e-9), DomainError);
    CHECK_THROWS_AS(s.alpha_sigma(1000.000001), DomainError);
    CHECK_THROWS_AS(s.alpha_sigma(std::nan("")), DomainError);
    CHECK_THROWS_AS(s.log_snr(0.0), DomainError);
    CHECK_THROWS_AS(NoiseSchedule(0.0, 20.0), DomainError);
    CHECK_THROWS_AS(NoiseSchedule(0.1, 20.0, -1.0), DomainError);
}

TEST_CASE("SNR and log-SNR strictly decrease") {
    const NoiseSchedule s;
    double prev_snr = INFINITY, prev_l = INFINITY;
    for (int k = 1; k <= 10000; ++k) {
        const double t = 1000.0 * k / 10000.0;
        const double snr = s.snr(t), l = s.log_snr(t);
        REQUIRE(snr < prev_snr);
        REQUIRE(l < prev_l);
        prev_snr = snr;
        prev_l = l;
    }
}

TEST_CASE("log-SNR is zero where alpha equals sigma") {
    const NoiseSchedule s;
    const double t = s.t_from_log_snr(0.0);
    const auto [a, sg] = s.alpha_sigma(t);
    CHECK(std::abs(a - sg) < 1e-11);
    // closed form: B(u) = log 2
    const double bmin = 0.1, d = 19.9;
    const double u = (-bmin + std::sqrt(bmin * bmin + 2 * d * std::log(2.0))) / d;
    CHECK(std::abs(t - 1000 * u) <= 1e-12 * 1000);
    CHECK(std::abs(s.log_snr(t)) < 1e-11);
}

TEST_CASE("t_from_log_snr endpoints and round trip") {
    const NoiseSchedule s;
    CHECK(s.t_from_log_snr(s.log_snr(1000.0)) == 1000.0);
    CHECK_THROWS_AS(s.t_from_log_snr(s.log_snr(1000.0) - 0.1), DomainError);
    CHECK_THROWS_AS(s.t_from_log_snr(s.log_snr(s.min_log_snr_time()) + 0.1), DomainError);
    CHECK_THROWS_AS(s.t_from_log_snr(INFINITY), DomainError);
    Engine e(7);
    std::uniform_real_distribution<double> u(1e-3, 1000.0);
    for (int k = 0; k < 100; ++k) {
        const double t = u(e);
        REQUIRE(std::abs(s.t_from_log_snr(s.log_snr(t)) - t) <= 1e-9 * 1000);
    }
}

TEST_CASE("t_from_sigma inverts sigma") {
    const NoiseSchedule s;
    for (double t : {0.5, 10.0, 250.0, 999.0}) {
        const double sg = s.alpha_sigma(t).sigma;
        CHECK(s.t_from_sigma(sg) == doctest::Approx(t).epsilon(1e-10));
    }
    CHECK_THROWS_AS(s.t_from_sigma(0.0), DomainError);
    CHECK_THROWS_AS(s.t_from_sigma(1.0), DomainError);
}

TEST_CASE("forward_sample edge cases and moments") {
    const NoiseSchedule s;
    const Point x0 = tt_test::vec({0.3, -1.2});
    const Point eps = tt_test::vec({0.9, 0.1});
    CHECK(tt_test::bitwise_equal(s.forward_sample(x0, 0.0, eps), x0));
    const double a = s.alpha_sigma(400).alpha;
    CHECK(tt_test::bitwise_equal(s.forward_sample(x0, 400, Point::Zero(2)), a * x0));
    CHECK_THROWS_AS(s.forward_sample(x0, 1.0, Point::Zero(3)), ShapeError);

    const double t = 300.0;
    const auto [al, sg] = s.alpha_sigma(t);
    Engine e(11);
    const int n = 100000;
    std::vector<double> c0, c1, sq0;
    for (int j = 0; j < n; ++j) {
        const Point x = s.forward_sample(x0, t, standard_normal(e, 2));
        c0.push_back(x[0]);
        c1.push_back(x[1]);
        sq0.push_back((x[0] - al * x0[0]) * (x[0] - al * x0[0]));
    }
    const auto m0 = tt_test::mean_se(c0), m1 = tt_test::mean_se(c1), v0 = tt_test::mean_se(sq0);
    CHECK(std::abs(m0.mean - al * x0[0]) < 3 * m0.se);
    CHECK(std::abs(m1.mean - al * x0[1]) < 3 * m1.se);
    CHECK(std::abs(v0.mean - sg * sg) < 3 * v0.se);
}

TEST_CASE("alpha_sigma is pure") {
    const NoiseSchedule s;
    const auto p = s.alpha_sigma(123.456), q = s.alpha_sigma(123.456);
    CHECK(std::memcmp(&p, &q, sizeof p) == 0);
    CHECK(schedule_kind_from_string(to_string(s.kind())) == ScheduleKind::LinearVP);
}

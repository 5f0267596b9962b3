// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "timetuner/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "timetuner/errors.hpp"

namespace timetuner {

std::string to_string(ScheduleKind) { return "linear-vp"; }

ScheduleKind schedule_kind_from_string(const std::string& name) {
    if (name == "linear-vp") return ScheduleKind::LinearVP;
    throw DomainError("unknown schedule kind '" + name + "'");
}

NoiseSchedule::NoiseSchedule(double beta_min, double beta_max, double horizon)
    : beta_min_(beta_min), beta_max_(beta_max), horizon_(horizon) {
    if (!(beta_min > 0.0) || !(beta_max >= beta_min) || !std::isfinite(beta_max))
        throw DomainError("schedule needs 0 < beta_min <= beta_max < inf");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw DomainError("schedule horizon must be positive and finite");
}

void NoiseSchedule::check_time(double t) const {
    if (!(t >= 0.0 && t <= horizon_))
        throw DomainError("time " + std::to_string(t) + " outside [0, T]");
}

double NoiseSchedule::integrated_beta(double t) const {
    check_time(t);
    const double u = t / horizon_;
    return beta_min_ * u + 0.5 * (beta_max_ - beta_min_) * u * u;
}

AlphaSigma NoiseSchedule::alpha_sigma(double t) const {
    const double b = integrated_beta(t);
    return {std::exp(-0.5 * b), std::sqrt(-std::expm1(-b))};
}

double NoiseSchedule::snr(double t) const {
    const auto [alpha, sigma] = alpha_sigma(t);
    return alpha * alpha / (sigma * sigma);
}

double NoiseSchedule::log_snr(double t) const {
    check_time(t);
    if (t == 0.0) throw DomainError("log-SNR is infinite at t = 0");
    const double b = integrated_beta(t);
    // log(alpha) - log(sigma) without forming the ratio
    return -0.5 * b - 0.5 * std::log(-std::expm1(-b));
}

double NoiseSchedule::t_from_log_snr(double lambda) const {
    return t_from_log_snr(lambda, min_log_snr_time(), 1e-12 * horizon_);
}

double NoiseSchedule::t_from_log_snr(double lambda, double t_lo, double tol) const {
    if (!std::isfinite(lambda)) throw DomainError("log-SNR must be finite");
    if (!(t_lo > 0.0 && t_lo < horizon_)) throw DomainError("t_lo must lie in (0, T)");
    double lo = t_lo;
    double hi = horizon_;
    const double lambda_hi = log_snr(hi);
    const double lambda_lo = log_snr(lo);
    const double slack = 1e-12 * std::max(1.0, std::abs(lambda));
    if (lambda < lambda_hi - slack || lambda > lambda_lo + slack)
        throw DomainError("log-SNR " + std::to_string(lambda) + " outside [lambda(T), lambda(t_lo)]");
    if (lambda <= lambda_hi) return hi;
    if (lambda >= lambda_lo) return lo;
    // lambda is strictly decreasing: lambda(lo) > target > lambda(hi)
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (log_snr(mid) > lambda)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double NoiseSchedule::t_from_sigma(double sigma, double tol) const {
    if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("sigma must lie in (0, 1)");
    const double alpha = std::sqrt((1.0 - sigma) * (1.0 + sigma));
    return t_from_log_snr(std::log(alpha / sigma), min_log_snr_time(), tol);
}

Point NoiseSchedule::forward_sample(const Point& x0, double t, const Point& eps) const {
    if (x0.size() != eps.size()) throw ShapeError("forward_sample: x0 and eps differ in dimension");
    const auto [alpha, sigma] = alpha_sigma(t);
    return alpha * x0 + sigma * eps;
}

}  // namespace timetuner

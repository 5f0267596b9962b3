// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "timetuner/random.hpp"

namespace timetuner {

enum class ScheduleKind { LinearVP };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

struct AlphaSigma {
    double alpha;
    double sigma;
};

/// Continuous-time variance-preserving schedule with a linear rate
/// beta(u) = beta_min + (beta_max - beta_min) u on normalized time u = t / T.
///
/// alpha_t = exp(-1/2 * int_0^u beta), sigma_t = sqrt(1 - alpha_t^2). The defaults
/// (0.1, 20, T = 1000) are the continuous counterparts of the discrete linear
/// schedule beta_i in [1e-4, 0.02] over 1000 steps.
class NoiseSchedule {
public:
    NoiseSchedule() = default;
    NoiseSchedule(double beta_min, double beta_max, double horizon = 1000.0);

    ScheduleKind kind() const { return ScheduleKind::LinearVP; }
    double beta_min() const { return beta_min_; }
    double beta_max() const { return beta_max_; }
    double horizon() const { return horizon_; }

    /// int_0^{t/T} beta(u) du, closed form.
    double integrated_beta(double t) const;
    AlphaSigma alpha_sigma(double t) const;
    double snr(double t) const;

    /// lambda(t) = log(alpha_t / sigma_t). Throws DomainError at t = 0 (infinite).
    double log_snr(double t) const;

    /// Inverse of log_snr by bisection on [t_lo, T] to absolute tolerance `tol`
    /// (tol = 0 bisects to machine precision). lambda must lie in [lambda(T), lambda(t_lo)].
    double t_from_log_snr(double lambda, double t_lo, double tol) const;
    double t_from_log_snr(double lambda) const;

    /// Time at which sigma_t equals `sigma`, sigma in (0, sigma_T].
    double t_from_sigma(double sigma, double tol = 0.0) const;

    /// x_t = alpha_t x0 + sigma_t eps.
    Point forward_sample(const Point& x0, double t, const Point& eps) const;

    /// Smallest time accepted by the default t_from_log_snr overload.
    double min_log_snr_time() const { return 1e-9 * horizon_; }

private:
    void check_time(double t) const;

    double beta_min_ = 0.1;
    double beta_max_ = 20.0;
    double horizon_ = 1000.0;
};

}  // namespace timetuner

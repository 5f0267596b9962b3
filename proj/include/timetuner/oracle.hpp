// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "timetuner/random.hpp"
#include "timetuner/schedule.hpp"

namespace timetuner {

/// Noise-prediction model eps(x, t). Samplers only see this interface.
class EpsilonModel {
public:
    virtual ~EpsilonModel() = default;
    virtual int dim() const = 0;
    virtual Point epsilon(const Point& x, double t) const = 0;
};

struct MixtureComponent {
    double weight;
    Point mean;
    double scale;  // isotropic standard deviation c_k
};

/// Exact eps*(x, t) for data q_0 = sum_k w_k N(mu_k, c_k^2 I) under a VP schedule.
/// The time-t marginal is sum_k w_k N(alpha_t mu_k, (alpha_t^2 c_k^2 + sigma_t^2) I).
class GaussianMixtureOracle : public EpsilonModel {
public:
    GaussianMixtureOracle(NoiseSchedule schedule, std::vector<MixtureComponent> components);

    /// Eight equal-weight components on the unit circle, c = 0.05, D = 2.
    static GaussianMixtureOracle gmm8(const NoiseSchedule& schedule);
    /// q_0 = N(0, I_D).
    static GaussianMixtureOracle standard_gaussian(const NoiseSchedule& schedule, int dim);

    int dim() const override { return dim_; }
    const NoiseSchedule& schedule() const { return schedule_; }
    const std::vector<MixtureComponent>& components() const { return components_; }

    double log_density(const Point& x, double t) const;
    std::vector<double> responsibilities(const Point& x, double t) const;
    Point score(const Point& x, double t) const;
    /// eps* = -sigma_t * score = E[eps | x_t = x].
    Point epsilon(const Point& x, double t) const override;

    Point sample_one(Engine& engine) const;
    /// Point j is drawn from its own engine derived from (seed, j).
    std::vector<Point> sample_data(std::size_t n, std::uint64_t seed) const;

    /// For a single component, eps* is linear in x with coefficient
    /// sigma_t / (alpha_t^2 c^2 + sigma_t^2); returns that coefficient.
    std::optional<double> linear_coefficient(double t) const;

private:
    // log w_k + log N(x; alpha mu_k, v_k I) for every k, written into `out`.
    void component_log_terms(const Point& x, double alpha, double sigma,
                             std::vector<double>& out) const;
    void check_point(const Point& x) const;

    NoiseSchedule schedule_;
    std::vector<MixtureComponent> components_;
    std::vector<double> log_weights_;
    int dim_ = 0;
};

}  // namespace timetuner

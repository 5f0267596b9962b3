// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "timetuner/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "timetuner/errors.hpp"

namespace timetuner {

GaussianMixtureOracle::GaussianMixtureOracle(NoiseSchedule schedule,
                                             std::vector<MixtureComponent> components)
    : schedule_(schedule), components_(std::move(components)) {
    if (components_.empty()) throw DomainError("mixture needs at least one component");
    dim_ = static_cast<int>(components_.front().mean.size());
    if (dim_ < 1) throw DomainError("mixture dimension must be positive");
    double total = 0.0;
    for (const auto& c : components_) {
        if (c.mean.size() != dim_) throw ShapeError("mixture components differ in dimension");
        if (!(c.weight > 0.0)) throw DomainError("mixture weights must be positive");
        if (!(c.scale > 0.0)) throw DomainError("mixture scales must be positive");
        if (!c.mean.allFinite()) throw DomainError("mixture means must be finite");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("mixture weights must sum to 1");
    for (const auto& c : components_) log_weights_.push_back(std::log(c.weight));
}

GaussianMixtureOracle GaussianMixtureOracle::gmm8(const NoiseSchedule& schedule) {
    std::vector<MixtureComponent> comps;
    for (int k = 0; k < 8; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / 8.0;
        Point mean(2);
        mean << std::cos(angle), std::sin(angle);
        comps.push_back({1.0 / 8.0, mean, 0.05});
    }
    return GaussianMixtureOracle(schedule, std::move(comps));
}

GaussianMixtureOracle GaussianMixtureOracle::standard_gaussian(const NoiseSchedule& schedule,
                                                               int dim) {
    return GaussianMixtureOracle(schedule, {{1.0, Point::Zero(dim), 1.0}});
}

void GaussianMixtureOracle::check_point(const Point& x) const {
    if (x.size() != dim_) throw ShapeError("point dimension does not match the oracle");
    if (!x.allFinite()) throw DomainError("oracle evaluated at a non-finite point");
}

void GaussianMixtureOracle::component_log_terms(const Point& x, double alpha, double sigma,
                                                std::vector<double>& out) const {
    out.resize(components_.size());
    const double half_dim = 0.5 * dim_;
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const auto& c = components_[k];
        const double v = alpha * alpha * c.scale * c.scale + sigma * sigma;
        const double dist2 = (x - alpha * c.mean).squaredNorm();
        out[k] = log_weights_[k] - half_dim * std::log(2.0 * std::numbers::pi * v) - 0.5 * dist2 / v;
    }
}

namespace {

// Normalizes log terms in place into responsibilities; returns log-sum-exp.
double normalize_log_terms(std::vector<double>& terms) {
    const double peak = *std::max_element(terms.begin(), terms.end());
    double sum = 0.0;
    for (double& l : terms) {
        l = std::exp(l - peak);
        sum += l;
    }
    for (double& l : terms) l /= sum;
    return peak + std::log(sum);
}

}  // namespace

double GaussianMixtureOracle::log_density(const Point& x, double t) const {
    check_point(x);
    const auto [alpha, sigma] = schedule_.alpha_sigma(t);
    std::vector<double> terms;
    component_log_terms(x, alpha, sigma, terms);
    return normalize_log_terms(terms);
}

std::vector<double> GaussianMixtureOracle::responsibilities(const Point& x, double t) const {
    check_point(x);
    const auto [alpha, sigma] = schedule_.alpha_sigma(t);
    std::vector<double> terms;
    component_log_terms(x, alpha, sigma, terms);
    normalize_log_terms(terms);
    return terms;
}

Point GaussianMixtureOracle::score(const Point& x, double t) const {
    check_point(x);
    const auto [alpha, sigma] = schedule_.alpha_sigma(t);
    std::vector<double> gamma;
    component_log_terms(x, alpha, sigma, gamma);
    normalize_log_terms(gamma);
    Point s = Point::Zero(dim_);
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const auto& c = components_[k];
        const double v = alpha * alpha * c.scale * c.scale + sigma * sigma;
        s.noalias() += (gamma[k] / v) * (alpha * c.mean - x);
    }
    return s;
}

Point GaussianMixtureOracle::epsilon(const Point& x, double t) const {
    const double sigma = schedule_.alpha_sigma(t).sigma;
    return -sigma * score(x, t);
}

Point GaussianMixtureOracle::sample_one(Engine& engine) const {
    std::size_t k = 0;
    if (components_.size() > 1) {
        std::vector<double> weights;
        for (const auto& c : components_) weights.push_back(c.weight);
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        k = pick(engine);
    }
    const auto& c = components_[k];
    return c.mean + c.scale * standard_normal(engine, dim_);
}

std::vector<Point> GaussianMixtureOracle::sample_data(std::size_t n, std::uint64_t seed) const {
    if (n < 1) throw DomainError("sample_data needs n >= 1");
    std::vector<Point> out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        Engine engine = make_engine(seed, {static_cast<std::uint64_t>(Stream::Data), j});
        out.push_back(sample_one(engine));
    }
    return out;
}

std::optional<double> GaussianMixtureOracle::linear_coefficient(double t) const {
    if (components_.size() != 1) return std::nullopt;
    const auto [alpha, sigma] = schedule_.alpha_sigma(t);
    const double c = components_.front().scale;
    return sigma / (alpha * alpha * c * c + sigma * sigma);
}

}  // namespace timetuner

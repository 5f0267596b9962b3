// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Core>

namespace timetuner {

using Point = Eigen::VectorXd;
using Engine = std::mt19937_64;

// Stream keys for seed derivation. Different experiment phases never share a stream.
enum class Stream : std::uint64_t {
    Tuning = 1,
    SamplerNoise = 2,
    InitialState = 3,
    Reference = 4,
    Projections = 5,
    Data = 6,
};

/// Mixes a master seed with an ordered list of keys (splitmix64 finalizer per key).
/// Used to give every Monte Carlo sample its own engine, so results do not depend
/// on how samples are partitioned across workers.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

inline Engine make_engine(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    return Engine(derive_seed(master, keys));
}

Point standard_normal(Engine& engine, int dim);

}  // namespace timetuner

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "maelstrom/core.hpp"

namespace maelstrom {

struct MemoryCapacityOptions {
    std::size_t seq_len = 6000;
    /// 0 selects min(2 * units, 200).
    std::size_t d_max = 0;
    double lambda = 1e-6;
    std::uint64_t seed = 0;
    std::size_t washout = 100;
    /// Fraction of post-washout samples used for fitting; the rest is held out.
    double fit_fraction = 0.7;
};

struct MemoryCapacityReport {
    /// r2[d-1] for delay d = 1..d_max.
    std::vector<double> r2;
    double total = 0.0;
    std::size_t units = 0;
    std::string config_digest;
};

/// Drives the bare core with i.i.d. u(t) ~ U[-1, 1] (the same scalar on every
/// drive channel), ridge-fits one linear readout per delay to reconstruct
/// u(t - d), and scores squared Pearson correlation on the held-out segment.
MemoryCapacityReport memory_capacity(const MaelstromCore& core, const MemoryCapacityOptions& opts);

std::size_t default_d_max(std::size_t units) noexcept;

struct RegimeRow {
    double spectral_radius = 0.0;
    std::uint64_t seed = 0;
    double spectral_norm = 0.0;
    double divergence_rate = 0.0;
    double memory_capacity = 0.0;

    bool operator==(const RegimeRow&) const = default;
};

struct RegimeSweepOptions {
    DivergenceOptions divergence;
    MemoryCapacityOptions capacity;
};

/// One row per (radius, seed), radius-major. Each cell builds a fresh core
/// from the template with the given radius and seed.
std::vector<RegimeRow> regime_sweep(const MaelstromConfig& tmpl, std::span<const double> radii,
                                    std::span<const std::uint64_t> seeds,
                                    const RegimeSweepOptions& opts = {});

}  // namespace maelstrom

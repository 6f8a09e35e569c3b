#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kvar/measures.hpp"

namespace kvar {

struct SweepConfig {
    MeasureSpec spec;
    /// Strictly ascending, positive.
    std::vector<std::size_t> k_grid;
    std::size_t n_per_k = 1;
    std::uint64_t master_seed = 0;
    std::string label;
};

/// One point of a k-variance curve.
struct SweepRecord {
    std::size_t k = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    double elapsed_seconds = 0.0;
};

struct Sweep {
    std::string label;
    std::vector<SweepRecord> records;
};

/// Least-squares line through (log k, log estimate).
struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t k_min = 0;
    std::size_t k_max = 0;
    std::size_t points = 0;
    /// Records in range dropped because their estimate was not positive.
    std::size_t filtered = 0;
};

struct FittedSweep {
    Sweep sweep;
    std::optional<SlopeFit> fit;
};

/// Estimates k-variance at every grid k. The estimator for grid value k is
/// seeded with derive_seed(master_seed, {k}).
std::vector<SweepRecord> run_sweep(const SweepConfig& config, unsigned threads = 1);

/// Unweighted OLS of log(estimate) on log(k) over records with k >= k_min.
/// Throws InsufficientDataError when fewer than three usable points remain.
SlopeFit fit_loglog_slope(std::span<const SweepRecord> records, std::size_t k_min = 32);

/// One sweep per mixture offset x over a shared grid; the curve for x is
/// seeded from (master_seed, bits of x).
std::vector<Sweep> gmm_sweep(std::span<const double> xs, std::size_t dim, std::span<const std::size_t> k_grid,
                             std::size_t n_per_k, std::uint64_t master_seed, unsigned threads = 1);

/// Gaussians on d'-dimensional coordinate hyperplanes of R^d, with slope fits.
std::vector<FittedSweep> lowdim_sweep(std::span<const std::size_t> intrinsic_dims, std::size_t ambient_dim,
                                      std::span<const std::size_t> k_grid, std::size_t n_per_k,
                                      std::uint64_t master_seed, std::size_t fit_k_min = 32,
                                      unsigned threads = 1);

/// Uniform measures on S^{d'-1} embedded in R^d, with slope fits.
std::vector<FittedSweep> sphere_sweep(std::span<const std::size_t> intrinsic_dims, std::size_t ambient_dim,
                                      std::span<const std::size_t> k_grid, std::size_t n_per_k,
                                      std::uint64_t master_seed, std::size_t fit_k_min = 32,
                                      unsigned threads = 1);

}  // namespace kvar

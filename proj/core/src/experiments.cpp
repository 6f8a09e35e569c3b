#include "kvar/experiments.hpp"

#include <bit>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "kvar/error.hpp"
#include "kvar/kvariance.hpp"

namespace kvar {

namespace {

void validate_grid(std::span<const std::size_t> grid) {
    if (grid.empty()) {
        throw ParameterError("k grid is empty");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] == 0) {
            throw ParameterError("k grid values must be positive");
        }
        if (i > 0 && grid[i] <= grid[i - 1]) {
            throw ParameterError("k grid must be strictly ascending");
        }
    }
}

template <class Make>
std::vector<FittedSweep> fitted_family_sweep(std::span<const std::size_t> intrinsic_dims,
                                             std::span<const std::size_t> k_grid, std::size_t n_per_k,
                                             std::uint64_t master_seed, std::size_t fit_k_min,
                                             unsigned threads, const char* prefix, Make make) {
    std::vector<FittedSweep> out;
    for (std::size_t dp : intrinsic_dims) {
        SweepConfig config{make(dp), {k_grid.begin(), k_grid.end()}, n_per_k, derive_seed(master_seed, {dp}),
                           fmt::format("{}_dprime{}", prefix, dp)};
        FittedSweep fs{{config.label, run_sweep(config, threads)}, std::nullopt};
        try {
            fs.fit = fit_loglog_slope(fs.sweep.records, fit_k_min);
        } catch (const InsufficientDataError&) {
            fs.fit = std::nullopt;
        }
        out.push_back(std::move(fs));
    }
    return out;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const SweepConfig& config, unsigned threads) {
    validate_grid(config.k_grid);
    if (config.n_per_k == 0) {
        throw ParameterError("n per k must be positive");
    }
    std::vector<SweepRecord> records;
    records.reserve(config.k_grid.size());
    for (std::size_t k : config.k_grid) {
        const auto start = std::chrono::steady_clock::now();
        EstimateOptions options;
        options.k = k;
        options.trials = config.n_per_k;
        options.master_seed = derive_seed(config.master_seed, {k});
        options.threads = threads;
        const KVarEstimate est = estimate_kvar(config.spec, options);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        records.push_back({k, est.estimate, est.std_error, config.n_per_k, elapsed.count()});
    }
    return records;
}

SlopeFit fit_loglog_slope(std::span<const SweepRecord> records, std::size_t k_min) {
    std::vector<double> lx;
    std::vector<double> ly;
    SlopeFit fit;
    for (const SweepRecord& r : records) {
        if (r.k < k_min) {
            continue;
        }
        if (!(r.estimate > 0.0)) {
            ++fit.filtered;
            continue;
        }
        if (lx.empty()) {
            fit.k_min = r.k;
        }
        fit.k_max = r.k;
        lx.push_back(std::log(static_cast<double>(r.k)));
        ly.push_back(std::log(r.estimate));
    }
    fit.points = lx.size();
    if (fit.points < 3) {
        throw InsufficientDataError(
            fmt::format("slope fit needs 3 positive points with k >= {}, have {}", k_min, fit.points));
    }
    const auto n = static_cast<double>(fit.points);
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) {
        throw InsufficientDataError("slope fit needs at least two distinct k values");
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss_res += r * r;
    }
    fit.r_squared = (ss_res == 0.0 || syy == 0.0) ? 1.0 : std::max(0.0, 1.0 - ss_res / syy);
    return fit;
}

std::vector<Sweep> gmm_sweep(std::span<const double> xs, std::size_t dim, std::span<const std::size_t> k_grid,
                             std::size_t n_per_k, std::uint64_t master_seed, unsigned threads) {
    std::vector<Sweep> out;
    for (double x : xs) {
        SweepConfig config{MeasureSpec(family::GaussianMixtureGx{x, dim}),
                           {k_grid.begin(), k_grid.end()},
                           n_per_k,
                           derive_seed(master_seed, {std::bit_cast<std::uint64_t>(x)}),
                           fmt::format("gmm_d{}_x{}", dim, x)};
        out.push_back({config.label, run_sweep(config, threads)});
    }
    return out;
}

std::vector<FittedSweep> lowdim_sweep(std::span<const std::size_t> intrinsic_dims, std::size_t ambient_dim,
                                      std::span<const std::size_t> k_grid, std::size_t n_per_k,
                                      std::uint64_t master_seed, std::size_t fit_k_min, unsigned threads) {
    return fitted_family_sweep(intrinsic_dims, k_grid, n_per_k, master_seed, fit_k_min, threads,
                               fmt::format("lowdim_d{}", ambient_dim).c_str(), [&](std::size_t dp) {
                                   return MeasureSpec(family::LowRankGaussian{dp, ambient_dim});
                               });
}

std::vector<FittedSweep> sphere_sweep(std::span<const std::size_t> intrinsic_dims, std::size_t ambient_dim,
                                      std::span<const std::size_t> k_grid, std::size_t n_per_k,
                                      std::uint64_t master_seed, std::size_t fit_k_min, unsigned threads) {
    return fitted_family_sweep(intrinsic_dims, k_grid, n_per_k, master_seed, fit_k_min, threads,
                               fmt::format("sphere_d{}", ambient_dim).c_str(), [&](std::size_t dp) {
                                   return MeasureSpec(family::SphereUniform{dp, ambient_dim});
                               });
}

}  // namespace kvar

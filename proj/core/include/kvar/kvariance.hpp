#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kvar/empirical_measure.hpp"
#include "kvar/measures.hpp"
#include "kvar/random.hpp"

namespace kvar {

/// Ambient scaling rate: k for d = 1, k / ln k for d = 2 (k >= 2), k^(2/d)
/// for d > 2, and 1 whenever k = 1 so that Var_1 is the ordinary variance.
double rho(std::size_t k, std::size_t d);

/// McDiarmid deviation radius rho(k,d) R^2 sqrt(log(kn) / (kn)).
struct ConcentrationRadius {
    double radius = 0.0;
    /// Upper bound on P(|estimate - Var_k| >= radius): 2 / (k n)^2.
    double failure_probability = 1.0;
    /// True when kn = 1, where the radius collapses to zero.
    bool degenerate = false;
};

ConcentrationRadius mcdiarmid_radius(std::size_t k, std::size_t n, std::size_t d, double support_radius);

/// Result of the n-trial Monte-Carlo estimator.
struct KVarEstimate {
    std::size_t k = 0;
    std::size_t d = 0;
    std::size_t trials = 0;
    /// rho(k,d) / (2n) * sum of trial costs.
    double estimate = 0.0;
    /// Raw W2^2 value of each trial, in trial order.
    std::vector<double> trial_costs;
    /// Sample standard deviation (n - 1 denominator) of the scaled trials
    /// over sqrt(n); zero when n = 1.
    double std_error = 0.0;
    std::optional<ConcentrationRadius> concentration;
    std::uint64_t master_seed = 0;
};

/// Draws a k-point cloud from a stream.
using Sampler = std::function<EmpiricalMeasure(std::size_t k, Stream& stream)>;

struct EstimateOptions {
    std::size_t k = 1;
    std::size_t trials = 1;
    std::uint64_t master_seed = 0;
    /// Worker threads; 0 picks std::thread::hardware_concurrency(). The
    /// result does not depend on this value.
    unsigned threads = 1;
    /// Support radius R; when set the McDiarmid radius is attached.
    std::optional<double> support_radius;
};

/// Trial j draws its two clouds from Stream::derive(master_seed, {j, 0}) and
/// Stream::derive(master_seed, {j, 1}); trial costs are accumulated in trial
/// order, so the output is bit-identical for any thread count.
KVarEstimate estimate_kvar(const MeasureSpec& spec, const EstimateOptions& options);

/// Same estimator for an arbitrary sampler of dimension `dim`.
KVarEstimate estimate_kvar(const Sampler& sampler, std::size_t dim, const EstimateOptions& options);

/// Worker count from an explicit request, falling back to KVAR_THREADS and
/// then to hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Runs body(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace kvar

#pragma once

#include <cstddef>
#include <vector>

#include "kvar/measures.hpp"
#include "kvar/random.hpp"

namespace kvar {

/// Means and variances of the k order statistics of a 1D parent.
struct OrderStatSummary {
    std::size_t k = 0;
    std::vector<double> means;
    std::vector<double> variances;
    double parent_mean = 0.0;
    double parent_variance = 0.0;
};

/// The three one-dimensional bounds built from an order-statistic summary.
struct Bounds1D {
    /// k sigma^2 - sum_i (mean_i - parent_mean)^2. An identity when the
    /// summary is exact.
    double upper = 0.0;
    /// k sigma^2.
    double upper_loose = 0.0;
    /// k sigma^2 - 2 sum_{i<j} sigma_i sigma_j r_ij with r_ij the order
    /// statistic correlation bound; tight for the uniform parent.
    double lower = 0.0;
};

struct TukeyLimit {
    double value = 0.0;
    /// True for lambda in (-1, 2): the value only bounds limsup Var_k.
    bool upper_bound_only = false;
};

/// k / (6 (k + 1)), the k-variance of Unif[0, 1].
double kvar_uniform(std::size_t k);

/// H_k: direct summation up to 10^6 terms, asymptotic expansion beyond.
double harmonic_number(std::size_t k);

/// H_k / rate^2, the k-variance of Exp(rate).
double kvar_exponential(std::size_t k, double rate);

/// Gamma(2/a) / (a (a - 2)) for a > 2, +infinity otherwise.
double varinf_weibull(double shape);

/// 2 / ((lambda + 1)(lambda + 2)). Throws DivergentIntegralError for
/// lambda <= -1.
TukeyLimit varinf_tukey(double lambda);

/// rho(k, d) C(2k, k) / 2^(2k+1) for the two-atom measure at +-0.5 e1,
/// evaluated in log space.
double kvar_two_point(std::size_t k, std::size_t d);

/// 1 / (2 pi).
double varinf_unit_square();

/// Beta(i, k + 1 - i) moments of uniform order statistics.
OrderStatSummary order_stats_uniform(std::size_t k);

/// Exact exponential order-statistic moments via the Renyi representation.
OrderStatSummary order_stats_exponential(std::size_t k, double rate);

/// Monte-Carlo order-statistic moments of a 1D spec over n_reps sorted
/// k-samples. Replicate r uses Stream::derive(base, {r}) with base drawn
/// once from `stream`.
OrderStatSummary order_stats_mc(const MeasureSpec& spec, std::size_t k, std::size_t n_reps, Stream& stream);

/// sqrt(i (k + 1 - j) / (j (k + 1 - i))) for 1 <= i < j <= k: the maximal
/// correlation of the i-th and j-th order statistics, attained by the
/// uniform parent.
double order_stat_correlation_bound(std::size_t i, std::size_t j, std::size_t k);

Bounds1D bounds_1d(const OrderStatSummary& summary);

/// k sigma^2 - sum_i (F^-1(p_i) - mean)^2 with p_i = i / (k + 1).
double kvar_quantile_approx(const Quantile1D& q, std::size_t k, double parent_mean, double parent_variance);

/// (1 / (k + 2)) sum_i p_i (1 - p_i) [(F^-1)'(p_i)]^2 with p_i = i / (k + 1).
/// Throws SingularityError when the density vanishes at some p_i.
double kvar_taylor_approx(const Quantile1D& q, std::size_t k);

/// Integral over (0, 1) of u (1 - u) [(F^-1)'(u)]^2, the large-k limit of
/// the 1D k-variance. Returns +infinity when the integral diverges.
///
/// The integral is taken over the log-odds w = log(u / (1 - u)) with
/// w = sinh(t), so algebraic tails in x become exponential tails in t. Each
/// refinement doubles the t-window and halves the step, starting from
/// `nodes` trapezoid nodes on [-8, 8]. The result is declared divergent
/// when two consecutive refinements each grow it by more than 10%.
double varinf_integral(const Quantile1D& q, std::size_t nodes = 64);

}  // namespace kvar

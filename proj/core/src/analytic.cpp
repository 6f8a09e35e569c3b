#include "kvar/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "kvar/error.hpp"
#include "kvar/kvariance.hpp"

namespace kvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 + e^w), stable for any w.
double softplus(double w) {
    return w > 0.0 ? w + std::log1p(std::exp(-w)) : std::log1p(std::exp(w));
}

void require_positive_k(std::size_t k) {
    if (k == 0) {
        throw ParameterError("k must be positive");
    }
}

}  // namespace

double kvar_uniform(std::size_t k) {
    require_positive_k(k);
    const auto kd = static_cast<double>(k);
    return kd / (6.0 * (kd + 1.0));
}

double harmonic_number(std::size_t k) {
    if (k <= 1'000'000) {
        double h = 0.0;
        // Smallest terms first.
        for (std::size_t i = k; i >= 1; --i) {
            h += 1.0 / static_cast<double>(i);
        }
        return h;
    }
    const auto kd = static_cast<double>(k);
    return std::log(kd) + std::numbers::egamma + 0.5 / kd - 1.0 / (12.0 * kd * kd);
}

double kvar_exponential(std::size_t k, double rate) {
    require_positive_k(k);
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw ParameterError(fmt::format("exponential rate must be positive, got {}", rate));
    }
    return harmonic_number(k) / (rate * rate);
}

double varinf_weibull(double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw ParameterError(fmt::format("weibull shape must be positive, got {}", shape));
    }
    if (shape <= 2.0) {
        return kInf;
    }
    return std::tgamma(2.0 / shape) / (shape * (shape - 2.0));
}

TukeyLimit varinf_tukey(double lambda) {
    if (!std::isfinite(lambda)) {
        throw ParameterError("tukey lambda must be finite");
    }
    if (lambda <= -1.0) {
        throw DivergentIntegralError(fmt::format("tukey limit diverges for lambda = {} <= -1", lambda));
    }
    return {2.0 / ((lambda + 1.0) * (lambda + 2.0)), lambda < 2.0};
}

double kvar_two_point(std::size_t k, std::size_t d) {
    require_positive_k(k);
    const auto kd = static_cast<double>(k);
    // log(C(2k, k) / 4^k). lgamma loses absolute accuracy as k grows, so
    // large k switch to the asymptotic series (error below 1e-17 there).
    double log_ratio = 0.0;
    if (k < 100) {
        log_ratio = std::lgamma(2.0 * kd + 1.0) - 2.0 * std::lgamma(kd + 1.0) - 2.0 * kd * std::numbers::ln2;
    } else {
        const double inv = 1.0 / kd;
        const double inv3 = inv * inv * inv;
        log_ratio = -0.5 * std::log(std::numbers::pi * kd) - inv / 8.0 + inv3 / 192.0 - inv3 * inv * inv / 640.0;
    }
    return 0.5 * rho(k, d) * std::exp(log_ratio);
}

double varinf_unit_square() { return 1.0 / (2.0 * std::numbers::pi); }

OrderStatSummary order_stats_uniform(std::size_t k) {
    require_positive_k(k);
    OrderStatSummary s;
    s.k = k;
    s.means.resize(k);
    s.variances.resize(k);
    const auto kd = static_cast<double>(k);
    for (std::size_t i = 1; i <= k; ++i) {
        const double p = static_cast<double>(i) / (kd + 1.0);
        s.means[i - 1] = p;
        s.variances[i - 1] = p * (1.0 - p) / (kd + 2.0);
    }
    s.parent_mean = 0.5;
    s.parent_variance = 1.0 / 12.0;
    return s;
}

OrderStatSummary order_stats_exponential(std::size_t k, double rate) {
    require_positive_k(k);
    if (!(rate > 0.0)) {
        throw ParameterError("exponential rate must be positive");
    }
    // X_(i) = (1/rate) sum_{j <= i} Z_j / (k - j + 1) with Z_j iid Exp(1).
    OrderStatSummary s;
    s.k = k;
    s.means.resize(k);
    s.variances.resize(k);
    double mean = 0.0;
    double var = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
        const double w = 1.0 / (rate * static_cast<double>(k - j + 1));
        mean += w;
        var += w * w;
        s.means[j - 1] = mean;
        s.variances[j - 1] = var;
    }
    s.parent_mean = 1.0 / rate;
    s.parent_variance = 1.0 / (rate * rate);
    return s;
}

OrderStatSummary order_stats_mc(const MeasureSpec& spec, std::size_t k, std::size_t n_reps, Stream& stream) {
    require_positive_k(k);
    if (spec.dim() != 1) {
        throw UnsupportedFamilyError(fmt::format("order statistics need a 1D measure, got {}", spec.name()));
    }
    if (n_reps < 2) {
        throw ParameterError("order statistic moments need at least two replicates");
    }
    const std::uint64_t base = stream();
    OrderStatSummary s;
    s.k = k;
    s.means.assign(k, 0.0);
    std::vector<double> m2(k, 0.0);
    double pooled_mean = 0.0;
    double pooled_m2 = 0.0;
    std::size_t pooled_n = 0;

    for (std::size_t r = 0; r < n_reps; ++r) {
        Stream rep = Stream::derive(base, {r});
        EmpiricalMeasure draw = sample(spec, k, rep);
        auto xs = draw.coords();
        std::sort(xs.begin(), xs.end());
        const auto count = static_cast<double>(r + 1);
        for (std::size_t i = 0; i < k; ++i) {
            const double delta = xs[i] - s.means[i];
            s.means[i] += delta / count;
            m2[i] += delta * (xs[i] - s.means[i]);

            ++pooled_n;
            const double pd = xs[i] - pooled_mean;
            pooled_mean += pd / static_cast<double>(pooled_n);
            pooled_m2 += pd * (xs[i] - pooled_mean);
        }
    }
    s.variances.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        s.variances[i] = m2[i] / static_cast<double>(n_reps - 1);
    }
    s.parent_mean = pooled_mean;
    s.parent_variance = pooled_m2 / static_cast<double>(pooled_n - 1);
    return s;
}

double order_stat_correlation_bound(std::size_t i, std::size_t j, std::size_t k) {
    if (i == 0 || i >= j || j > k) {
        throw ParameterError(fmt::format("need 1 <= i < j <= k, got i={} j={} k={}", i, j, k));
    }
    const auto id = static_cast<double>(i);
    const auto jd = static_cast<double>(j);
    const auto k1 = static_cast<double>(k) + 1.0;
    return std::sqrt(id * (k1 - jd) / (jd * (k1 - id)));
}

Bounds1D bounds_1d(const OrderStatSummary& summary) {
    const std::size_t k = summary.k;
    if (k == 0 || summary.means.size() != k || summary.variances.size() != k) {
        throw ShapeError("order statistic summary is incomplete");
    }
    Bounds1D b;
    b.upper_loose = static_cast<double>(k) * summary.parent_variance;

    double between = 0.0;
    for (double m : summary.means) {
        between += (m - summary.parent_mean) * (m - summary.parent_mean);
    }
    b.upper = b.upper_loose - between;

    std::vector<double> sd(k);
    for (std::size_t i = 0; i < k; ++i) {
        sd[i] = std::sqrt(std::max(0.0, summary.variances[i]));
    }
    double cross = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
        for (std::size_t j = i + 1; j <= k; ++j) {
            cross += sd[i - 1] * sd[j - 1] * order_stat_correlation_bound(i, j, k);
        }
    }
    b.lower = b.upper_loose - 2.0 * cross;
    return b;
}

double kvar_quantile_approx(const Quantile1D& q, std::size_t k, double parent_mean, double parent_variance) {
    require_positive_k(k);
    const auto kd = static_cast<double>(k);
    double between = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
        const double dev = q.quantile(static_cast<double>(i) / (kd + 1.0)) - parent_mean;
        between += dev * dev;
    }
    return kd * parent_variance - between;
}

double kvar_taylor_approx(const Quantile1D& q, std::size_t k) {
    require_positive_k(k);
    const auto kd = static_cast<double>(k);
    double total = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
        const double p = static_cast<double>(i) / (kd + 1.0);
        const double qd = q.quantile_density(p);
        if (!std::isfinite(qd)) {
            throw SingularityError(fmt::format("density vanishes at p = {}", p), p);
        }
        total += p * (1.0 - p) * qd * qd;
    }
    return total / (kd + 2.0);
}

double varinf_integral(const Quantile1D& q, std::size_t nodes) {
    if (nodes < 64) {
        throw ParameterError(fmt::format("quadrature needs at least 64 nodes, got {}", nodes));
    }
    if (!q.log_weighted_quantile_density) {
        throw UnsupportedFamilyError("quantile density evaluator missing");
    }

    // With w = log(u / (1 - u)): u (1 - u) q'(u)^2 du = [u (1 - u) q'(u)]^2 dw,
    // and w = sinh(t) gives dw = cosh(t) dt.
    const auto integrand = [&q](double t) {
        const double w = std::sinh(t);
        const double log_u = -softplus(-w);
        const double log_1mu = -softplus(w);
        return std::exp(2.0 * q.log_weighted_quantile_density(log_u, log_1mu)) * std::cosh(t);
    };

    constexpr double kHalfWidth = 8.0;
    constexpr int kMaxLevels = 7;
    constexpr double kGrowth = 0.10;
    constexpr double kRelTol = 1e-12;

    double half_width = kHalfWidth;
    double step = 2.0 * kHalfWidth / static_cast<double>(nodes);
    double previous = 0.0;
    int growth_streak = 0;
    for (int level = 0; level < kMaxLevels; ++level) {
        const auto half_count = static_cast<long long>(std::llround(half_width / step));
        double sum = integrand(0.0);
        for (long long m = 1; m <= half_count; ++m) {
            const double t = static_cast<double>(m) * step;
            sum += integrand(t) + integrand(-t);
        }
        const double current = sum * step;
        if (!std::isfinite(current)) {
            return kInf;
        }
        if (level > 0) {
            const double change = current - previous;
            if (std::abs(change) <= kRelTol * std::abs(current)) {
                return current;
            }
            growth_streak = change > kGrowth * previous ? growth_streak + 1 : 0;
            if (growth_streak >= 2) {
                return kInf;
            }
        }
        previous = current;
        half_width *= 2.0;
        step *= 0.5;
    }
    return previous;
}

}  // namespace kvar

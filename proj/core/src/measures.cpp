#include "kvar/measures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>

#include "kvar/error.hpp"

namespace kvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b) {
    if (a < b) {
        std::swap(a, b);
    }
    if (a == -kInf) {
        return -kInf;
    }
    return a + std::log1p(std::exp(b - a));
}

// ---- CSV ------------------------------------------------------------------

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

bool parse_number(std::string_view field, double& out) {
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    if (field.empty()) {
        return false;
    }
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size();
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

// ---- Gaussian quantile helpers ----------------------------------------------

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

// log of the Mills ratio Phi(-t) / phi(t) from its asymptotic series; the
// truncation error is below 1e-13 for t >= 30.
double log_mills_asymptotic(double t) {
    const double r = 1.0 / (t * t);
    return -std::log(t) + std::log1p(r * (-1.0 + r * (3.0 + r * (-15.0 + r * 105.0))));
}

// z with Phi(z) = p for the lower tail, given log p.
double lower_normal_quantile_from_log(double log_p) {
    if (log_p > -690.0) {
        const double p = std::exp(log_p);
        return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
    }
    // Solve log Phi(-t) = -t^2/2 - log sqrt(2 pi) + log mills(t) = log p.
    double t = std::sqrt(-2.0 * log_p);
    for (int it = 0; it < 50; ++it) {
        const double f = -0.5 * t * t - kLogSqrt2Pi + log_mills_asymptotic(t) - log_p;
        const double df = -t - 1.0 / t;
        const double step = f / df;
        t -= step;
        if (std::abs(step) <= 1e-15 * t) {
            break;
        }
    }
    return -t;
}

double standard_normal_quantile(double u) {
    if (u <= 0.0) {
        return -kInf;
    }
    if (u >= 1.0) {
        return kInf;
    }
    if (u < 0.5) {
        return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
    }
    return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * (1.0 - u));
}

// ---- Tukey lambda -----------------------------------------------------------

double tukey_quantile(double lambda, double u) {
    if (lambda == 0.0) {
        return std::log(u) - std::log1p(-u);
    }
    return (std::pow(u, lambda) - std::pow(1.0 - u, lambda)) / lambda;
}

double tukey_quantile_density(double lambda, double u) {
    return std::pow(u, lambda - 1.0) + std::pow(1.0 - u, lambda - 1.0);
}

double tukey_cdf(double lambda, double x) {
    if (lambda == 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    if (lambda > 0.0) {
        if (x <= -1.0 / lambda) {
            return 0.0;
        }
        if (x >= 1.0 / lambda) {
            return 1.0;
        }
    }
    if (std::isnan(x)) {
        return x;
    }
    // The quantile is strictly increasing; bisect on u, then polish.
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break;
        }
        if (tukey_quantile(lambda, mid) < x) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// ---- Validation -------------------------------------------------------------

std::size_t validate(const MeasureSpec::Family& family) {
    return std::visit(
        Overloaded{
            [](const family::Uniform01&) -> std::size_t { return 1; },
            [](const family::Exponential& f) -> std::size_t {
                if (!positive_finite(f.rate)) {
                    throw ParameterError(fmt::format("exponential rate must be positive, got {}", f.rate));
                }
                return 1;
            },
            [](const family::Weibull& f) -> std::size_t {
                if (!positive_finite(f.shape)) {
                    throw ParameterError(fmt::format("weibull shape must be positive, got {}", f.shape));
                }
                return 1;
            },
            [](const family::TukeyLambda& f) -> std::size_t {
                if (!std::isfinite(f.lambda)) {
                    throw ParameterError("tukey lambda must be finite");
                }
                return 1;
            },
            [](const family::Logistic&) -> std::size_t { return 1; },
            [](const family::Gaussian& f) -> std::size_t {
                if (f.mean.empty() || f.mean.size() != f.variance.size()) {
                    throw ParameterError("gaussian mean and variance must be non-empty and of equal length");
                }
                for (std::size_t i = 0; i < f.mean.size(); ++i) {
                    if (!std::isfinite(f.mean[i]) || !std::isfinite(f.variance[i]) || f.variance[i] < 0.0) {
                        throw ParameterError(fmt::format("invalid gaussian parameter at coordinate {}", i));
                    }
                }
                return f.mean.size();
            },
            [](const family::GaussianMixtureGx& f) -> std::size_t {
                if (!(std::abs(f.x) < 1.0)) {
                    throw ParameterError(fmt::format("mixture offset must satisfy |x| < 1, got {}", f.x));
                }
                if (f.dim == 0) {
                    throw ParameterError("mixture dimension must be positive");
                }
                return f.dim;
            },
            [](const family::LowRankGaussian& f) -> std::size_t {
                if (f.intrinsic_dim == 0 || f.intrinsic_dim > f.ambient_dim) {
                    throw ParameterError(fmt::format("need 1 <= d' <= d, got d'={} d={}", f.intrinsic_dim, f.ambient_dim));
                }
                return f.ambient_dim;
            },
            [](const family::SphereUniform& f) -> std::size_t {
                if (f.intrinsic_dim == 0 || f.intrinsic_dim > f.ambient_dim) {
                    throw ParameterError(fmt::format("need 1 <= d' <= d, got d'={} d={}", f.intrinsic_dim, f.ambient_dim));
                }
                return f.ambient_dim;
            },
            [](const family::TwoPoint& f) -> std::size_t {
                if (f.dim == 0) {
                    throw ParameterError("two-point dimension must be positive");
                }
                return f.dim;
            },
            [](const family::Dataset& f) -> std::size_t {
                if (!f.handle || f.handle->size() == 0) {
                    throw EmptyDatasetError("dataset has no rows");
                }
                return f.handle->dim();
            },
        },
        family);
}

}  // namespace

// ---- DatasetHandle ----------------------------------------------------------

DatasetHandle::DatasetHandle(std::size_t dim, std::vector<double> rows)
    : dim_(dim), rows_(std::move(rows)) {
    if (rows_.empty()) {
        throw EmptyDatasetError("dataset has no rows");
    }
    if (dim_ == 0 || rows_.size() % dim_ != 0) {
        throw ShapeError("dataset coordinates are not a multiple of the dimension");
    }
}

DatasetHandle parse_csv_dataset(std::string_view text) {
    std::vector<double> values;
    std::size_t dim = 0;
    bool first_row = true;
    std::size_t line_no = 0;

    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) {
            line.remove_prefix(3);
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        std::vector<double> row(fields.size());
        std::size_t parsed = 0;
        std::size_t first_bad = fields.size();
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (parse_number(fields[c], row[c])) {
                ++parsed;
            } else if (first_bad == fields.size()) {
                first_bad = c;
            }
        }
        if (first_row) {
            first_row = false;
            if (parsed == 0) {
                continue;  // header
            }
        }
        if (first_bad != fields.size()) {
            throw ParseError(fmt::format("row {}, column {}: '{}' is not a number", line_no,
                                         first_bad + 1, fields[first_bad]),
                             line_no, first_bad + 1);
        }
        if (dim == 0) {
            dim = fields.size();
        } else if (fields.size() != dim) {
            throw FormatError(fmt::format("row {} has {} fields, expected {}", line_no, fields.size(), dim),
                              line_no);
        }
        values.insert(values.end(), row.begin(), row.end());
    }
    if (values.empty()) {
        throw EmptyDatasetError("dataset has no rows");
    }
    return DatasetHandle(dim, std::move(values));
}

DatasetHandle load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    if (format != DatasetFormat::csv) {
        throw ParameterError("unsupported dataset format");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot open '{}'", path.string()));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        throw IoError(fmt::format("error reading '{}'", path.string()));
    }
    return parse_csv_dataset(buffer.str());
}

EmpiricalMeasure bootstrap_sample(const DatasetHandle& handle, std::size_t k, Stream& stream) {
    EmpiricalMeasure out(k, handle.dim());
    const std::uint64_t m = handle.size();
    for (std::size_t i = 0; i < k; ++i) {
        const auto src = handle.row(stream.below(m));
        std::copy(src.begin(), src.end(), out.point(i).begin());
    }
    return out;
}

// ---- MeasureSpec ------------------------------------------------------------

MeasureSpec::MeasureSpec(Family family) : family_(std::move(family)), dim_(validate(family_)) {}

double MeasureSpec::mixture_sigma(double x, std::size_t dim) {
    return std::sqrt((1.0 - x * x) / static_cast<double>(dim));
}

std::string MeasureSpec::name() const {
    return std::visit(
        Overloaded{
            [](const family::Uniform01&) { return std::string("uniform01"); },
            [](const family::Exponential& f) { return fmt::format("exponential(rate={})", f.rate); },
            [](const family::Weibull& f) { return fmt::format("weibull(shape={})", f.shape); },
            [](const family::TukeyLambda& f) { return fmt::format("tukey(lambda={})", f.lambda); },
            [](const family::Logistic&) { return std::string("logistic"); },
            [](const family::Gaussian& f) { return fmt::format("gaussian(dim={})", f.mean.size()); },
            [](const family::GaussianMixtureGx& f) { return fmt::format("gmm(x={},dim={})", f.x, f.dim); },
            [](const family::LowRankGaussian& f) {
                return fmt::format("lowrank(dprime={},d={})", f.intrinsic_dim, f.ambient_dim);
            },
            [](const family::SphereUniform& f) {
                return fmt::format("sphere(dprime={},d={})", f.intrinsic_dim, f.ambient_dim);
            },
            [](const family::TwoPoint& f) { return fmt::format("two-point(dim={})", f.dim); },
            [](const family::Dataset& f) {
                return fmt::format("dataset(m={},d={})", f.handle->size(), f.handle->dim());
            },
        },
        family_);
}

EmpiricalMeasure sample(const MeasureSpec& spec, std::size_t k, Stream& stream) {
    if (k == 0) {
        throw ParameterError("sample size k must be positive");
    }
    if (const auto* ds = std::get_if<family::Dataset>(&spec.family())) {
        return bootstrap_sample(*ds->handle, k, stream);
    }

    EmpiricalMeasure out(k, spec.dim());
    const std::size_t d = spec.dim();
    std::visit(
        Overloaded{
            [&](const family::Uniform01&) {
                for (double& v : out.coords()) {
                    v = stream.uniform();
                }
            },
            [&](const family::Exponential& f) {
                for (double& v : out.coords()) {
                    v = -std::log(stream.uniform_open()) / f.rate;
                }
            },
            [&](const family::Weibull& f) {
                for (double& v : out.coords()) {
                    v = std::pow(-std::log(stream.uniform_open()), 1.0 / f.shape);
                }
            },
            [&](const family::TukeyLambda& f) {
                for (double& v : out.coords()) {
                    v = tukey_quantile(f.lambda, stream.uniform_open());
                }
            },
            [&](const family::Logistic&) {
                for (double& v : out.coords()) {
                    v = tukey_quantile(0.0, stream.uniform_open());
                }
            },
            [&](const family::Gaussian& f) {
                for (std::size_t i = 0; i < k; ++i) {
                    auto p = out.point(i);
                    for (std::size_t c = 0; c < d; ++c) {
                        p[c] = f.mean[c] + std::sqrt(f.variance[c]) * stream.normal();
                    }
                }
            },
            [&](const family::GaussianMixtureGx& f) {
                const double sigma = MeasureSpec::mixture_sigma(f.x, f.dim);
                for (std::size_t i = 0; i < k; ++i) {
                    auto p = out.point(i);
                    const double centre = (stream() >> 63) != 0 ? f.x : -f.x;
                    for (std::size_t c = 0; c < d; ++c) {
                        p[c] = sigma * stream.normal();
                    }
                    p[0] += centre;
                }
            },
            [&](const family::LowRankGaussian& f) {
                const double scale = 1.0 / std::sqrt(static_cast<double>(f.intrinsic_dim));
                for (std::size_t i = 0; i < k; ++i) {
                    auto p = out.point(i);
                    for (std::size_t c = 0; c < f.intrinsic_dim; ++c) {
                        p[c] = scale * stream.normal();
                    }
                }
            },
            [&](const family::SphereUniform& f) {
                for (std::size_t i = 0; i < k; ++i) {
                    auto p = out.point(i);
                    double norm2 = 0.0;
                    while (norm2 == 0.0) {
                        for (std::size_t c = 0; c < f.intrinsic_dim; ++c) {
                            p[c] = stream.normal();
                            norm2 += p[c] * p[c];
                        }
                    }
                    const double inv = 1.0 / std::sqrt(norm2);
                    for (std::size_t c = 0; c < f.intrinsic_dim; ++c) {
                        p[c] *= inv;
                    }
                }
            },
            [&](const family::TwoPoint&) {
                for (std::size_t i = 0; i < k; ++i) {
                    out.point(i)[0] = (stream() >> 63) != 0 ? 0.5 : -0.5;
                }
            },
            [](const family::Dataset&) {},
        },
        spec.family());
    return out;
}

// ---- Quantile1D -------------------------------------------------------------

Quantile1D quantile1d(const MeasureSpec& spec) {
    return std::visit(
        Overloaded{
            [](const family::Uniform01&) {
                return Quantile1D{
                    [](double u) { return u; },
                    [](double x) { return std::clamp(x, 0.0, 1.0); },
                    [](double x) { return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0; },
                    [](double) { return 1.0; },
                    [](double log_u, double log_1mu) { return log_u + log_1mu; },
                };
            },
            [](const family::Exponential& f) {
                const double r = f.rate;
                return Quantile1D{
                    [r](double u) { return -std::log1p(-u) / r; },
                    [r](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-r * x); },
                    [r](double x) { return x < 0.0 ? 0.0 : r * std::exp(-r * x); },
                    [r](double u) { return 1.0 / (r * (1.0 - u)); },
                    [r](double log_u, double) { return log_u - std::log(r); },
                };
            },
            [](const family::Weibull& f) {
                const double a = f.shape;
                return Quantile1D{
                    [a](double u) { return std::pow(-std::log1p(-u), 1.0 / a); },
                    [a](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x, a)); },
                    [a](double x) {
                        if (x < 0.0) {
                            return 0.0;
                        }
                        if (x == 0.0) {
                            return a < 1.0 ? kInf : (a == 1.0 ? 1.0 : 0.0);
                        }
                        return a * std::pow(x, a - 1.0) * std::exp(-std::pow(x, a));
                    },
                    [a](double u) {
                        const double l = -std::log1p(-u);
                        return std::pow(l, 1.0 / a - 1.0) / (a * (1.0 - u));
                    },
                    [a](double log_u, double log_1mu) {
                        // log(-log(1 - u)); for tiny u, -log(1 - u) = u (1 + u/2 + ...)
                        // while log_1mu has already rounded to zero.
                        const double log_l = log_u < -30.0 ? log_u + 0.5 * std::exp(log_u) : std::log(-log_1mu);
                        return log_u + (1.0 / a - 1.0) * log_l - std::log(a);
                    },
                };
            },
            [](const family::TukeyLambda& f) {
                const double lam = f.lambda;
                return Quantile1D{
                    [lam](double u) { return tukey_quantile(lam, u); },
                    [lam](double x) { return tukey_cdf(lam, x); },
                    [lam](double x) {
                        const double u = tukey_cdf(lam, x);
                        if (u <= 0.0 || u >= 1.0) {
                            return 0.0;
                        }
                        return 1.0 / tukey_quantile_density(lam, u);
                    },
                    [lam](double u) { return tukey_quantile_density(lam, u); },
                    [lam](double log_u, double log_1mu) {
                        if (lam == 0.0) {
                            return 0.0;
                        }
                        return log_add_exp(lam * log_u + log_1mu, log_u + lam * log_1mu);
                    },
                };
            },
            [](const family::Logistic&) {
                return Quantile1D{
                    [](double u) { return tukey_quantile(0.0, u); },
                    [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                    [](double x) {
                        const double e = std::exp(-std::abs(x));
                        return e / ((1.0 + e) * (1.0 + e));
                    },
                    [](double u) { return 1.0 / (u * (1.0 - u)); },
                    [](double, double) { return 0.0; },
                };
            },
            [](const family::Gaussian& f) -> Quantile1D {
                if (f.mean.size() != 1) {
                    throw UnsupportedFamilyError("quantile evaluators exist only for one-dimensional gaussians");
                }
                const double mu = f.mean[0];
                const double s = std::sqrt(f.variance[0]);
                if (!(s > 0.0)) {
                    throw UnsupportedFamilyError("degenerate gaussian has no density");
                }
                return Quantile1D{
                    [mu, s](double u) { return mu + s * standard_normal_quantile(u); },
                    [mu, s](double x) {
                        return 0.5 * std::erfc(-(x - mu) / (s * std::numbers::sqrt2));
                    },
                    [mu, s](double x) {
                        const double z = (x - mu) / s;
                        return std::exp(-0.5 * z * z - kLogSqrt2Pi) / s;
                    },
                    [s](double u) {
                        const double z = standard_normal_quantile(u);
                        return s * std::exp(0.5 * z * z + kLogSqrt2Pi);
                    },
                    [s](double log_u, double log_1mu) {
                        // The smaller tail mass over the density at its quantile is the
                        // Mills ratio; past exp(-690) take it from the asymptotic series
                        // instead of cancelling two huge logarithms.
                        const double tail = std::min(log_u, log_1mu);
                        const double bulk = std::max(log_u, log_1mu);
                        const double z = lower_normal_quantile_from_log(tail);
                        const double log_mills = tail > -690.0 ? tail + 0.5 * z * z + kLogSqrt2Pi : log_mills_asymptotic(-z);
                        return bulk + log_mills + std::log(s);
                    },
                };
            },
            [&spec](const auto&) -> Quantile1D {
                throw UnsupportedFamilyError(
                    fmt::format("'{}' has no closed-form one-dimensional quantile", spec.name()));
            },
        },
        spec.family());
}

}  // namespace kvar

#pragma once

#include <concepts>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "kvar/empirical_measure.hpp"
#include "kvar/random.hpp"

namespace kvar {

/// A finite set of m points in R^d read from a file. m >= 1.
class DatasetHandle {
public:
    DatasetHandle(std::size_t dim, std::vector<double> rows);

    std::size_t size() const noexcept { return rows_.size() / dim_; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {rows_.data() + i * dim_, dim_};
    }
    std::span<const double> data() const noexcept { return rows_; }

private:
    std::size_t dim_;
    std::vector<double> rows_;
};

enum class DatasetFormat { csv };

/// Reads a numeric CSV file. A first row with no numeric field is a header
/// and is skipped; blank lines are ignored; CRLF line endings are accepted.
DatasetHandle load_dataset(const std::filesystem::path& path,
                           DatasetFormat format = DatasetFormat::csv);

/// Parses CSV text with the same rules as load_dataset.
DatasetHandle parse_csv_dataset(std::string_view text);

/// k rows drawn uniformly with replacement.
EmpiricalMeasure bootstrap_sample(const DatasetHandle& handle, std::size_t k, Stream& stream);

namespace family {

struct Uniform01 {};

struct Exponential {
    double rate = 1.0;
};

struct Weibull {
    double shape = 1.0;
};

struct TukeyLambda {
    double lambda = 0.0;
};

/// Standard logistic distribution.
struct Logistic {};

/// Gaussian with diagonal covariance.
struct Gaussian {
    std::vector<double> mean;
    std::vector<double> variance;
};

/// 0.5 N(-x e1, s^2 I) + 0.5 N(x e1, s^2 I) with s^2 = (1 - x^2) / dim, so the
/// total variance is exactly 1.
struct GaussianMixtureGx {
    double x = 0.0;
    std::size_t dim = 1;
};

/// N(0, diag(1/d', ..., 1/d', 0, ..., 0)) in R^d.
struct LowRankGaussian {
    std::size_t intrinsic_dim = 1;
    std::size_t ambient_dim = 1;
};

/// Uniform on the unit sphere S^{d'-1} spanned by the first d' axes of R^d.
struct SphereUniform {
    std::size_t intrinsic_dim = 1;
    std::size_t ambient_dim = 1;
};

/// Equal atoms at -0.5 e1 and +0.5 e1.
struct TwoPoint {
    std::size_t dim = 1;
};

/// The empirical distribution of a dataset, sampled by bootstrap.
struct Dataset {
    std::shared_ptr<const DatasetHandle> handle;
};

}  // namespace family

/// A named sampleable distribution. Parameters are validated on construction.
class MeasureSpec {
public:
    using Family = std::variant<family::Uniform01, family::Exponential, family::Weibull,
                                family::TukeyLambda, family::Logistic, family::Gaussian,
                                family::GaussianMixtureGx, family::LowRankGaussian,
                                family::SphereUniform, family::TwoPoint, family::Dataset>;

    /// Throws ParameterError for invalid parameters, EmptyDatasetError for a
    /// dataset family without rows.
    MeasureSpec(Family family);  // NOLINT(google-explicit-constructor)

    /// Lets a bare family struct convert in one step, e.g. in brace lists.
    template <class F>
        requires(!std::same_as<std::remove_cvref_t<F>, Family> &&
                 !std::same_as<std::remove_cvref_t<F>, MeasureSpec> && std::constructible_from<Family, F>)
    MeasureSpec(F&& f)  // NOLINT(google-explicit-constructor)
        : MeasureSpec(Family(std::forward<F>(f))) {}

    const Family& family() const noexcept { return family_; }
    std::size_t dim() const noexcept { return dim_; }
    /// Short human-readable name, e.g. "weibull(shape=4)".
    std::string name() const;

    /// Gaussian-mixture std for the given x and dimension.
    static double mixture_sigma(double x, std::size_t dim);

private:
    Family family_;
    std::size_t dim_;
};

/// k i.i.d. draws. Deterministic in (spec, k, stream state).
EmpiricalMeasure sample(const MeasureSpec& spec, std::size_t k, Stream& stream);

/// Closed-form evaluators of a one-dimensional distribution.
///
/// `log_weighted_quantile_density(log u, log(1-u))` returns
/// log(u (1-u) (F^-1)'(u)). Taking both logs as inputs keeps it accurate when
/// u or 1-u is far below machine epsilon, where the three factors are huge
/// or tiny but their product is not; integrators that reach deep into the
/// tails use it instead of `quantile_density`.
struct Quantile1D {
    std::function<double(double)> quantile;
    std::function<double(double)> cdf;
    std::function<double(double)> density;
    std::function<double(double)> quantile_density;
    std::function<double(double, double)> log_weighted_quantile_density;
};

/// Throws UnsupportedFamilyError for multi-dimensional or dataset families.
Quantile1D quantile1d(const MeasureSpec& spec);

}  // namespace kvar

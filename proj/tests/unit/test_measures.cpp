#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "kvar/error.hpp"
#include "kvar/measures.hpp"

namespace kvar {
namespace {

struct Moments {
    std::vector<double> mean;
    double total_variance = 0.0;
    double mean_sq_norm = 0.0;
};

Moments moments(const EmpiricalMeasure& m) {
    Moments out;
    out.mean.assign(m.dim(), 0.0);
    const auto n = static_cast<double>(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto p = m.point(i);
        for (std::size_t c = 0; c < m.dim(); ++c) {
            out.mean[c] += p[c] / n;
            out.mean_sq_norm += p[c] * p[c] / n;
        }
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto p = m.point(i);
        for (std::size_t c = 0; c < m.dim(); ++c) {
            const double dev = p[c] - out.mean[c];
            out.total_variance += dev * dev / (n - 1.0);
        }
    }
    return out;
}

TEST(Sample, TwoPointAtomsOnFirstAxis) {
    const MeasureSpec spec(family::TwoPoint{3});
    Stream s(11);
    const auto m = sample(spec, 4, s);
    ASSERT_EQ(m.size(), 4U);
    ASSERT_EQ(m.dim(), 3U);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(std::abs(m.point(i)[0]), 0.5);
        EXPECT_EQ(m.point(i)[1], 0.0);
        EXPECT_EQ(m.point(i)[2], 0.0);
    }
}

TEST(Sample, UniformMoments) {
    Stream s(2024);
    const auto m = sample(MeasureSpec(family::Uniform01{}), 1'000'000, s);
    const auto mo = moments(m);
    EXPECT_NEAR(mo.mean[0], 0.5, 0.002);
    EXPECT_NEAR(mo.total_variance, 1.0 / 12.0, 0.002);
}

TEST(Sample, MixtureHasUnitSecondMoment) {
    Stream s(5);
    const auto m = sample(MeasureSpec(family::GaussianMixtureGx{0.8, 5}), 1'000'000, s);
    EXPECT_NEAR(moments(m).mean_sq_norm, 1.0, 0.01);
}

TEST(Sample, MixtureTotalVarianceIsOneForEveryOffset) {
    for (double x : {0.0, 0.4, 0.8, 0.95}) {
        Stream s(77);
        const auto m = sample(MeasureSpec(family::GaussianMixtureGx{x, 3}), 1'000'000, s);
        EXPECT_NEAR(moments(m).total_variance, 1.0, 0.01) << "x=" << x;
    }
}

TEST(Sample, MixtureSigmaFormula) {
    EXPECT_DOUBLE_EQ(MeasureSpec::mixture_sigma(0.0, 4), 0.5);
    EXPECT_DOUBLE_EQ(MeasureSpec::mixture_sigma(0.6, 1), 0.8);
}

TEST(Sample, LowRankGaussianSupportAndVariance) {
    Stream s(8);
    const auto m = sample(MeasureSpec(family::LowRankGaussian{3, 8}), 1'000'000, s);
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t c = 3; c < 8; ++c) {
            ASSERT_EQ(m.point(i)[c], 0.0);
        }
    }
    EXPECT_NEAR(moments(m).total_variance, 1.0, 0.01);
}

TEST(Sample, SphereIsUnitNormAndPadded) {
    for (std::size_t dp : {1U, 2U, 7U, 12U}) {
        Stream s(dp);
        const auto m = sample(MeasureSpec(family::SphereUniform{dp, 12}), 2000, s);
        for (std::size_t i = 0; i < m.size(); ++i) {
            double norm2 = 0.0;
            for (std::size_t c = 0; c < 12; ++c) {
                norm2 += m.point(i)[c] * m.point(i)[c];
                if (c >= dp) {
                    ASSERT_EQ(m.point(i)[c], 0.0);
                }
            }
            ASSERT_NEAR(std::sqrt(norm2), 1.0, 1e-12);
        }
    }
}

TEST(Sample, DeterministicPerStreamState) {
    const MeasureSpec spec(family::GaussianMixtureGx{0.4, 4});
    Stream a(99);
    Stream b(99);
    Stream c(100);
    const auto ma = sample(spec, 50, a);
    EXPECT_EQ(ma, sample(spec, 50, b));
    EXPECT_NE(ma, sample(spec, 50, c));
}

TEST(Sample, DerivedStreamsAreIndependentOfCallOrder) {
    Stream first = Stream::derive(3, {10, 1});
    Stream other = Stream::derive(3, {10, 0});
    Stream again = Stream::derive(3, {10, 1});
    other();
    EXPECT_EQ(first(), again());
    EXPECT_NE(derive_seed(3, {10, 1}), derive_seed(3, {1, 10}));
}

TEST(Sample, ZeroSizeIsRejected) {
    Stream s(1);
    EXPECT_THROW(sample(MeasureSpec(family::Uniform01{}), 0, s), ParameterError);
}

TEST(MeasureSpec, RejectsInvalidParameters) {
    EXPECT_THROW(MeasureSpec(family::Exponential{0.0}), ParameterError);
    EXPECT_THROW(MeasureSpec(family::Exponential{-1.0}), ParameterError);
    EXPECT_THROW(MeasureSpec(family::Weibull{0.0}), ParameterError);
    EXPECT_THROW(MeasureSpec(family::GaussianMixtureGx{1.0, 3}), ParameterError);
    EXPECT_THROW(MeasureSpec(family::GaussianMixtureGx{-1.2, 3}), ParameterError);
    EXPECT_THROW(MeasureSpec(family::LowRankGaussian{5, 4}), ParameterError);
    EXPECT_THROW(MeasureSpec(family::SphereUniform{0, 4}), ParameterError);
    EXPECT_THROW(MeasureSpec(family::TwoPoint{0}), ParameterError);
    EXPECT_THROW(MeasureSpec(family::Gaussian{{0.0}, {-1.0}}), ParameterError);
    EXPECT_THROW(MeasureSpec(family::Gaussian{{0.0, 1.0}, {1.0}}), ParameterError);
    EXPECT_THROW(MeasureSpec(family::Dataset{nullptr}), EmptyDatasetError);
}

TEST(MeasureSpec, DimensionFollowsFamily) {
    EXPECT_EQ(MeasureSpec(family::Uniform01{}).dim(), 1U);
    EXPECT_EQ(MeasureSpec(family::LowRankGaussian{6, 200}).dim(), 200U);
    EXPECT_EQ(MeasureSpec(family::Gaussian{{0.0, 0.0}, {1.0, 2.0}}).dim(), 2U);
}

// ---- Quantile evaluators ---------------------------------------------------

TEST(Quantile1D, ClosedFormExamples) {
    EXPECT_DOUBLE_EQ(quantile1d(MeasureSpec(family::Uniform01{})).quantile(0.25), 0.25);
    EXPECT_NEAR(quantile1d(MeasureSpec(family::Exponential{1.0})).quantile(1.0 - std::exp(-1.0)), 1.0, 1e-12);
    const auto tukey2 = quantile1d(MeasureSpec(family::TukeyLambda{2.0}));
    EXPECT_NEAR(tukey2.quantile(0.75), 0.25, 1e-15);
    for (double u : {0.1, 0.3, 0.9}) {
        EXPECT_NEAR(tukey2.quantile(u), u - 0.5, 1e-15);
    }
}

TEST(Quantile1D, TukeyZeroIsLogistic) {
    const auto tukey0 = quantile1d(MeasureSpec(family::TukeyLambda{0.0}));
    const auto logistic = quantile1d(MeasureSpec(family::Logistic{}));
    for (double u : {0.01, 0.2, 0.5, 0.77, 0.999}) {
        EXPECT_DOUBLE_EQ(tukey0.quantile(u), std::log(u / (1.0 - u)));
        EXPECT_DOUBLE_EQ(tukey0.quantile(u), logistic.quantile(u));
    }
}

TEST(Quantile1D, RoundTripInvariantsForEveryFamily) {
    const std::vector<MeasureSpec> specs = {
        MeasureSpec(family::Uniform01{}),         MeasureSpec(family::Exponential{1.0}),   MeasureSpec(family::Exponential{2.5}),
        MeasureSpec(family::Weibull{0.7}),        MeasureSpec(family::Weibull{1.0}),       MeasureSpec(family::Weibull{4.0}),
        MeasureSpec(family::TukeyLambda{-0.5}),   MeasureSpec(family::TukeyLambda{0.0}),   MeasureSpec(family::TukeyLambda{0.5}),
        MeasureSpec(family::TukeyLambda{2.0}),    MeasureSpec(family::TukeyLambda{3.0}),   MeasureSpec(family::Logistic{}),
        MeasureSpec(family::Gaussian{{1.5}, {4.0}}),
    };
    for (const auto& spec : specs) {
        const auto q = quantile1d(spec);
        for (double u = 0.001; u < 0.999; u += 0.001) {
            const double x = q.quantile(u);
            ASSERT_NEAR(q.cdf(x), u, 1e-9) << spec.name() << " u=" << u;
            ASSERT_NEAR(q.quantile_density(u) * q.density(x), 1.0, 1e-9) << spec.name() << " u=" << u;
            ASSERT_NEAR(q.log_weighted_quantile_density(std::log(u), std::log1p(-u)),
                        std::log(u * (1.0 - u) * q.quantile_density(u)), 1e-9)
                << spec.name() << " u=" << u;
        }
    }
}

TEST(Quantile1D, WeightedQuantileDensityInDeepTails) {
    const auto weibull = quantile1d(MeasureSpec(family::Weibull{4.0}));
    // 1 - u = exp(-1e6): far beyond double resolution in u.
    EXPECT_NEAR(weibull.log_weighted_quantile_density(-std::exp(-1e6), -1e6), -0.75 * std::log(1e6) - std::log(4.0),
                1e-12);
    // u = exp(-1e6) on the left: u (1-u) q'(u) ~ u^(1/4) / 4.
    EXPECT_NEAR(weibull.log_weighted_quantile_density(-1e6, -std::exp(-1e6)), 0.25 * -1e6 - std::log(4.0), 1e-6);

    const auto gauss = quantile1d(MeasureSpec(family::Gaussian{{0.0}, {1.0}}));
    const double deep = gauss.log_weighted_quantile_density(-1e5, -std::exp(-1e5));
    EXPECT_NEAR(deep, -0.5 * std::log(2e5), 1e-3);
    // The two tail branches meet smoothly.
    EXPECT_NEAR(gauss.log_weighted_quantile_density(-689.9999999, 0.0), gauss.log_weighted_quantile_density(-690.0000001, 0.0),
                1e-9);
}

TEST(Quantile1D, UnsupportedFamilies) {
    EXPECT_THROW(quantile1d(MeasureSpec(family::GaussianMixtureGx{0.5, 1})), UnsupportedFamilyError);
    EXPECT_THROW(quantile1d(MeasureSpec(family::Gaussian{{0.0, 0.0}, {1.0, 1.0}})), UnsupportedFamilyError);
    EXPECT_THROW(quantile1d(MeasureSpec(family::TwoPoint{1})), UnsupportedFamilyError);
    auto handle = std::make_shared<const DatasetHandle>(parse_csv_dataset("1\n2\n"));
    EXPECT_THROW(quantile1d(MeasureSpec(family::Dataset{handle})), UnsupportedFamilyError);
}

// ---- Datasets --------------------------------------------------------------

TEST(Dataset, ParsesRowsInOrder) {
    const auto h = parse_csv_dataset("1,2\n3,4");
    EXPECT_EQ(h.size(), 2U);
    EXPECT_EQ(h.dim(), 2U);
    EXPECT_EQ(std::vector<double>(h.row(0).begin(), h.row(0).end()), (std::vector<double>{1, 2}));
    EXPECT_EQ(std::vector<double>(h.row(1).begin(), h.row(1).end()), (std::vector<double>{3, 4}));
}

TEST(Dataset, SkipsHeaderAndAcceptsCrlf) {
    const auto h = parse_csv_dataset("x,y\r\n1.5, -2e-3\r\n\r\n+3,4\r\n");
    EXPECT_EQ(h.size(), 2U);
    EXPECT_EQ(h.row(0)[1], -2e-3);
    EXPECT_EQ(h.row(1)[0], 3.0);
}

TEST(Dataset, EmptyInputs) {
    EXPECT_THROW(parse_csv_dataset(""), EmptyDatasetError);
    EXPECT_THROW(parse_csv_dataset("a,b\n"), EmptyDatasetError);
    EXPECT_THROW(parse_csv_dataset("\n\n"), EmptyDatasetError);
}

TEST(Dataset, RaggedRowNamesRow) {
    try {
        parse_csv_dataset("1,2\n3");
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_EQ(e.row(), 2U);
        EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
    }
}

TEST(Dataset, NonNumericFieldNamesLocation) {
    try {
        parse_csv_dataset("1,2\n3,abc\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 2U);
        EXPECT_EQ(e.column(), 2U);
    }
}

TEST(Dataset, MissingFileIsIoError) {
    EXPECT_THROW(load_dataset("/nonexistent/definitely/missing.csv"), IoError);
}

TEST(Bootstrap, SingleRowIsRepeated) {
    const auto h = parse_csv_dataset("7,-1\n");
    Stream s(3);
    const auto m = bootstrap_sample(h, 5, s);
    ASSERT_EQ(m.size(), 5U);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(m.point(i)[0], 7.0);
        EXPECT_EQ(m.point(i)[1], -1.0);
    }
}

TEST(Bootstrap, RowsAreEquallyLikely) {
    const auto h = parse_csv_dataset("0\n1\n");
    Stream s(12);
    const auto m = bootstrap_sample(h, 100'000, s);
    double ones = 0.0;
    for (double v : m.coords()) {
        ones += v;
    }
    EXPECT_NEAR(ones / 100'000.0, 0.5, 0.01);
}

TEST(Bootstrap, DeterministicPerSeed) {
    const auto h = parse_csv_dataset("1\n2\n3\n4\n5\n");
    Stream a(4);
    Stream b(4);
    EXPECT_EQ(bootstrap_sample(h, 3, a), bootstrap_sample(h, 3, b));
}

}  // namespace
}  // namespace kvar

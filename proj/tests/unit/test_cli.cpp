#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "kvar/error.hpp"
#include "kvar_cli/cli.hpp"

namespace kvar::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
    std::ifstream file(path);
    std::stringstream ss;
    ss << file.rdbuf();
    return ss.str();
}

// Drops the trailing timing column from every line of a sweep CSV.
std::string without_elapsed(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::string out;
    while (std::getline(in, line)) {
        out += line.substr(0, line.rfind(',')) + '\n';
    }
    return out;
}

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("kvar_cli_test_" + std::to_string(std::rand()) + "_" + std::to_string(counter_++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

TEST(KGrid, GeometricAndArithmetic) {
    EXPECT_EQ(parse_k_grid("1:16:x2"), (std::vector<std::size_t>{1, 2, 4, 8, 16}));
    EXPECT_EQ(parse_k_grid("3:30:x3"), (std::vector<std::size_t>{3, 9, 27}));
    EXPECT_EQ(parse_k_grid("2:11:+3"), (std::vector<std::size_t>{2, 5, 8, 11}));
    EXPECT_EQ(parse_k_grid("7:7:x2"), (std::vector<std::size_t>{7}));
    EXPECT_EQ(parse_k_grid("1,10,100"), (std::vector<std::size_t>{1, 10, 100}));
    EXPECT_EQ(parse_k_grid("42"), (std::vector<std::size_t>{42}));
}

TEST(KGrid, Rejects) {
    for (const char* bad : {"", "0:4:x2", "4:2:x2", "1:8:x1", "1:8:+0", "1:8:y2", "1:8", "3,2", "1,1", "a,b",
                            "1:8:x", "-1,2", "0"}) {
        EXPECT_THROW(parse_k_grid(bad), ParameterError) << bad;
    }
}

TEST(FormatDouble, RoundTrips) {
    for (double v : {0.0, 1.0 / 3.0, 10.0 / 66.0, 1e-300, 6.02214076e23, -2.5, 0.1}) {
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
    EXPECT_EQ(format_double(10.0 / 66.0), "0.15151515151515152");
    EXPECT_EQ(format_double(1.0 / 0.0), "infinite");
}

TEST(ExitCodes, HelpIsSuccess) {
    const auto r = invoke({"--help"});
    EXPECT_EQ(r.code, kOk);
    EXPECT_NE(r.out.find("estimate"), std::string::npos);
}

TEST(ExitCodes, UsageErrors) {
    EXPECT_EQ(invoke({}).code, kUsage);
    EXPECT_EQ(invoke({"bogus"}).code, kUsage);
    EXPECT_EQ(invoke({"estimate", "--family", "uniform01", "--k", "3"}).code, kUsage);
    EXPECT_EQ(invoke({"estimate", "--family", "weibull", "--k", "3", "--n", "5"}).code, kUsage);
    EXPECT_EQ(invoke({"estimate", "--family", "nope", "--k", "3", "--n", "5"}).code, kUsage);
    EXPECT_EQ(invoke({"estimate", "--k", "3", "--n", "5"}).code, kUsage);
    EXPECT_EQ(invoke({"estimate", "--family", "uniform01", "--k", "0", "--n", "5"}).code, kUsage);
    EXPECT_EQ(invoke({"closed-form", "weibull-inf", "--alpha", "-1"}).code, kUsage);
    EXPECT_EQ(invoke({"closed-form", "taylor", "--family", "gaussian", "--dim", "2", "--k", "3"}).code, kUsage);
    EXPECT_EQ(invoke({"sweep", "gmm", "--d", "2", "--x", "0.5", "--kgrid", "4:2:x2", "--n", "3"}).code, kUsage);
}

TEST(ExitCodes, IoErrors) {
    TempDir dir;
    EXPECT_EQ(invoke({"estimate", "--dataset", dir / "missing.csv", "--k", "2", "--n", "3"}).code, kIo);
    EXPECT_EQ(invoke({"replay", dir / "missing.json"}).code, kIo);
    EXPECT_EQ(invoke({"estimate", "--config", dir / "missing.toml"}).code, kIo);
    {
        std::ofstream(dir / "empty.csv") << "";
        std::ofstream(dir / "bad.json") << "{ not json";
        std::ofstream(dir / "incomplete.json") << R"({"command": "estimate"})";
    }
    EXPECT_EQ(invoke({"estimate", "--dataset", dir / "empty.csv", "--k", "2", "--n", "3"}).code, kIo);
    EXPECT_EQ(invoke({"replay", dir / "bad.json"}).code, kIo);
    EXPECT_EQ(invoke({"replay", dir / "incomplete.json"}).code, kIo);
}

TEST(ClosedForm, PrintsValues) {
    EXPECT_EQ(invoke({"closed-form", "uniform", "--k", "10"}).out, "0.15151515151515152\n");
    EXPECT_EQ(invoke({"closed-form", "exponential", "--k", "1"}).out, "1\n");
    EXPECT_EQ(invoke({"closed-form", "exponential", "--k", "2", "--rate", "2"}).out, "0.375\n");
    EXPECT_EQ(invoke({"closed-form", "weibull-inf", "--alpha", "1"}).out, "infinite\n");
    EXPECT_NEAR(std::stod(invoke({"closed-form", "rho", "--k", "8", "--d", "3"}).out), 4.0, 1e-14);
    const auto tukey = invoke({"closed-form", "tukey-inf", "--lambda", "1"});
    EXPECT_EQ(tukey.out, "0.33333333333333331\n");
    EXPECT_NE(tukey.err.find("bound"), std::string::npos);
    EXPECT_NEAR(std::stod(invoke({"closed-form", "varinf-integral", "--family", "uniform01"}).out), 1.0 / 6.0, 1e-14);
}

TEST(Estimate, CsvShape) {
    const auto r = invoke({"estimate", "--family", "two-point", "--d", "3", "--k", "4", "--n", "200", "--seed", "5",
                           "--radius", "1"});
    ASSERT_EQ(r.code, kOk) << r.err;
    std::istringstream in(r.out);
    std::string header;
    std::string row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "k,d,n,estimate,stderr,mcdiarmid_radius");
    EXPECT_EQ(row.substr(0, 8), "4,3,200,");
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 5);
}

TEST(Estimate, ThreadCountDoesNotChangeOutput) {
    const std::vector<std::string> base = {"estimate", "--family", "gmm", "--x", "0.7", "--d", "4",
                                           "--k", "16", "--n", "64", "--seed", "11"};
    auto one = base;
    one.insert(one.end(), {"--threads", "1"});
    auto many = base;
    many.insert(many.end(), {"--threads", "8"});
    EXPECT_EQ(invoke(one).out, invoke(many).out);
    EXPECT_EQ(invoke({"closed-form", "uniform", "--k", "3", "--threads", "8"}).out, "0.125\n");
}

TEST(Estimate, OutputFileAndManifestReplay) {
    TempDir dir;
    const std::string csv = dir / "est.csv";
    const auto r = invoke({"estimate", "--family", "exponential", "--rate", "3", "--k", "5", "--n", "100",
                           "--seed", "9", "--output", csv});
    ASSERT_EQ(r.code, kOk) << r.err;
    EXPECT_TRUE(r.out.empty());
    const RunManifest m = read_manifest(csv + ".manifest.json");
    EXPECT_EQ(m.command, "estimate");
    EXPECT_EQ(m.master_seed, 9U);
    EXPECT_EQ(m.parameters.at("rate"), "3");
    const std::string first = slurp(csv);
    fs::remove(csv);
    ASSERT_EQ(invoke({"replay", csv + ".manifest.json"}).code, kOk);
    EXPECT_EQ(slurp(csv), first);
}

TEST(Config, FileValuesAndFlagOverrides) {
    TempDir dir;
    std::ofstream(dir / "run.toml") << "family = \"exponential\"\nrate = 2\nk = 3\nn = 50\nseed = 4\n";
    const auto from_file = invoke({"estimate", "--config", dir / "run.toml"});
    const auto explicit_args =
        invoke({"estimate", "--family", "exponential", "--rate", "2", "--k", "3", "--n", "50", "--seed", "4"});
    ASSERT_EQ(from_file.code, kOk) << from_file.err;
    EXPECT_EQ(from_file.out, explicit_args.out);

    const auto overridden = invoke({"estimate", "--config", dir / "run.toml", "--k", "1"});
    ASSERT_EQ(overridden.code, kOk);
    EXPECT_EQ(overridden.out.substr(overridden.out.find('\n') + 1, 2), "1,");
}

TEST(Config, ListValuesAndFlags) {
    const TempDir dir;
    const std::string file = dir / "sweep.toml";
    std::ofstream(file) << "d = 3\nx = [0.0, 0.9]\nkgrid = \"1:4:x2\"\nn = 5\nfit = false\nout-dir = \""
                        << dir.path().string() << "\"\n";
    const auto args = merge_config({"sweep", "gmm", "--config", file}, {"fit"});
    EXPECT_NE(std::find(args.begin(), args.end(), "0.0,0.9"), args.end());
    EXPECT_EQ(std::find(args.begin(), args.end(), "--fit"), args.end());
    const auto r = invoke({"sweep", "gmm", "--config", file});
    ASSERT_EQ(r.code, kOk) << r.err;
    EXPECT_TRUE(fs::exists(dir.path() / "gmm_d3_x0.csv"));
    EXPECT_TRUE(fs::exists(dir.path() / "gmm_d3_x0.9.csv"));
}

TEST(Sweep, WritesCurvesManifestAndReplays) {
    TempDir dir;
    const std::string out = dir / "a";
    const auto r = invoke({"sweep", "lowdim", "--d", "6", "--dprime", "1,3", "--kgrid", "8:64:x2", "--n", "10",
                           "--seed", "2", "--out-dir", out, "--fit", "--fit-kmin", "8"});
    ASSERT_EQ(r.code, kOk) << r.err;
    EXPECT_NE(r.out.find("lowdim_d6_dprime1: slope="), std::string::npos);
    const std::string csv = slurp(fs::path(out) / "lowdim_d6_dprime3.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "label,k,estimate,stderr,n,elapsed_seconds");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);

    const RunManifest m = read_manifest(fs::path(out) / "manifest.json");
    EXPECT_EQ(m.command, "sweep lowdim");
    EXPECT_EQ(m.outputs.size(), 3U);

    const std::string again = dir / "b";
    ASSERT_EQ(invoke({"replay", (fs::path(out) / "manifest.json").string(), "--out-dir", again, "--threads", "3"})
                  .code,
              kOk);
    EXPECT_EQ(without_elapsed(slurp(fs::path(again) / "lowdim_d6_dprime3.csv")), without_elapsed(csv));
}

TEST(Sweep, DatasetLabelFromStem) {
    TempDir dir;
    std::ofstream(dir / "points.csv") << "a,b\n0,0\n1,0\n0,1\n1,1\n";
    const auto r = invoke({"sweep", "dataset", "--path", dir / "points.csv", "--kgrid", "1,2", "--n", "20",
                           "--out-dir", dir.path().string()});
    ASSERT_EQ(r.code, kOk) << r.err;
    EXPECT_TRUE(fs::exists(dir.path() / "points.csv"));
    const std::string csv = slurp(dir.path() / "points.csv");
    EXPECT_EQ(csv.substr(0, 6), "label,");
}

TEST(Binary, RunsAsProcess) {
    const std::string cmd = std::string(KVAR_CLI_PATH) + " closed-form uniform --k 1 > /dev/null";
    EXPECT_EQ(std::system(cmd.c_str()), 0);
}

}  // namespace
}  // namespace kvar::cli

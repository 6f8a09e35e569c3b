#include "kvar_cli/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "kvar/kvar.hpp"

#ifndef KVAR_VERSION
#define KVAR_VERSION "0.0.0"
#endif

namespace kvar::cli {

namespace fs = std::filesystem;

// ---- Small helpers ------------------------------------------------------------

std::string format_double(double value) {
    if (std::isinf(value)) {
        return value > 0 ? "infinite" : "-infinite";
    }
    return fmt::format("{:.17g}", value);
}

namespace {

std::size_t parse_count(std::string_view text, std::string_view what) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParameterError(fmt::format("invalid {} '{}' in k grid", what, text));
    }
    return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

std::string sanitize_label(std::string_view text) {
    std::string out;
    for (char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        out.push_back(std::isalnum(uc) || c == '-' || c == '.' || c == '_' ? c : '_');
    }
    return out.empty() ? std::string("curve") : out;
}

}  // namespace

std::vector<std::size_t> parse_k_grid(std::string_view text) {
    std::vector<std::size_t> grid;
    const auto parts = split(text, ':');
    if (parts.size() == 3) {
        const std::size_t first = parse_count(parts[0], "start");
        const std::size_t last = parse_count(parts[1], "end");
        const std::string_view step = parts[2];
        if (first == 0 || last < first || step.size() < 2) {
            throw ParameterError(fmt::format("k grid '{}' needs 1 <= a <= b and a step like x2 or +4", text));
        }
        const std::size_t amount = parse_count(step.substr(1), "step");
        if (step[0] == 'x') {
            if (amount < 2) {
                throw ParameterError("geometric k grid factor must be at least 2");
            }
            for (std::size_t k = first; k <= last; k *= amount) {
                grid.push_back(k);
                if (k > last / amount) {
                    break;
                }
            }
        } else if (step[0] == '+') {
            if (amount == 0) {
                throw ParameterError("arithmetic k grid step must be positive");
            }
            for (std::size_t k = first; k <= last; k += amount) {
                grid.push_back(k);
            }
        } else {
            throw ParameterError(fmt::format("unknown k grid step '{}'", step));
        }
        return grid;
    }
    if (parts.size() != 1) {
        throw ParameterError(fmt::format("cannot parse k grid '{}'", text));
    }
    for (std::string_view item : split(text, ',')) {
        grid.push_back(parse_count(item, "value"));
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] == 0 || (i > 0 && grid[i] <= grid[i - 1])) {
            throw ParameterError(fmt::format("k grid '{}' must be positive and strictly ascending", text));
        }
    }
    return grid;
}

std::vector<std::string> merge_config(const std::vector<std::string>& args, const std::vector<std::string>& flags) {
    std::vector<std::string> out;
    std::optional<std::string> config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) {
                throw ParameterError("--config needs a file path");
            }
            config_path = args[++i];
        } else if (args[i].starts_with("--config=")) {
            config_path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (!config_path) {
        return out;
    }
    std::ifstream file(*config_path);
    if (!file) {
        throw IoError(fmt::format("cannot open config file '{}'", *config_path));
    }
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigTOML().from_config(file);
    } catch (const CLI::Error& e) {
        throw ParameterError(fmt::format("config file '{}': {}", *config_path, e.what()));
    }
    const auto present = [&out](const std::string& flag) {
        return std::any_of(out.begin(), out.end(), [&](const std::string& a) {
            return a == flag || a.starts_with(flag + "=");
        });
    };
    for (const CLI::ConfigItem& item : items) {
        const std::string flag = "--" + item.name;
        if (item.name.empty() || present(flag)) {
            continue;
        }
        std::string value;
        for (std::size_t i = 0; i < item.inputs.size(); ++i) {
            value += (i > 0 ? "," : "") + item.inputs[i];
        }
        if (std::find(flags.begin(), flags.end(), item.name) != flags.end()) {
            if (value == "true" || value == "1" || value == "yes" || value == "on") {
                out.push_back(flag);
            }
            continue;
        }
        out.push_back(flag);
        out.push_back(value);
    }
    return out;
}

namespace {

// ---- Measure selection ----------------------------------------------------

constexpr const char* kFamilies =
    "uniform01, exponential, weibull, tukey, logistic, gaussian, gmm, lowrank, sphere, two-point";

struct FamilyArgs {
    std::string family;
    std::optional<double> rate;
    std::optional<double> shape;
    std::optional<double> lambda;
    std::optional<double> x;
    double mean = 0.0;
    double variance = 1.0;
    std::size_t dim = 1;
    std::optional<std::size_t> dprime;
};

void add_family_options(CLI::App& app, FamilyArgs& a, bool required) {
    auto* fam = app.add_option("--family", a.family, std::string("Measure family: ") + kFamilies);
    if (required) {
        fam->required();
    }
    app.add_option("--rate", a.rate, "Exponential rate");
    app.add_option("--shape,--alpha", a.shape, "Weibull shape");
    app.add_option("--lambda", a.lambda, "Tukey lambda");
    app.add_option("--x", a.x, "Gaussian-mixture offset, |x| < 1");
    app.add_option("--mean", a.mean, "Gaussian mean of every coordinate")->capture_default_str();
    app.add_option("--variance", a.variance, "Gaussian variance of every coordinate")->capture_default_str();
    app.add_option("--dim,--d", a.dim, "Ambient dimension")->capture_default_str();
    app.add_option("--dprime", a.dprime, "Intrinsic dimension (lowrank, sphere)");
}

template <class T>
T need(const std::optional<T>& v, std::string_view family, std::string_view flag) {
    if (!v) {
        throw ParameterError(fmt::format("family '{}' needs {}", family, flag));
    }
    return *v;
}

MeasureSpec make_spec(const FamilyArgs& a) {
    const std::string& f = a.family;
    if (f == "uniform01" || f == "uniform") {
        return family::Uniform01{};
    }
    if (f == "exponential") {
        return family::Exponential{a.rate.value_or(1.0)};
    }
    if (f == "weibull") {
        return family::Weibull{need(a.shape, f, "--shape")};
    }
    if (f == "tukey") {
        return family::TukeyLambda{need(a.lambda, f, "--lambda")};
    }
    if (f == "logistic") {
        return family::Logistic{};
    }
    if (f == "gaussian") {
        return family::Gaussian{std::vector<double>(a.dim, a.mean), std::vector<double>(a.dim, a.variance)};
    }
    if (f == "gmm") {
        return family::GaussianMixtureGx{need(a.x, f, "--x"), a.dim};
    }
    if (f == "lowrank") {
        return family::LowRankGaussian{need(a.dprime, f, "--dprime"), a.dim};
    }
    if (f == "sphere") {
        return family::SphereUniform{need(a.dprime, f, "--dprime"), a.dim};
    }
    if (f == "two-point") {
        return family::TwoPoint{a.dim};
    }
    throw ParameterError(fmt::format("unknown family '{}'; expected one of {}", f, kFamilies));
}

MeasureSpec dataset_spec(const std::string& path) {
    return family::Dataset{std::make_shared<const DatasetHandle>(load_dataset(path))};
}

// ---- Output -----------------------------------------------------------------

class OutputFile {
public:
    explicit OutputFile(const fs::path& path) : path_(path), file_(path) {
        if (!file_) {
            throw IoError(fmt::format("cannot write '{}'", path.string()));
        }
    }
    std::ostream& stream() { return file_; }
    void close() {
        file_.close();
        if (!file_) {
            throw IoError(fmt::format("failed writing '{}'", path_.string()));
        }
    }

private:
    fs::path path_;
    std::ofstream file_;
};

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError(fmt::format("cannot create output directory '{}'", dir.string()));
    }
}

void write_sweep_csv(std::ostream& os, const Sweep& sweep) {
    os << "label,k,estimate,stderr,n,elapsed_seconds\n";
    for (const SweepRecord& r : sweep.records) {
        os << fmt::format("{},{},{},{},{},{:.6f}\n", sweep.label, r.k, format_double(r.estimate),
                          format_double(r.std_error), r.n, r.elapsed_seconds);
    }
}

void print_fit(std::ostream& out, std::ostream& err, const std::string& label, const std::optional<SlopeFit>& fit,
               std::size_t k_min) {
    if (!fit) {
        err << fmt::format("{}: not enough positive points with k >= {} for a slope fit\n", label, k_min);
        return;
    }
    if (fit->filtered > 0) {
        err << fmt::format("warning: {}: dropped {} non-positive estimates from the fit\n", label, fit->filtered);
    }
    out << fmt::format("{}: slope={} intercept={} r2={} k={}..{} points={}\n", label, format_double(fit->slope),
                       format_double(fit->intercept), format_double(fit->r_squared), fit->k_min, fit->k_max,
                       fit->points);
}

std::optional<SlopeFit> try_fit(const std::vector<SweepRecord>& records, std::size_t k_min) {
    try {
        return fit_loglog_slope(records, k_min);
    } catch (const InsufficientDataError&) {
        return std::nullopt;
    }
}

// ---- Manifest capture -------------------------------------------------------

// Chain of selected subcommands below `app`, outermost first.
std::vector<const CLI::App*> selected_chain(const CLI::App& app) {
    std::vector<const CLI::App*> chain;
    const CLI::App* current = &app;
    for (;;) {
        const auto subs = current->get_subcommands();
        if (subs.empty()) {
            return chain;
        }
        current = subs.front();
        chain.push_back(current);
    }
}

// Canonical argument list and parameter map for the selected command. Every
// option is written out, defaults included, so a replay does not depend on
// the defaults of a later version.
void describe_command(const CLI::App& app, RunManifest& m) {
    const auto chain = selected_chain(app);
    std::string command;
    for (const CLI::App* sub : chain) {
        m.arguments.push_back(sub->get_name());
        command += (command.empty() ? "" : " ") + sub->get_name();
    }
    m.command = command;
    if (chain.empty()) {
        return;
    }
    for (const CLI::Option* opt : chain.back()->get_options()) {
        const auto& lnames = opt->get_lnames();
        if (lnames.empty() || lnames.front() == "help" || lnames.front() == "threads") {
            continue;
        }
        const std::string flag = "--" + lnames.front();
        if (opt->get_type_size_max() == 0 || opt->get_items_expected_max() == 0) {
            if (opt->count() > 0) {
                m.arguments.push_back(flag);
                m.parameters[lnames.front()] = true;
            }
            continue;
        }
        std::string value;
        if (opt->count() > 0) {
            const auto& results = opt->results();
            for (std::size_t i = 0; i < results.size(); ++i) {
                value += (i > 0 ? "," : "") + results[i];
            }
        } else {
            value = opt->get_default_str();
        }
        if (value.empty()) {
            continue;
        }
        m.arguments.push_back(flag);
        m.arguments.push_back(value);
        m.parameters[lnames.front()] = value;
    }
}

// ---- Commands -------------------------------------------------------------

struct Context {
    std::ostream& out;
    std::ostream& err;
    const CLI::App& root;
    unsigned threads = 0;
};

struct EstimateArgs {
    FamilyArgs fam;
    std::string dataset;
    std::size_t k = 0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::optional<double> radius;
    std::string output;
    std::string manifest;
};

void cmd_estimate(const EstimateArgs& a, Context& ctx) {
    RunManifest manifest;
    manifest.started_at = utc_timestamp();
    const MeasureSpec spec = a.dataset.empty() ? make_spec(a.fam) : dataset_spec(a.dataset);
    EstimateOptions options;
    options.k = a.k;
    options.trials = a.n;
    options.master_seed = a.seed;
    options.threads = ctx.threads;
    options.support_radius = a.radius;
    const KVarEstimate est = estimate_kvar(spec, options);

    std::ostringstream csv;
    csv << "k,d,n,estimate,stderr,mcdiarmid_radius\n";
    csv << fmt::format("{},{},{},{},{},{}\n", est.k, est.d, est.trials, format_double(est.estimate),
                       format_double(est.std_error),
                       est.concentration ? format_double(est.concentration->radius) : std::string{});
    if (a.output.empty()) {
        ctx.out << csv.str();
    } else {
        OutputFile file(a.output);
        file.stream() << csv.str();
        file.close();
        manifest.outputs.push_back(a.output);
    }
    if (!a.manifest.empty() || !a.output.empty()) {
        describe_command(ctx.root, manifest);
        manifest.master_seed = a.seed;
        manifest.version = KVAR_VERSION;
        write_manifest(manifest, a.manifest.empty() ? a.output + ".manifest.json" : a.manifest);
    }
}

struct SweepArgs {
    std::string kgrid;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    bool fit = false;
    std::size_t fit_kmin = 32;
    // gmm / lowdim / sphere
    std::size_t d = 0;
    std::vector<double> xs;
    std::vector<std::size_t> dprimes;
    // dataset / family
    std::string path;
    std::string label;
    FamilyArgs fam;
};

void finish_sweep(const std::vector<FittedSweep>& curves, const SweepArgs& a, Context& ctx) {
    RunManifest manifest;
    manifest.started_at = utc_timestamp();
    const fs::path dir(a.out_dir);
    ensure_directory(dir);
    for (const FittedSweep& curve : curves) {
        const fs::path path = dir / (sanitize_label(curve.sweep.label) + ".csv");
        OutputFile file(path);
        write_sweep_csv(file.stream(), curve.sweep);
        file.close();
        manifest.outputs.push_back(path.string());
        if (a.fit) {
            print_fit(ctx.out, ctx.err, curve.sweep.label, curve.fit, a.fit_kmin);
        }
    }
    describe_command(ctx.root, manifest);
    manifest.master_seed = a.seed;
    manifest.version = KVAR_VERSION;
    const fs::path manifest_path = dir / "manifest.json";
    manifest.outputs.push_back(manifest_path.string());
    write_manifest(manifest, manifest_path);
}

std::vector<FittedSweep> with_fits(std::vector<Sweep> sweeps, const SweepArgs& a) {
    std::vector<FittedSweep> out;
    for (Sweep& s : sweeps) {
        auto fit = a.fit ? try_fit(s.records, a.fit_kmin) : std::nullopt;
        out.push_back({std::move(s), fit});
    }
    return out;
}

void cmd_sweep(const std::string& kind, const SweepArgs& a, Context& ctx) {
    const auto grid = parse_k_grid(a.kgrid);
    // Validate the output location before spending time on estimates.
    ensure_directory(a.out_dir);
    std::vector<FittedSweep> curves;
    if (kind == "gmm") {
        curves = with_fits(gmm_sweep(a.xs, a.d, grid, a.n, a.seed, ctx.threads), a);
    } else if (kind == "lowdim") {
        curves = lowdim_sweep(a.dprimes, a.d, grid, a.n, a.seed, a.fit_kmin, ctx.threads);
    } else if (kind == "sphere") {
        curves = sphere_sweep(a.dprimes, a.d, grid, a.n, a.seed, a.fit_kmin, ctx.threads);
    } else {
        const bool dataset = kind == "dataset";
        const MeasureSpec spec = dataset ? dataset_spec(a.path) : make_spec(a.fam);
        std::string label = a.label;
        if (label.empty()) {
            label = dataset ? fs::path(a.path).stem().string() : spec.name();
        }
        SweepConfig config{spec, grid, a.n, a.seed, sanitize_label(label)};
        curves = with_fits({Sweep{config.label, run_sweep(config, ctx.threads)}}, a);
    }
    finish_sweep(curves, a, ctx);
}

struct ClosedFormArgs {
    std::size_t k = 1;
    std::size_t n = 1;
    std::size_t dim = 1;
    double rate = 1.0;
    std::optional<double> alpha;
    std::optional<double> lambda;
    std::optional<double> radius;
    std::size_t nodes = 64;
    FamilyArgs fam;
};

void cmd_closed_form(const std::string& which, const ClosedFormArgs& a, Context& ctx) {
    double value = 0.0;
    if (which == "uniform") {
        value = kvar_uniform(a.k);
    } else if (which == "exponential") {
        value = kvar_exponential(a.k, a.rate);
    } else if (which == "weibull-inf") {
        value = varinf_weibull(need(a.alpha, "weibull-inf", "--alpha"));
    } else if (which == "tukey-inf") {
        const TukeyLimit t = varinf_tukey(need(a.lambda, "tukey-inf", "--lambda"));
        if (t.upper_bound_only) {
            ctx.err << "note: for lambda < 2 this value only bounds the limit superior from above\n";
        }
        value = t.value;
    } else if (which == "two-point") {
        value = kvar_two_point(a.k, a.dim);
    } else if (which == "unit-square-inf") {
        value = varinf_unit_square();
    } else if (which == "rho") {
        value = rho(a.k, a.dim);
    } else if (which == "mcdiarmid") {
        const ConcentrationRadius r = mcdiarmid_radius(a.k, a.n, a.dim, need(a.radius, "mcdiarmid", "--radius"));
        if (r.degenerate) {
            ctx.err << "note: k*n = 1, the bound is degenerate\n";
        }
        ctx.err << fmt::format("failure probability: {}\n", format_double(r.failure_probability));
        value = r.radius;
    } else if (which == "varinf-integral") {
        value = varinf_integral(quantile1d(make_spec(a.fam)), a.nodes);
    } else if (which == "taylor") {
        value = kvar_taylor_approx(quantile1d(make_spec(a.fam)), a.k);
    }
    ctx.out << format_double(value) << '\n';
}

int replay(const std::string& manifest_path, const std::string& out_dir, unsigned threads, std::ostream& out,
           std::ostream& err) {
    const RunManifest m = read_manifest(manifest_path);
    std::vector<std::string> args = m.arguments;
    if (!out_dir.empty()) {
        for (std::size_t i = 0; i + 1 < args.size(); ++i) {
            if (args[i] == "--out-dir") {
                args[i + 1] = out_dir;
            } else if (args[i] == "--output") {
                args[i + 1] = (fs::path(out_dir) / fs::path(args[i + 1]).filename()).string();
            }
        }
    }
    if (threads > 0) {
        args.push_back("--threads");
        args.push_back(std::to_string(threads));
    }
    return run(args, out, err);
}

int report(std::ostream& err, const std::exception& e, int code) {
    err << "error: " << e.what() << '\n';
    return code;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app("k-variance estimation, closed forms and sweeps", "kvar");
    app.require_subcommand(1);
    app.set_version_flag("--version", KVAR_VERSION);
    unsigned threads = 0;

    const auto add_threads = [&threads](CLI::App* sub) {
        sub->add_option("--threads", threads, "Worker threads (0: KVAR_THREADS or all cores)");
    };

    // estimate
    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Estimate the k-variance of a family or dataset");
    add_family_options(*estimate, est.fam, false);
    estimate->add_option("--dataset", est.dataset, "CSV dataset to bootstrap from");
    estimate->add_option("--k", est.k, "Sample size k")->required();
    estimate->add_option("--n", est.n, "Number of trials")->required();
    estimate->add_option("--seed", est.seed, "Master seed")->capture_default_str();
    estimate->add_option("--radius", est.radius, "Support radius R for the concentration bound");
    estimate->add_option("--output", est.output, "Write the CSV here instead of stdout");
    estimate->add_option("--manifest", est.manifest, "Write the run manifest here");
    add_threads(estimate);

    // closed-form
    ClosedFormArgs cf;
    auto* closed = app.add_subcommand("closed-form", "Print an analytic value");
    closed->require_subcommand(1);
    std::string closed_which;
    const auto closed_sub = [&](const char* name, const char* help) {
        auto* sub = closed->add_subcommand(name, help);
        sub->callback([&closed_which, name] { closed_which = name; });
        add_threads(sub);
        return sub;
    };
    {
        auto* s = closed_sub("uniform", "k/(6(k+1))");
        s->add_option("--k", cf.k)->required();
        s = closed_sub("exponential", "H_k / rate^2");
        s->add_option("--k", cf.k)->required();
        s->add_option("--rate", cf.rate)->capture_default_str();
        s = closed_sub("weibull-inf", "Limit k-variance of Weibull(alpha)");
        s->add_option("--alpha,--shape", cf.alpha)->required();
        s = closed_sub("tukey-inf", "Limit k-variance of Tukey(lambda)");
        s->add_option("--lambda", cf.lambda)->required();
        s = closed_sub("two-point", "Two-point measure at sample size k");
        s->add_option("--k", cf.k)->required();
        s->add_option("--dim,--d", cf.dim)->capture_default_str();
        closed_sub("unit-square-inf", "Limit k-variance of the unit square");
        s = closed_sub("rho", "Ambient scaling rate rho(k, d)");
        s->add_option("--k", cf.k)->required();
        s->add_option("--dim,--d", cf.dim)->capture_default_str();
        s = closed_sub("mcdiarmid", "Concentration radius of the estimator");
        s->add_option("--k", cf.k)->required();
        s->add_option("--n", cf.n)->required();
        s->add_option("--dim,--d", cf.dim)->capture_default_str();
        s->add_option("--radius", cf.radius)->required();
        s = closed_sub("varinf-integral", "Quadrature of the integral limit for a 1D family");
        add_family_options(*s, cf.fam, true);
        s->add_option("--nodes", cf.nodes)->capture_default_str();
        s = closed_sub("taylor", "Taylor approximation of the k-variance for a 1D family");
        add_family_options(*s, cf.fam, true);
        s->add_option("--k", cf.k)->required();
    }

    // sweep
    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Estimate k-variance over a grid of k");
    sweep->require_subcommand(1);
    std::string sweep_kind;
    const auto sweep_sub = [&](const char* name, const char* help) {
        auto* sub = sweep->add_subcommand(name, help);
        sub->callback([&sweep_kind, name] { sweep_kind = name; });
        sub->add_option("--kgrid", sw.kgrid, "k grid: a:b:x2, a:b:+s or a comma list")->required();
        sub->add_option("--n", sw.n, "Trials per k")->required();
        sub->add_option("--seed", sw.seed, "Master seed")->capture_default_str();
        sub->add_option("--out-dir", sw.out_dir, "Directory for CSV files and manifest")->capture_default_str();
        sub->add_flag("--fit", sw.fit, "Fit and print log-log slopes");
        sub->add_option("--fit-kmin", sw.fit_kmin, "Smallest k used in slope fits")->capture_default_str();
        add_threads(sub);
        return sub;
    };
    {
        auto* s = sweep_sub("gmm", "Gaussian mixtures G_x for several x");
        s->add_option("--dim,--d", sw.d, "Ambient dimension")->required();
        s->add_option("--x", sw.xs, "Offsets, comma separated")->required()->delimiter(',');
        s = sweep_sub("lowdim", "Gaussians on d'-dimensional coordinate planes");
        s->add_option("--dim,--d", sw.d, "Ambient dimension")->required();
        s->add_option("--dprime", sw.dprimes, "Intrinsic dimensions, comma separated")->required()->delimiter(',');
        s = sweep_sub("sphere", "Uniform measures on S^(d'-1)");
        s->add_option("--dim,--d", sw.d, "Ambient dimension")->required();
        s->add_option("--dprime", sw.dprimes, "Sphere dimensions d', comma separated")->required()->delimiter(',');
        s = sweep_sub("dataset", "Bootstrap a CSV dataset");
        s->add_option("--path", sw.path, "CSV file")->required();
        s->add_option("--label", sw.label, "Curve label (default: file stem)");
        s = sweep_sub("family", "A named measure family");
        add_family_options(*s, sw.fam, true);
        s->add_option("--label", sw.label, "Curve label (default: family name)");
    }

    // replay
    std::string replay_path;
    std::string replay_out;
    auto* rep = app.add_subcommand("replay", "Rerun the command recorded in a manifest");
    rep->add_option("manifest", replay_path, "manifest.json")->required();
    rep->add_option("--out-dir", replay_out, "Write outputs here instead of the recorded location");
    add_threads(rep);

    try {
        std::vector<std::string> args = merge_config(raw_args, {"fit"});
        std::reverse(args.begin(), args.end());
        try {
            app.parse(args);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e, out, err);
            return code == 0 ? kOk : kUsage;
        }
        Context ctx{out, err, app, resolve_threads(threads)};
        if (estimate->parsed()) {
            if (est.dataset.empty() == est.fam.family.empty()) {
                throw ParameterError("estimate needs exactly one of --family or --dataset");
            }
            cmd_estimate(est, ctx);
        } else if (closed->parsed()) {
            cmd_closed_form(closed_which, cf, ctx);
        } else if (sweep->parsed()) {
            cmd_sweep(sweep_kind, sw, ctx);
        } else if (rep->parsed()) {
            return replay(replay_path, replay_out, threads, out, err);
        }
        return kOk;
    } catch (const IoError& e) {
        return report(err, e, kIo);
    } catch (const EmptyDatasetError& e) {
        return report(err, e, kIo);
    } catch (const FormatError& e) {
        return report(err, e, kIo);
    } catch (const ParseError& e) {
        return report(err, e, kIo);
    } catch (const fs::filesystem_error& e) {
        return report(err, e, kIo);
    } catch (const Error& e) {
        return report(err, e, kUsage);
    }
}

}  // namespace kvar::cli

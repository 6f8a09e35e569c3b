#include "kvar/kvariance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "kvar/error.hpp"
#include "kvar/transport.hpp"

namespace kvar {

double rho(std::size_t k, std::size_t d) {
    if (k == 0 || d == 0) {
        throw ParameterError("rho needs k >= 1 and d >= 1");
    }
    if (k == 1) {
        return 1.0;
    }
    const auto kd = static_cast<double>(k);
    switch (d) {
        case 1:
            return kd;
        case 2:
            return kd / std::log(kd);
        default:
            return std::pow(kd, 2.0 / static_cast<double>(d));
    }
}

ConcentrationRadius mcdiarmid_radius(std::size_t k, std::size_t n, std::size_t d, double support_radius) {
    if (k == 0 || n == 0 || !(support_radius > 0.0)) {
        throw ParameterError("mcdiarmid radius needs positive k, n and R");
    }
    const double kn = static_cast<double>(k) * static_cast<double>(n);
    ConcentrationRadius out;
    out.failure_probability = 2.0 / (kn * kn);
    if (k * n == 1) {
        out.degenerate = true;
        out.radius = 0.0;
        return out;
    }
    out.radius = rho(k, d) * support_radius * support_radius * std::sqrt(std::log(kn) / kn);
    return out;
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("KVAR_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= count) {
                        return;
                    }
                    try {
                        body(i);
                    } catch (...) {
                        const std::lock_guard lock(error_mutex);
                        if (!error) {
                            error = std::current_exception();
                        }
                        next.store(count);
                        return;
                    }
                }
            });
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

KVarEstimate estimate_kvar(const Sampler& sampler, std::size_t dim, const EstimateOptions& options) {
    if (options.k == 0 || options.trials == 0) {
        throw ParameterError("estimator needs k >= 1 and n >= 1");
    }
    KVarEstimate out;
    out.k = options.k;
    out.d = dim;
    out.trials = options.trials;
    out.master_seed = options.master_seed;
    out.trial_costs.assign(options.trials, 0.0);

    parallel_for(options.trials, options.threads, [&](std::size_t j) {
        Stream left = Stream::derive(options.master_seed, {j, 0});
        Stream right = Stream::derive(options.master_seed, {j, 1});
        const EmpiricalMeasure xs = sampler(options.k, left);
        const EmpiricalMeasure ys = sampler(options.k, right);
        if (xs.size() != options.k || ys.size() != options.k || xs.dim() != dim || ys.dim() != dim) {
            throw ShapeError(fmt::format("sampler returned {}x{} and {}x{} clouds, expected {}x{}", xs.size(),
                                         xs.dim(), ys.size(), ys.dim(), options.k, dim));
        }
        out.trial_costs[j] = w2sq(xs, ys).cost;
    });

    const double scale = 0.5 * rho(options.k, dim);
    const auto n = static_cast<double>(options.trials);
    double sum = 0.0;
    for (double c : out.trial_costs) {
        sum += c;
    }
    out.estimate = scale * sum / n;
    if (options.trials > 1) {
        const double mean = out.estimate;
        double ss = 0.0;
        for (double c : out.trial_costs) {
            const double dev = scale * c - mean;
            ss += dev * dev;
        }
        out.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    if (options.support_radius) {
        out.concentration = mcdiarmid_radius(options.k, options.trials, dim, *options.support_radius);
    }
    return out;
}

KVarEstimate estimate_kvar(const MeasureSpec& spec, const EstimateOptions& options) {
    return estimate_kvar([&spec](std::size_t k, Stream& s) { return sample(spec, k, s); }, spec.dim(),
                         options);
}

}  // namespace kvar

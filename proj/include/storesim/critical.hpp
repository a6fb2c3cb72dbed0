#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "storesim/parallel.hpp"
#include "storesim/rng.hpp"
#include "storesim/skorokhod.hpp"

namespace storesim {

/// Parameters of the critical-regime limit process. `gamma` is the
/// square-root-scale offset lim (f_n - n rho / 2) / sqrt(n), `y0` the
/// scaled initial number of single-copy files.
struct CriticalParams {
    double lambda = 0.0;
    double mu = 0.0;
    double gamma = 0.0;
    double y0 = 0.0;

    CriticalParams(double lambda_, double mu_, double gamma_, double y0_)
        : lambda(lambda_), mu(mu_), gamma(gamma_), y0(y0_) {
        if (!(lambda > 0.0)) throw std::invalid_argument("CriticalParams: lambda must be > 0");
        if (!(mu > 0.0)) throw std::invalid_argument("CriticalParams: mu must be > 0");
        if (y0 < 0.0) throw std::invalid_argument("CriticalParams: y0 must be >= 0");
    }
};

enum class NoiseMode {
    Normal, // diffusion coefficient sqrt(2 lambda)
    Zero,   // deterministic drift only; used against the ODE oracle
};

struct ReflectedPath {
    GridPath y;        // Y(t) >= 0
    GridPath integral; // S(t) = int_0^t Y(u) du, nondecreasing
};

/// Projected Euler scheme for the non-Markovian reflected SDE
///   dY = sqrt(2 lambda) dB + mu (2 gamma - 3 Y - 2 mu S) dt,   Y >= 0,
/// with S the running integral of Y (left endpoint in the drift, trapezoid
/// update). Deterministic given the seed.
inline ReflectedPath simulate_reflected_sde(const CriticalParams& p, double horizon,
                                            double h, std::uint64_t seed,
                                            NoiseMode mode = NoiseMode::Normal) {
    if (!(h > 0.0)) throw std::invalid_argument("simulate_reflected_sde: h must be > 0");
    const auto steps = static_cast<std::size_t>(std::llround(horizon / h));
    if (steps < 1)
        throw std::invalid_argument("simulate_reflected_sde: horizon shorter than one step");

    std::vector<double> y(steps + 1), s(steps + 1);
    Rng rng(seed);
    const double diffusion = mode == NoiseMode::Normal ? std::sqrt(2.0 * p.lambda * h) : 0.0;
    y[0] = p.y0;
    s[0] = 0.0;
    CompensatedSum integral;
    for (std::size_t k = 0; k < steps; ++k) {
        const double drift = p.mu * (2.0 * p.gamma - 3.0 * y[k] - 2.0 * p.mu * s[k]);
        const double noise = mode == NoiseMode::Normal ? diffusion * rng.normal() : 0.0;
        y[k + 1] = std::max(0.0, y[k] + drift * h + noise);
        integral.add(0.5 * h * (y[k] + y[k + 1]));
        s[k + 1] = integral.value();
    }
    return ReflectedPath{GridPath(h, std::move(y)), GridPath(h, std::move(s))};
}

/// Pointwise ensemble statistics over independent Euler paths. The column
/// mean_x0_scaled is mu * mean S(t), the limit of X0/sqrt(n).
struct EnsembleMoments {
    double step = 0.0;
    std::int64_t n_paths = 0;
    std::vector<double> mean_y;
    std::vector<double> var_y;
    std::vector<double> stderr_y;
    std::vector<double> mean_x0_scaled;
    std::vector<double> stderr_x0_scaled;
};

namespace detail {

struct MomentAccumulator {
    std::vector<double> sum_y, sum_y2, sum_s, sum_s2;

    explicit MomentAccumulator(std::size_t points)
        : sum_y(points, 0.0), sum_y2(points, 0.0), sum_s(points, 0.0), sum_s2(points, 0.0) {}

    void add(const ReflectedPath& path) {
        for (std::size_t k = 0; k < sum_y.size(); ++k) {
            const double y = path.y.values[k];
            const double s = path.integral.values[k];
            sum_y[k] += y;
            sum_y2[k] += y * y;
            sum_s[k] += s;
            sum_s2[k] += s * s;
        }
    }

    void merge(const MomentAccumulator& other) {
        for (std::size_t k = 0; k < sum_y.size(); ++k) {
            sum_y[k] += other.sum_y[k];
            sum_y2[k] += other.sum_y2[k];
            sum_s[k] += other.sum_s[k];
            sum_s2[k] += other.sum_s2[k];
        }
    }
};

} // namespace detail

/// Sample mean / variance curves across n_paths independent paths, with
/// normal-approximation standard errors. Paths are seeded per index and
/// partial sums are kept per fixed-size block and merged in block order,
/// so the result is bit-identical for any thread count.
inline EnsembleMoments ensemble_moments(const CriticalParams& p, double horizon, double h,
                                        std::int64_t n_paths, std::uint64_t seed,
                                        NoiseMode mode = NoiseMode::Normal,
                                        int parallelism = 1) {
    if (n_paths < 2)
        throw std::invalid_argument("ensemble_moments: n_paths must be >= 2");
    const auto steps = static_cast<std::size_t>(std::llround(horizon / h));
    const std::size_t points = steps + 1;

    constexpr std::int64_t block = 64;
    const std::int64_t n_blocks = (n_paths + block - 1) / block;
    std::vector<detail::MomentAccumulator> partial(static_cast<std::size_t>(n_blocks),
                                                   detail::MomentAccumulator(points));
    parallel_for_index(n_blocks, parallelism, [&](std::int64_t b) {
        const std::int64_t lo = b * block;
        const std::int64_t hi = std::min(lo + block, n_paths);
        for (std::int64_t i = lo; i < hi; ++i)
            partial[static_cast<std::size_t>(b)].add(simulate_reflected_sde(
                p, horizon, h, derive_stream_seed(seed, static_cast<std::uint64_t>(i)), mode));
    });
    detail::MomentAccumulator acc(points);
    for (const auto& part : partial) acc.merge(part);

    EnsembleMoments m;
    m.step = h;
    m.n_paths = n_paths;
    m.mean_y.resize(points);
    m.var_y.resize(points);
    m.stderr_y.resize(points);
    m.mean_x0_scaled.resize(points);
    m.stderr_x0_scaled.resize(points);
    const double n = static_cast<double>(n_paths);
    for (std::size_t k = 0; k < points; ++k) {
        const double mean_y = acc.sum_y[k] / n;
        const double var_y = std::max(0.0, (acc.sum_y2[k] - n * mean_y * mean_y) / (n - 1.0));
        const double mean_s = acc.sum_s[k] / n;
        const double var_s = std::max(0.0, (acc.sum_s2[k] - n * mean_s * mean_s) / (n - 1.0));
        m.mean_y[k] = mean_y;
        m.var_y[k] = var_y;
        m.stderr_y[k] = std::sqrt(var_y / n);
        m.mean_x0_scaled[k] = p.mu * mean_s;
        m.stderr_x0_scaled[k] = p.mu * std::sqrt(var_s / n);
    }
    return m;
}

} // namespace storesim

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "storesim/ctmc.hpp"
#include "storesim/skorokhod.hpp"

namespace storesim {

// ---------------------------------------------------------------------------
// Special functions. Implemented here so the verification path has no
// external numeric dependency.

/// Regularized lower incomplete gamma P(a, x), series for x < a + 1 and
/// Lentz continued fraction otherwise. Absolute accuracy ~1e-14.
inline double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0)
        throw std::invalid_argument("regularized_gamma_p: need a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // continued fraction for Q(a, x)
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double f = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * f;
    return 1.0 - q;
}

/// Chi-square quantile: the x with P(df/2, x/2) = prob, by bisection.
inline double chi_square_quantile(double df, double prob) {
    if (!(df > 0.0)) throw std::invalid_argument("chi_square_quantile: df must be > 0");
    if (!(prob > 0.0) || !(prob < 1.0))
        throw std::invalid_argument("chi_square_quantile: prob must be in (0,1)");
    double lo = 0.0;
    double hi = std::max(1.0, df);
    while (regularized_gamma_p(0.5 * df, 0.5 * hi) < prob) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (regularized_gamma_p(0.5 * df, 0.5 * mid) < prob)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-10 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

/// Standard normal quantile (Acklam's rational approximation, |err| < 1.2e-9).
inline double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw std::invalid_argument("normal_quantile: p must be in (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// ---------------------------------------------------------------------------

/// Histogram over nonnegative integers.
struct EmpiricalDist {
    std::map<std::int64_t, std::int64_t> counts;
    std::int64_t total = 0;

    void add(std::int64_t value, std::int64_t count = 1) {
        if (value < 0) throw std::invalid_argument("EmpiricalDist: negative value");
        counts[value] += count;
        total += count;
    }
};

struct TestReport {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string description;
};

/// Histogram of the single-copy count at time t across replicas.
inline EmpiricalDist empirical_marginal(std::span<const Trajectory> trajectories, double t) {
    if (trajectories.empty())
        throw std::invalid_argument("empirical_marginal: no trajectories");
    for (const auto& tr : trajectories)
        if (!(tr.params == trajectories.front().params))
            throw std::invalid_argument("empirical_marginal: mixed parameter sets");
    EmpiricalDist d;
    for (const auto& tr : trajectories) d.add(sample_at(tr, t).x1);
    return d;
}

/// Pearson goodness-of-fit of a histogram against the geometric law
/// P(k) = (1 - r) r^k. Cells with expected count below 5 are merged into
/// the tail; pass iff the statistic is at or below the chi-square quantile
/// at 1 - alpha_level.
inline TestReport chi_square_geometric(const EmpiricalDist& d, double r, double alpha_level) {
    if (!(r >= 0.0) || !(r < 1.0))
        throw std::invalid_argument("chi_square_geometric: r must be in [0,1)");
    if (!(alpha_level > 0.0) || !(alpha_level < 1.0))
        throw std::invalid_argument("chi_square_geometric: alpha_level must be in (0,1)");
    if (d.total < 1) throw std::invalid_argument("chi_square_geometric: empty distribution");

    TestReport report;
    report.name = "chi_square_geometric";
    if (r == 0.0) {
        // degenerate point mass at 0
        std::int64_t off = 0;
        for (const auto& [value, count] : d.counts)
            if (value != 0) off += count;
        report.statistic = static_cast<double>(off);
        report.threshold = 0.0;
        report.pass = off == 0;
        report.description = "point-mass fit, off-support count " + std::to_string(off);
        return report;
    }

    const double n = static_cast<double>(d.total);
    // individual cells 0..m-1, tail [m, inf); m as large as the >=5 rule allows
    std::size_t m = 0;
    while (n * (1.0 - r) * std::pow(r, static_cast<double>(m)) >= 5.0 &&
           n * std::pow(r, static_cast<double>(m + 1)) >= 5.0)
        ++m;
    if (m < 1)
        throw std::invalid_argument("chi_square_geometric: fewer than 2 bins after merging");

    std::vector<double> observed(m + 1, 0.0);
    for (const auto& [value, count] : d.counts) {
        const auto cell = std::min<std::size_t>(static_cast<std::size_t>(value), m);
        observed[cell] += static_cast<double>(count);
    }
    double statistic = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
        const double pk = k < m ? (1.0 - r) * std::pow(r, static_cast<double>(k))
                                : std::pow(r, static_cast<double>(m));
        const double expected = n * pk;
        const double diff = observed[k] - expected;
        statistic += diff * diff / expected;
    }
    const double df = static_cast<double>(m); // m + 1 cells
    report.statistic = statistic;
    report.threshold = chi_square_quantile(df, 1.0 - alpha_level);
    report.pass = statistic <= report.threshold;
    std::ostringstream os;
    os << "cells " << (m + 1) << ", df " << df << ", n " << d.total;
    report.description = os.str();
    return report;
}

/// One-sample Kolmogorov-Smirnov statistic against Exponential(rate).
inline double ks_statistic_exponential(std::vector<double> samples, double rate) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cdf = -std::expm1(-rate * samples[i]);
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
    }
    return d;
}

/// Asymptotic KS critical value at alpha_level for n samples.
inline double ks_critical_value(std::size_t n, double alpha_level) {
    return std::sqrt(-0.5 * std::log(alpha_level / 2.0)) / std::sqrt(static_cast<double>(n));
}

/// Two checks that the loss events in (t1, t2] look like a Poisson stream:
/// (a) index of dispersion of the counts over equal subwindows inside
/// [0.85, 1.15] (one subwindow per ~3 expected events, clamped to [8, 1024]);
/// (b) KS of the inter-loss gaps against Exponential with the estimated
/// rate. Combined pass. Requires at least 20 loss events in the window.
inline TestReport poisson_loss_check(const Trajectory& tr, double t1, double t2,
                                     double alpha_level) {
    if (!(t1 >= 0.0) || !(t2 > t1))
        throw std::invalid_argument("poisson_loss_check: bad window");
    if (t2 > tr.horizon && !tr.absorbed)
        throw std::invalid_argument("poisson_loss_check: window beyond horizon");
    std::vector<double> losses;
    for (const auto& rec : tr.records)
        if (rec.kind == JumpKind::Loss && rec.time > t1 && rec.time <= t2)
            losses.push_back(rec.time);
    if (losses.size() < 20)
        throw std::invalid_argument("poisson_loss_check: fewer than 20 loss events in window");

    const auto n = losses.size();
    const auto n_windows =
        std::clamp<std::size_t>(n / 3, 8, 1024);
    std::vector<double> counts(n_windows, 0.0);
    const double width = (t2 - t1) / static_cast<double>(n_windows);
    for (const double t : losses) {
        auto k = static_cast<std::size_t>((t - t1) / width);
        counts[std::min(k, n_windows - 1)] += 1.0;
    }
    double mean = 0.0;
    for (const double c : counts) mean += c;
    mean /= static_cast<double>(n_windows);
    double var = 0.0;
    for (const double c : counts) var += (c - mean) * (c - mean);
    var /= static_cast<double>(n_windows - 1);
    const double dispersion = var / mean;
    const bool pass_dispersion = dispersion >= 0.85 && dispersion <= 1.15;

    std::vector<double> gaps(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) gaps[i] = losses[i + 1] - losses[i];
    double gap_mean = 0.0;
    for (const double g : gaps) gap_mean += g;
    gap_mean /= static_cast<double>(gaps.size());
    const double ks = ks_statistic_exponential(gaps, 1.0 / gap_mean);
    const double ks_crit = ks_critical_value(gaps.size(), alpha_level);
    const bool pass_ks = ks <= ks_crit;

    TestReport report;
    report.name = "poisson_loss_check";
    report.statistic = dispersion;
    report.threshold = 1.15;
    report.pass = pass_dispersion && pass_ks;
    std::ostringstream os;
    os << "events " << n << ", dispersion " << dispersion << " (band [0.85,1.15]), ks " << ks
       << " (crit " << ks_crit << "), rate_hat " << static_cast<double>(n) / (t2 - t1);
    report.description = os.str();
    return report;
}

inline double sup_deviation(const GridPath& a, const GridPath& b) {
    if (!same_grid(a, b)) throw std::invalid_argument("sup_deviation: grid mismatch");
    return sup_norm_diff(a, b);
}

struct MeanCi {
    double mean = 0.0;
    double halfwidth = 0.0;
};

/// Sample mean with normal-approximation confidence half-width
/// z_{(1+level)/2} * s / sqrt(n).
inline MeanCi mean_ci(std::span<const double> samples, double level = 0.95) {
    if (samples.size() < 2) throw std::invalid_argument("mean_ci: need at least 2 samples");
    if (!(level > 0.0) || !(level < 1.0))
        throw std::invalid_argument("mean_ci: level must be in (0,1)");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (const double v : samples) mean += v;
    mean /= n;
    double ss = 0.0;
    for (const double v : samples) ss += (v - mean) * (v - mean);
    const double s = std::sqrt(ss / (n - 1.0));
    const double z = normal_quantile(0.5 * (1.0 + level));
    return MeanCi{mean, z * s / std::sqrt(n)};
}

} // namespace storesim

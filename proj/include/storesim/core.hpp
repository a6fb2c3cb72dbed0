#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace storesim {

/// Rates and sizes of the storage network. Immutable after construction.
///
/// lambda: total duplication bandwidth per unit of scale (the network
///         duplicates at rate lambda * n whenever single-copy files exist)
/// mu:     failure rate of one copy
/// n:      scale parameter
/// f_n:    number of distinct files
struct ModelParams {
    double lambda = 0.0;
    double mu = 0.0;
    std::int64_t n = 0;
    std::int64_t f_n = 0;

    ModelParams(double lambda_, double mu_, std::int64_t n_, std::int64_t f_n_)
        : lambda(lambda_), mu(mu_), n(n_), f_n(f_n_) {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("ModelParams: lambda must be positive");
        if (!(mu > 0.0) || !std::isfinite(mu))
            throw std::invalid_argument("ModelParams: mu must be positive");
        if (n < 1) throw std::invalid_argument("ModelParams: n must be >= 1");
        if (f_n < 1) throw std::invalid_argument("ModelParams: f_n must be >= 1");
    }

    /// f_n = floor(beta * n); beta itself only constrains the limit.
    static ModelParams with_beta(double lambda, double mu, std::int64_t n, double beta) {
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw std::invalid_argument("ModelParams: beta must be positive");
        const auto f_n = static_cast<std::int64_t>(std::floor(beta * static_cast<double>(n)));
        return ModelParams(lambda, mu, n, f_n);
    }

    /// Exactly critical configuration: lambda = 2 mu f_n / n, so that
    /// rho = 2 beta holds without rounding slack.
    static ModelParams critical(double mu, std::int64_t n, std::int64_t f_n) {
        if (n < 1) throw std::invalid_argument("ModelParams: n must be >= 1");
        const double lambda = 2.0 * mu * static_cast<double>(f_n) / static_cast<double>(n);
        return ModelParams(lambda, mu, n, f_n);
    }

    double beta() const { return static_cast<double>(f_n) / static_cast<double>(n); }
    double rho() const { return lambda / mu; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Counts of lost files (x0) and single-copy files (x1). The number of
/// two-copy files is the complement f_n - x0 - x1.
struct NetworkState {
    std::int64_t x0 = 0;
    std::int64_t x1 = 0;

    friend bool operator==(const NetworkState&, const NetworkState&) = default;
};

inline bool in_state_space(const ModelParams& p, NetworkState s) {
    return s.x0 >= 0 && s.x1 >= 0 && s.x0 + s.x1 <= p.f_n;
}

inline bool is_absorbing(const ModelParams& p, NetworkState s) {
    return s.x0 == p.f_n && s.x1 == 0;
}

enum class RegimeTag {
    Overloaded, // rho < 2 beta: a macroscopic fraction of files is lost
    Critical,   // rho = 2 beta: square-root fluctuations
    Stable,     // rho > 2 beta: losses are microscopic on the normal time scale
};

struct Regime {
    RegimeTag tag = RegimeTag::Stable;
    double tol = 0.0;
};

inline Regime classify_regime(const ModelParams& p, double tol = 0.0) {
    if (tol < 0.0) throw std::invalid_argument("classify_regime: tol must be >= 0");
    const double rho = p.rho();
    const double two_beta = 2.0 * p.beta();
    RegimeTag tag = RegimeTag::Critical;
    if (rho < two_beta - tol)
        tag = RegimeTag::Overloaded;
    else if (rho > two_beta + tol)
        tag = RegimeTag::Stable;
    return Regime{tag, tol};
}

/// Jump rates out of a state.
///
///   up:   x -> x + e1, rate 2 mu (f_n - x0 - x1)   (a two-copy file degrades)
///   dup:  x -> x - e1, rate lambda n [x1 > 0]      (a single-copy file is duplicated)
///   loss: x -> x - e1 + e0, rate mu x1             (a single-copy file is lost)
struct TransitionRates {
    double up = 0.0;
    double dup = 0.0;
    double loss = 0.0;

    double total() const { return up + dup + loss; }
};

inline TransitionRates transition_rates(const ModelParams& p, NetworkState s) {
    TransitionRates r;
    r.up = 2.0 * p.mu * static_cast<double>(p.f_n - s.x0 - s.x1);
    r.dup = s.x1 > 0 ? p.lambda * static_cast<double>(p.n) : 0.0;
    r.loss = p.mu * static_cast<double>(s.x1);
    return r;
}

} // namespace storesim

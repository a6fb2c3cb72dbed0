#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace storesim {

/// The lost-file fraction on the linear time scale, in the stable regime:
/// psi(t) is the unique root y in [0, beta) of
///   (1 - y/beta)^(rho/2) * exp(y + mu t) = 1.
struct DecayCurve {
    double step = 0.0;
    std::vector<double> psi;
    std::vector<double> residual; // |(1 - psi/beta)^(rho/2) e^(psi + mu t) - 1|
    double beta = 0.0;
    double rho = 0.0;
    double mu = 0.0;
};

namespace detail {

struct PsiRoot {
    double value = 0.0;
    double residual = 0.0;
};

/// Solves g(y) = (rho/2) ln(1 - y/beta) + y + mu t = 0 in the variable
/// u = ln(1 - y/beta), where g(u) = (rho/2) u + beta (1 - e^u) + mu t is
/// strictly increasing (rho > 2 beta). Newton with a bisection safeguard;
/// the substitution keeps the problem well conditioned near y -> beta,
/// where d g / d y blows up.
inline PsiRoot solve_psi(double beta, double rho, double mu, double t, double tol) {
    if (t == 0.0) return PsiRoot{0.0, 0.0};
    double lo = -2.0 * (beta + mu * t) / rho - 1.0;
    double hi = 0.0;
    const auto g = [&](double u) { return 0.5 * rho * u + beta * (1.0 - std::exp(u)) + mu * t; };
    while (g(lo) > 0.0) lo *= 2.0;

    double u = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double gu = g(u);
        if (std::abs(gu) <= tol) break;
        if (gu > 0.0)
            hi = u;
        else
            lo = u;
        const double slope = 0.5 * rho - beta * std::exp(u);
        const double next = u - gu / slope;
        u = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
    }
    PsiRoot root;
    root.value = beta * -std::expm1(u); // y = beta (1 - e^u)
    root.residual = std::abs(std::expm1(0.5 * rho * u + root.value + mu * t));
    return root;
}

inline void require_stable(double beta, double rho, const char* where) {
    if (!(beta > 0.0)) throw std::invalid_argument(std::string(where) + ": beta must be > 0");
    if (!(rho > 2.0 * beta))
        throw std::invalid_argument(std::string(where) + ": requires the stable regime rho > 2 beta");
}

} // namespace detail

inline double psi(double beta, double rho, double mu, double t, double tol = 1e-12) {
    detail::require_stable(beta, rho, "psi");
    if (!(mu > 0.0)) throw std::invalid_argument("psi: mu must be > 0");
    if (!(t >= 0.0)) throw std::invalid_argument("psi: t must be >= 0");
    if (!(tol > 0.0)) throw std::invalid_argument("psi: tol must be > 0");
    return detail::solve_psi(beta, rho, mu, t, tol).value;
}

inline DecayCurve psi_curve(double beta, double rho, double mu, double horizon, double h,
                            double tol = 1e-12) {
    detail::require_stable(beta, rho, "psi_curve");
    if (!(mu > 0.0)) throw std::invalid_argument("psi_curve: mu must be > 0");
    if (!(h > 0.0)) throw std::invalid_argument("psi_curve: h must be > 0");
    if (!(horizon >= 0.0)) throw std::invalid_argument("psi_curve: horizon must be >= 0");
    const auto steps = static_cast<std::size_t>(std::llround(horizon / h));
    DecayCurve curve{h, {}, {}, beta, rho, mu};
    curve.psi.reserve(steps + 1);
    curve.residual.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        const auto root = detail::solve_psi(beta, rho, mu, h * static_cast<double>(k), tol);
        curve.psi.push_back(root.value);
        curve.residual.push_back(root.residual);
    }
    return curve;
}

/// Independent route to the same curve: classical RK4 on
///   psi' = 2 mu^2 (beta - psi) / (lambda - 2 mu (beta - psi)),  psi(0) = 0,
/// with lambda = rho mu. Cross-checks the fixed-point solver.
inline DecayCurve psi_ode(double beta, double rho, double mu, double horizon, double h) {
    detail::require_stable(beta, rho, "psi_ode");
    if (!(mu > 0.0)) throw std::invalid_argument("psi_ode: mu must be > 0");
    if (!(h > 0.0)) throw std::invalid_argument("psi_ode: h must be > 0");
    const double lambda = rho * mu;
    const auto deriv = [&](double p) {
        const double denom = lambda - 2.0 * mu * (beta - p);
        if (!(denom > 0.0)) throw std::runtime_error("psi_ode: nonpositive denominator");
        return 2.0 * mu * mu * (beta - p) / denom;
    };
    const auto steps = static_cast<std::size_t>(std::llround(horizon / h));
    DecayCurve curve{h, {}, {}, beta, rho, mu};
    curve.psi.reserve(steps + 1);
    curve.residual.reserve(steps + 1);
    double p = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = h * static_cast<double>(k);
        curve.psi.push_back(p);
        curve.residual.push_back(
            std::abs(std::expm1(0.5 * rho * std::log1p(-p / beta) + p + mu * t)));
        const double k1 = deriv(p);
        const double k2 = deriv(p + 0.5 * h * k1);
        const double k3 = deriv(p + 0.5 * h * k2);
        const double k4 = deriv(p + h * k3);
        p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return curve;
}

/// Limit of T_n(delta)/n, the scaled first time a fraction delta of the
/// files is lost: (1/mu) (-(rho/2) ln(1 - delta) - delta beta).
inline double t_of_delta(double beta, double rho, double mu, double delta) {
    detail::require_stable(beta, rho, "t_of_delta");
    if (!(mu > 0.0)) throw std::invalid_argument("t_of_delta: mu must be > 0");
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("t_of_delta: delta must be in (0,1)");
    return (-0.5 * rho * std::log1p(-delta) - delta * beta) / mu;
}

/// Geometric law on {0, 1, 2, ...} with P(k) = (1 - r) r^k; the stationary
/// law of an M/M/1 queue with utilization r.
struct GeometricLaw {
    double ratio = 0.0;

    explicit GeometricLaw(double ratio_) : ratio(ratio_) {
        if (!(ratio >= 0.0) || !(ratio < 1.0))
            throw std::invalid_argument("GeometricLaw: ratio must be in [0,1)");
    }

    double pmf(std::int64_t k) const { return (1.0 - ratio) * std::pow(ratio, static_cast<double>(k)); }
    double tail(std::int64_t k) const { return std::pow(ratio, static_cast<double>(k)); } // P(X >= k)
    double mean() const { return ratio / (1.0 - ratio); }
};

/// Local equilibrium of the single-copy count around scaled time t:
/// M/M/1 with arrival 2 mu (beta - psi(t)) and service lambda, i.e. ratio
/// 2 (beta - psi(t)) / rho. At t = 0 this is the marginal law on the
/// normal time scale, ratio 2 beta / rho.
inline GeometricLaw local_equilibrium(double beta, double rho, double mu, double t,
                                      double tol = 1e-12) {
    const double y = psi(beta, rho, mu, t, tol);
    return GeometricLaw(2.0 * (beta - y) / rho);
}

} // namespace storesim

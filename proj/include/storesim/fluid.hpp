#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "storesim/skorokhod.hpp"

namespace storesim {

/// Scaling limit of (x0(t), x1(t)) = lim (X0(t)/n, X1(t)/n), started from
/// the empty-loss state.
struct FluidCurve {
    double step = 0.0;
    std::vector<double> x0;
    std::vector<double> x1;
    double beta = 0.0;
    double rho = 0.0;
    double mu = 0.0;
};

/// Closed-form fluid limit:
///   rho <= 2 beta:  x0(t) = (beta - rho/2)(1 - e^{-mu t})^2,
///                   x1(t) = (2 beta - rho)(e^{-mu t} - e^{-2 mu t})
///   rho >  2 beta:  (0, 0)
inline std::pair<double, double> fluid_closed_form(double beta, double rho, double mu,
                                                   double t) {
    if (rho > 2.0 * beta) return {0.0, 0.0};
    const double e1 = std::exp(-mu * t);
    const double x0 = (beta - 0.5 * rho) * (1.0 - e1) * (1.0 - e1);
    const double x1 = (2.0 * beta - rho) * (e1 - e1 * e1);
    return {x0, x1};
}

/// The driving functional of the fluid limit's generalized Skorokhod problem:
///   F(x)(t) = (2 mu beta - lambda) t - mu int_0^t (3 x(u) + 2 mu int_0^u x) du
/// The inner integral is carried along, so one evaluation is O(K).
inline PathFunctional fluid_functional(double beta, double lambda, double mu) {
    PathFunctional f;
    f.apply = [beta, lambda, mu](const GridPath& x) {
        const GridPath inner = cumulative_trapezoid(x);
        std::vector<double> integrand(x.size());
        for (std::size_t k = 0; k < x.size(); ++k)
            integrand[k] = 3.0 * x.values[k] + 2.0 * mu * inner.values[k];
        const GridPath outer = cumulative_trapezoid(GridPath(x.step, std::move(integrand)));
        std::vector<double> out(x.size());
        const double slope = 2.0 * mu * beta - lambda;
        for (std::size_t k = 0; k < x.size(); ++k)
            out[k] = slope * x.time_at(k) - mu * outer.values[k];
        return GridPath(x.step, std::move(out));
    };
    f.lipschitz_bound = [mu](double horizon) { return mu * (3.0 + 2.0 * mu * horizon); };
    return f;
}

/// Fluid curve via the generalized Skorokhod problem: x1 solves the GSP for
/// the functional above, and x0(t) = mu int_0^t x1.
inline FluidCurve fluid_gsp(double beta, double lambda, double mu, double horizon,
                            double h, double tol = 1e-10, int max_iter = 200) {
    if (!(beta > 0.0) || !(lambda > 0.0) || !(mu > 0.0))
        throw std::invalid_argument("fluid_gsp: parameters must be positive");
    GspSolution sol = gsp_solve(fluid_functional(beta, lambda, mu), horizon, h, tol, max_iter);
    GridPath x0 = cumulative_trapezoid(sol.x, mu);
    FluidCurve curve;
    curve.step = h;
    curve.x1 = std::move(sol.x.values);
    curve.x0 = std::move(x0.values);
    curve.beta = beta;
    curve.rho = lambda / mu;
    curve.mu = mu;
    return curve;
}

} // namespace storesim

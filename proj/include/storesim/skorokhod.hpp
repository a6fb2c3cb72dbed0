#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace storesim {

/// Neumaier-compensated accumulator. The Picard iteration below resolves
/// fixed points to 1e-10 in the sup norm on grids of several thousand
/// points; plain summation leaves a round-off floor above that.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// A real-valued function sampled on the uniform grid 0, h, 2h, ...
struct GridPath {
    double step = 0.0;
    std::vector<double> values;

    GridPath() = default;

    GridPath(double step_, std::vector<double> values_)
        : step(step_), values(std::move(values_)) {
        if (!(step > 0.0)) throw std::invalid_argument("GridPath: step must be positive");
        if (values.size() < 2)
            throw std::invalid_argument("GridPath: at least 2 points required");
    }

    static GridPath zeros(double step, std::size_t count) {
        return GridPath(step, std::vector<double>(count, 0.0));
    }

    std::size_t size() const { return values.size(); }
    double time_at(std::size_t k) const { return step * static_cast<double>(k); }
    double horizon() const { return time_at(values.size() - 1); }
};

inline bool same_grid(const GridPath& a, const GridPath& b) {
    return a.values.size() == b.values.size() &&
           std::abs(a.step - b.step) <= 1e-12 * std::max(a.step, b.step);
}

/// Cumulative trapezoid integral of v, scaled: out_k = scale * int_0^{kh} v.
inline GridPath cumulative_trapezoid(const GridPath& v, double scale = 1.0) {
    std::vector<double> out(v.size());
    CompensatedSum acc;
    out[0] = 0.0;
    for (std::size_t k = 1; k < v.size(); ++k) {
        acc.add(0.5 * v.step * (v.values[k - 1] + v.values[k]));
        out[k] = scale * acc.value();
    }
    return GridPath(v.step, std::move(out));
}

inline double sup_norm_diff(const GridPath& a, const GridPath& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k)
        m = std::max(m, std::abs(a.values[k] - b.values[k]));
    return m;
}

struct ReflectedPair {
    GridPath x; // constrained path, x = z + r >= 0
    GridPath r; // nondecreasing pushing term, r(0) = 0
};

/// One-dimensional Skorokhod reflection at 0 on a grid:
///   r_k = max_{j <= k} max(-z_j, 0),   x_k = z_k + r_k.
inline ReflectedPair reflect(const GridPath& z) {
    if (z.values.front() < 0.0)
        throw std::invalid_argument("reflect: z(0) must be >= 0");
    std::vector<double> r(z.size()), x(z.size());
    double running = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        running = std::max(running, -z.values[k]);
        r[k] = running;
        x[k] = z.values[k] + running;
    }
    return ReflectedPair{GridPath(z.step, std::move(x)), GridPath(z.step, std::move(r))};
}

/// Discrete Stieltjes sum for int x dr, with the left-limit convention
/// sum_k x_{k+1} (r_{k+1} - r_k): the post-push value multiplies the push,
/// so exact reflection output has defect 0.
inline double complementarity_defect(const GridPath& x, const GridPath& r) {
    if (!same_grid(x, r))
        throw std::invalid_argument("complementarity_defect: grid mismatch");
    CompensatedSum acc;
    for (std::size_t k = 0; k + 1 < x.size(); ++k)
        acc.add(x.values[k + 1] * (r.values[k + 1] - r.values[k]));
    return acc.value();
}

/// A non-anticipating functional G on grid paths together with a declared
/// Lipschitz bound C_T for sup_{s<=t} |G(x)(s) - G(y)(s)| <= C_T int_0^t |x - y|.
struct PathFunctional {
    std::function<GridPath(const GridPath&)> apply;
    std::function<double(double)> lipschitz_bound; // horizon -> C_T
};

struct GspSolution {
    GridPath x;
    GridPath r;
    int iterations = 0;
    std::vector<double> residuals; // sup |x_{m+1} - x_m| per iteration
};

class GspNoConvergence : public std::runtime_error {
public:
    GspNoConvergence(double last_residual, int iterations)
        : std::runtime_error("gsp_solve: no convergence after " +
                             std::to_string(iterations) +
                             " iterations, last residual " +
                             std::to_string(last_residual)),
          last_residual(last_residual),
          iterations(iterations) {}

    double last_residual;
    int iterations;
};

/// Solves the generalized Skorokhod problem x = G(x) + r by Picard
/// iteration from x == 0: (x_{m+1}, r_{m+1}) = reflect(G(x_m)), stopping
/// when successive iterates agree within tol in the sup norm.
inline GspSolution gsp_solve(const PathFunctional& g, double horizon, double h,
                             double tol = 1e-10, int max_iter = 200) {
    if (!(h > 0.0)) throw std::invalid_argument("gsp_solve: h must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("gsp_solve: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("gsp_solve: max_iter must be >= 1");
    const auto steps = static_cast<std::size_t>(std::llround(horizon / h));
    if (steps < 1) throw std::invalid_argument("gsp_solve: horizon shorter than one step");

    GspSolution sol;
    GridPath x = GridPath::zeros(h, steps + 1);
    for (int m = 1; m <= max_iter; ++m) {
        GridPath z = g.apply(x);
        if (z.size() != x.size())
            throw std::runtime_error("gsp_solve: functional changed the grid");
        ReflectedPair next = reflect(z);
        const double res = sup_norm_diff(next.x, x);
        sol.residuals.push_back(res);
        x = std::move(next.x);
        sol.r = std::move(next.r);
        if (res <= tol) {
            sol.x = std::move(x);
            sol.iterations = m;
            return sol;
        }
    }
    throw GspNoConvergence(sol.residuals.back(), max_iter);
}

} // namespace storesim

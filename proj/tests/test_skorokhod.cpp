#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "storesim/fluid.hpp"
#include "storesim/rng.hpp"
#include "storesim/skorokhod.hpp"

using namespace storesim;

namespace {

GridPath random_walk(double h, std::size_t points, double start, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> z(points);
    z[0] = start;
    for (std::size_t k = 1; k < points; ++k)
        z[k] = z[k - 1] - 0.1 * h + std::sqrt(h) * rng.normal();
    return GridPath(h, std::move(z));
}

} // namespace

TEST_CASE("reflection of a decreasing path pins it at zero", "[skorokhod]") {
    const GridPath z(0.5, {0.0, -0.5, -1.0});
    const ReflectedPair p = reflect(z);
    CHECK(p.r.values == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(p.x.values == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("reflection is inactive on nonnegative paths", "[skorokhod]") {
    const GridPath z(0.1, {1.0, 0.3, 0.0, 2.0});
    const ReflectedPair p = reflect(z);
    CHECK(p.r.values == std::vector<double>{0.0, 0.0, 0.0, 0.0});
    CHECK(p.x.values == z.values);
}

TEST_CASE("running-infimum formula", "[skorokhod]") {
    const GridPath z(1.0, {1.0, 0.2, -0.4});
    const ReflectedPair p = reflect(z);
    CHECK(p.r.values == std::vector<double>{0.0, 0.0, 0.4});
    CHECK(p.x.values == std::vector<double>{1.0, 0.2, 0.0});
}

TEST_CASE("reflection rejects negative starting points", "[skorokhod]") {
    CHECK_THROWS_AS(reflect(GridPath(1.0, {-0.1, 0.0})), std::invalid_argument);
}

TEST_CASE("reflection output properties on random drives", "[skorokhod]") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const GridPath z = random_walk(0.01, 400, 0.2, seed);
        const ReflectedPair p = reflect(z);
        for (std::size_t k = 0; k < z.size(); ++k) {
            CHECK(p.x.values[k] >= 0.0);
            if (k > 0) CHECK(p.r.values[k] >= p.r.values[k - 1]);
            CHECK(p.x.values[k] == p.r.values[k] + z.values[k]); // exact grid arithmetic
        }
        CHECK(p.r.values.front() == 0.0);
        CHECK(std::abs(complementarity_defect(p.x, p.r)) <= 1e-9);
    }
}

TEST_CASE("reflection is monotone under nondecreasing drive increments", "[skorokhod]") {
    // Pointwise domination of the drives is not enough: lifting only an
    // early dip of z lowers the later pushes and can reorder the outputs
    // (z = (0,-1,-0.5) vs z' = (0,-0.2,-0.5) gives x_2 = 0.5 > x'_2 = 0).
    // The map is monotone when z' - z is nondecreasing from 0.
    {
        const ReflectedPair a = reflect(GridPath(1.0, {0.0, -1.0, -0.5}));
        const ReflectedPair b = reflect(GridPath(1.0, {0.0, -0.2, -0.5}));
        CHECK(a.x.values[2] > b.x.values[2]);
    }
    Rng rng(99);
    for (int i = 0; i < 30; ++i) {
        const GridPath z = random_walk(0.01, 300, 0.5, 1000 + static_cast<std::uint64_t>(i));
        std::vector<double> bigger = z.values;
        double lift = 0.0;
        for (std::size_t k = 1; k < bigger.size(); ++k) {
            lift += 0.02 * rng.uniform01();
            bigger[k] += lift;
        }
        const ReflectedPair lo = reflect(z);
        const ReflectedPair hi = reflect(GridPath(z.step, std::move(bigger)));
        for (std::size_t k = 0; k < z.size(); ++k)
            CHECK(lo.x.values[k] <= hi.x.values[k] + 1e-15);
    }
}

TEST_CASE("reflection map is 2-Lipschitz in the sup norm", "[skorokhod]") {
    Rng rng(5);
    for (int i = 0; i < 30; ++i) {
        const GridPath a = random_walk(0.01, 300, 0.4, 2000 + static_cast<std::uint64_t>(i));
        std::vector<double> perturbed = a.values;
        double sup_in = 0.0;
        for (std::size_t k = 1; k < perturbed.size(); ++k) {
            const double d = 0.2 * (rng.uniform01() - 0.5);
            perturbed[k] += d;
            sup_in = std::max(sup_in, std::abs(d));
        }
        const GridPath b(a.step, std::move(perturbed));
        const double sup_out = sup_norm_diff(reflect(a).x, reflect(b).x);
        CHECK(sup_out <= 2.0 * sup_in + 1e-15);
    }
}

TEST_CASE("stieltjes defect conventions", "[skorokhod]") {
    // left-limit convention: the post-push value multiplies each increment
    const GridPath x(1.0, {1.0, 0.2, 0.0});
    const GridPath r(1.0, {0.0, 0.0, 0.4});
    CHECK(complementarity_defect(x, r) == 0.0);

    const GridPath ones(1.0, {1.0, 1.0, 1.0, 1.0});
    const GridPath ramp(1.0, {0.0, 1.0, 2.0, 3.0});
    CHECK(complementarity_defect(ones, ramp) == 3.0);

    CHECK_THROWS_AS(complementarity_defect(ones, GridPath(1.0, {0.0, 1.0})),
                    std::invalid_argument);
}

TEST_CASE("constant functionals reduce to the classical problem", "[skorokhod]") {
    const GridPath z = random_walk(0.01, 500, 0.3, 42);
    PathFunctional constant;
    constant.apply = [&z](const GridPath&) { return z; };
    constant.lipschitz_bound = [](double) { return 0.0; };
    const GspSolution sol = gsp_solve(constant, z.horizon(), z.step);
    const ReflectedPair direct = reflect(z);
    CHECK(sup_norm_diff(sol.x, direct.x) <= 1e-12);
    CHECK(sup_norm_diff(sol.r, direct.r) <= 1e-12);
    CHECK(sol.iterations <= 2);
}

TEST_CASE("gsp with integral feedback reproduces exponential decay", "[skorokhod]") {
    // G(x)(t) = 1 - int_0^t x  has the fixed point x(t) = e^{-t}, never reflected
    PathFunctional g;
    g.apply = [](const GridPath& x) {
        GridPath integral = cumulative_trapezoid(x);
        std::vector<double> out(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) out[k] = 1.0 - integral.values[k];
        return GridPath(x.step, std::move(out));
    };
    g.lipschitz_bound = [](double) { return 1.0; };
    const double h = 1e-3;
    const GspSolution sol = gsp_solve(g, 3.0, h);
    double sup = 0.0;
    for (std::size_t k = 0; k < sol.x.size(); ++k)
        sup = std::max(sup, std::abs(sol.x.values[k] - std::exp(-sol.x.time_at(k))));
    CHECK(sup <= 1e-5);
    CHECK(sol.r.values.back() == 0.0);
}

TEST_CASE("gsp residual contract and eventual contraction", "[skorokhod]") {
    const PathFunctional f = fluid_functional(1.0, 1.0, 1.0);
    const double h = 1e-3, tol = 1e-10;
    const GspSolution sol = gsp_solve(f, 5.0, h, tol);

    // returned path is a fixed point within tol
    const ReflectedPair again = reflect(f.apply(sol.x));
    CHECK(sup_norm_diff(again.x, sol.x) <= tol);

    // successive residuals decay monotonically once past the transient
    const auto& res = sol.residuals;
    REQUIRE(res.size() >= 5);
    const auto peak = static_cast<std::size_t>(
        std::distance(res.begin(), std::max_element(res.begin(), res.end())));
    for (std::size_t m = peak + 1; m < res.size(); ++m) CHECK(res[m] <= res[m - 1]);
    CHECK(res.back() <= tol);
}

TEST_CASE("gsp reports non-convergence with the last residual", "[skorokhod]") {
    const PathFunctional f = fluid_functional(1.0, 1.0, 1.0);
    try {
        gsp_solve(f, 5.0, 1e-3, 1e-10, 3);
        FAIL("expected GspNoConvergence");
    } catch (const GspNoConvergence& e) {
        CHECK(e.iterations == 3);
        CHECK(e.last_residual > 0.0);
    }
}

TEST_CASE("grid path validation", "[skorokhod]") {
    CHECK_THROWS_AS(GridPath(0.0, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(GridPath(1.0, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(gsp_solve(PathFunctional{}, 0.0, 1.0), std::invalid_argument);
}

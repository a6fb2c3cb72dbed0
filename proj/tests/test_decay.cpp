#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "storesim/decay.hpp"
#include "storesim/rng.hpp"

using namespace storesim;
using Catch::Approx;

TEST_CASE("psi starts at zero and inverts the first-loss limit", "[decay]") {
    CHECK(psi(1.0, 4.0, 1.0, 0.0) == 0.0);
    // t = 2 ln 2 - 1/2 is the limit time to lose half the files
    const double t_half = t_of_delta(1.0, 4.0, 1.0, 0.5);
    CHECK(t_half == Approx(0.8862943611198906).epsilon(1e-12));
    CHECK(psi(1.0, 4.0, 1.0, t_half) == Approx(0.5).margin(1e-11));
}

TEST_CASE("psi requires the stable regime", "[decay]") {
    CHECK_THROWS_AS(psi(1.0, 2.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(psi(1.0, 1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(psi(1.0, 4.0, 1.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(t_of_delta(1.0, 4.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(t_of_delta(1.0, 4.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("late-time expansion", "[decay]") {
    // beta - psi(t) ~ beta exp(-2 (beta + mu t) / rho) for large mu t
    const double beta = 1.0, rho = 4.0, mu = 1.0, t = 10.0;
    const double y = psi(beta, rho, mu, t);
    const double tail = beta - y;
    const double asym = beta * std::exp(-2.0 * (beta + mu * t) / rho);
    CHECK(std::abs(tail - asym) / tail <= 0.01);
}

TEST_CASE("fixed-point residuals stay tiny along the curve", "[decay]") {
    const DecayCurve curve = psi_curve(1.0, 4.0, 1.0, 10.0, 1e-2);
    REQUIRE(curve.psi.size() == 1001);
    CHECK(curve.psi.front() == 0.0);
    for (std::size_t k = 1; k < curve.psi.size(); ++k) {
        CHECK(curve.psi[k] > curve.psi[k - 1]); // strictly increasing
        CHECK(curve.psi[k] < curve.beta);
    }
    for (const double r : curve.residual) CHECK(r <= 1e-10);
}

TEST_CASE("degenerate horizon gives the single point psi(0)", "[decay]") {
    const DecayCurve curve = psi_curve(1.0, 4.0, 1.0, 0.0, 0.1);
    REQUIRE(curve.psi.size() == 1);
    CHECK(curve.psi[0] == 0.0);
    CHECK(curve.residual[0] == 0.0);
}

TEST_CASE("fixed point and ode integration agree", "[decay]") {
    const DecayCurve fp = psi_curve(1.0, 4.0, 1.0, 10.0, 1e-3);
    const DecayCurve ode = psi_ode(1.0, 4.0, 1.0, 10.0, 1e-3);
    REQUIRE(fp.psi.size() == ode.psi.size());
    double sup = 0.0;
    for (std::size_t k = 0; k < fp.psi.size(); ++k)
        sup = std::max(sup, std::abs(fp.psi[k] - ode.psi[k]));
    CHECK(sup <= 1e-5);
}

TEST_CASE("initial decay slope equals mu times the poisson loss rate", "[decay]") {
    // psi'(0) = 2 mu^2 beta / (lambda - 2 mu beta); with beta=1, mu=1,
    // lambda=4 this equals 1, the rate of the limiting loss process.
    const double h = 1e-3;
    const DecayCurve ode = psi_ode(1.0, 4.0, 1.0, 1.0, h);
    CHECK(ode.psi[1] / h == Approx(1.0).margin(0.01));
    for (std::size_t k = 1; k < ode.psi.size(); ++k) CHECK(ode.psi[k] > ode.psi[k - 1]);
}

TEST_CASE("psi and t_of_delta are mutually inverse", "[decay]") {
    const double beta = 1.0, rho = 4.0, mu = 1.0;
    for (int i = 1; i <= 99; ++i) {
        const double delta = static_cast<double>(i) / 100.0;
        const double t = t_of_delta(beta, rho, mu, delta);
        CHECK(std::abs(psi(beta, rho, mu, t) - delta * beta) <= 1e-10);
    }
    CHECK(t_of_delta(beta, rho, mu, 1e-9) <= 1e-8);
}

TEST_CASE("inverse consistency holds for other stable parameter sets", "[decay]") {
    Rng rng(21);
    for (int i = 0; i < 20; ++i) {
        const double beta = 0.2 + 2.0 * rng.uniform01();
        const double mu = 0.2 + 2.0 * rng.uniform01();
        const double rho = 2.0 * beta * (1.1 + 2.0 * rng.uniform01());
        const double delta = 0.05 + 0.9 * rng.uniform01();
        const double t = t_of_delta(beta, rho, mu, delta);
        CHECK(std::abs(psi(beta, rho, mu, t) - delta * beta) <= 1e-9);
    }
}

TEST_CASE("local equilibrium law", "[decay]") {
    const GeometricLaw at_zero = local_equilibrium(1.0, 4.0, 1.0, 0.0);
    CHECK(at_zero.ratio == 0.5); // 2 beta / rho, the marginal on the normal scale

    const GeometricLaw late = local_equilibrium(1.0, 4.0, 1.0, 50.0);
    CHECK(late.ratio <= 1e-10); // network nearly empty of single copies

    double mass = 0.0;
    for (std::int64_t k = 0; k < 80; ++k) mass += at_zero.pmf(k);
    CHECK(mass == Approx(1.0).margin(1e-12));
    CHECK(at_zero.mean() == Approx(1.0));
    CHECK(at_zero.tail(3) == Approx(0.125));
    CHECK_THROWS_AS(GeometricLaw(1.0), std::invalid_argument);
}

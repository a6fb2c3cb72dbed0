#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "storesim/csv.hpp"
#include "storesim/ctmc.hpp"
#include "storesim/decay.hpp"
#include "storesim/fluid.hpp"
#include "storesim/stats.hpp"

using namespace storesim;
using Catch::Approx;

TEST_CASE("step from a state with only the up transition", "[ctmc]") {
    const ModelParams p(2.0, 1.0, 10, 10);
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const StepResult sr = step(p, {3, 0}, rng);
        CHECK(sr.kind == JumpKind::Up);
        CHECK(sr.next == NetworkState{3, 1});
    }
}

TEST_CASE("step rejects the absorbing state", "[ctmc]") {
    const ModelParams p(2.0, 1.0, 10, 10);
    Rng rng(1);
    CHECK_THROWS_AS(step(p, {10, 0}, rng), std::invalid_argument);
}

TEST_CASE("step picks kinds proportionally to rates", "[ctmc]") {
    // rates (10, 20, 2) from state (3,2): P(dup) = 20/32 = 0.625
    const ModelParams p(2.0, 1.0, 10, 10);
    Rng rng(123);
    const int draws = 20000;
    int dup = 0;
    for (int i = 0; i < draws; ++i)
        if (step(p, {3, 2}, rng).kind == JumpKind::Dup) ++dup;
    const double freq = static_cast<double>(dup) / draws;
    CHECK(std::abs(freq - 0.625) <= 0.011); // 3 sigma for 20k draws
}

TEST_CASE("simulation from the absorbing point is empty", "[ctmc]") {
    const ModelParams p(2.0, 1.0, 10, 10);
    const Trajectory tr = simulate(p, {10, 0}, 5.0, 9);
    CHECK(tr.records.empty());
    CHECK(tr.absorbed);
}

TEST_CASE("fixed seeds reproduce byte-identical trajectories", "[ctmc]") {
    const ModelParams p(1.5, 1.0, 20, 25);
    const Trajectory a = simulate(p, {0, 0}, 8.0, 77);
    const Trajectory b = simulate(p, {0, 0}, 8.0, 77);
    const Trajectory c = simulate(p, {0, 0}, 8.0, 78);
    CHECK(to_csv(a) == to_csv(b));
    CHECK(to_csv(a) != to_csv(c));
    CHECK(validate_trajectory(a).empty());
}

TEST_CASE("piecewise-constant sampling", "[ctmc]") {
    const ModelParams p(1.0, 1.0, 5, 6);
    const Trajectory tr = simulate(p, {1, 2}, 4.0, 5);
    CHECK(sample_at(tr, 0.0) == NetworkState{1, 2});
    if (!tr.records.empty()) {
        const auto& rec = tr.records.front();
        CHECK(sample_at(tr, rec.time) == rec.after);
        CHECK(sample_at(tr, std::nextafter(rec.time, 0.0)) == tr.initial);
    }
    if (tr.absorbed) {
        CHECK(sample_at(tr, 1e9) == NetworkState{6, 0});
    } else {
        CHECK_THROWS_AS(sample_at(tr, 4.5), std::invalid_argument);
    }
    CHECK_THROWS_AS(sample_at(tr, -1.0), std::invalid_argument);
}

TEST_CASE("grid recording agrees with full recording", "[ctmc]") {
    const ModelParams p(2.5, 1.0, 30, 30);
    const std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 3.5, 5.0};
    const Trajectory full = simulate(p, {0, 0}, 5.0, 31);
    const GridRun thin = simulate_on_grid(p, {0, 0}, grid, 31);
    REQUIRE(thin.states.size() == grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        CHECK(thin.states[k] == sample_at(full, grid[k]));
}

TEST_CASE("monte carlo fluid point at n=5000", "[ctmc]") {
    // overloaded network: scaled mean at t=6 close to the fluid curve
    const ModelParams p(1.0, 1.0, 5000, 5000);
    double mean = 0.0;
    const int replicas = 20;
    for (int i = 0; i < replicas; ++i) {
        const GridRun run =
            simulate_on_grid(p, {0, 0}, std::vector<double>{6.0}, derive_stream_seed(404, static_cast<std::uint64_t>(i)));
        mean += static_cast<double>(run.states[0].x0);
    }
    mean /= static_cast<double>(replicas) * static_cast<double>(p.n);
    const double fluid_x0 = fluid_closed_form(1.0, 1.0, 1.0, 6.0).first;
    CHECK(std::abs(mean - fluid_x0) <= 0.02);
}

TEST_CASE("monte carlo loss count in the stable regime", "[ctmc][slowish]") {
    // Poisson losses at rate 2 mu beta / (rho - 2 beta) = 1: mean X0(10) near 10
    const ModelParams p(4.0, 1.0, 2000, 2000);
    double mean = 0.0;
    const int replicas = 500;
    for (int i = 0; i < replicas; ++i) {
        const GridRun run = simulate_on_grid(p, {0, 0}, std::vector<double>{10.0},
                                             derive_stream_seed(505, static_cast<std::uint64_t>(i)));
        mean += static_cast<double>(run.states[0].x0);
    }
    mean /= static_cast<double>(replicas);
    CHECK(std::abs(mean - 10.0) <= 0.5);
}

TEST_CASE("first-loss threshold of one file returns the first loss time", "[ctmc]") {
    const ModelParams p(1.0, 1.0, 10, 10);
    const std::uint64_t seed = 2024;
    const double t = first_loss_fraction_time(p, 0.05, seed); // ceil(0.5) = 1
    const Trajectory tr = simulate(p, {0, 0}, t + 1.0, seed);
    double first_loss = -1.0;
    for (const auto& rec : tr.records)
        if (rec.kind == JumpKind::Loss) {
            first_loss = rec.time;
            break;
        }
    CHECK(t == first_loss);
    CHECK_THROWS_AS(first_loss_fraction_time(p, 0.0, seed), std::invalid_argument);
    CHECK_THROWS_AS(first_loss_fraction_time(p, 1.0, seed), std::invalid_argument);
}

TEST_CASE("threshold rounding is robust to binary fractions", "[ctmc]") {
    // 0.1 * 500 is slightly above 50 in binary; the guard keeps ceil at 50,
    // so the returned time is the moment x0 reaches exactly 50
    const ModelParams p(4.0, 1.0, 500, 500);
    const std::uint64_t seed = 3;
    const double t = first_loss_fraction_time(p, 0.1, seed);
    const Trajectory tr = simulate(p, {0, 0}, t, seed);
    CHECK(tr.records.back().after.x0 == 50);
    CHECK(tr.records.back().time == t);
}

TEST_CASE("scaled first-loss times approach the closed-form limit", "[ctmc][slowish]") {
    {
        const ModelParams p(4.0, 1.0, 500, 500);
        double mean = 0.0;
        const int seeds = 20;
        for (int i = 0; i < seeds; ++i)
            mean += first_loss_fraction_time(p, 0.5, derive_stream_seed(606, static_cast<std::uint64_t>(i)));
        mean /= static_cast<double>(seeds) * static_cast<double>(p.n);
        const double limit = t_of_delta(1.0, 4.0, 1.0, 0.5); // 2 ln 2 - 1/2
        CHECK(std::abs(mean / limit - 1.0) <= 0.10);
    }
    {
        const ModelParams p(2.0, 1.0, 500, 250); // rho = 2, beta = 1/2: stable
        double mean = 0.0;
        const int seeds = 20;
        for (int i = 0; i < seeds; ++i)
            mean += first_loss_fraction_time(p, 1.0 - std::exp(-1.0),
                                             derive_stream_seed(707, static_cast<std::uint64_t>(i)));
        mean /= static_cast<double>(seeds) * static_cast<double>(p.n);
        const double limit = 1.0 - 0.5 * (1.0 - std::exp(-1.0)); // 0.6839...
        CHECK(limit == Approx(0.6839397).margin(1e-6));
        CHECK(std::abs(mean / limit - 1.0) <= 0.10);
    }
}

TEST_CASE("pure-death queue drains and stays empty", "[ctmc]") {
    const Mm1Path path = simulate_mm1(Mm1Params(0.0, 2.0), 5, 100.0, 8);
    for (std::size_t k = 1; k < path.values.size(); ++k)
        CHECK(path.values[k] < path.values[k - 1]);
    CHECK(path.values.back() == 0);
    CHECK(path.value_at(100.0) == 0);
}

TEST_CASE("queue at zero can only receive an arrival", "[ctmc]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Mm1Path path = simulate_mm1(Mm1Params(1.0, 2.0), 0, 5.0, seed);
        if (!path.values.empty()) CHECK(path.values.front() == 1);
    }
}

TEST_CASE("queue occupation approaches the geometric stationary law", "[ctmc]") {
    const Mm1Path path = simulate_mm1(Mm1Params(1.0, 2.0), 0, 50000.0, 99);
    const std::vector<double> occ = path.occupation(40);
    double tv = 0.0, tail = 1.0;
    for (std::size_t k = 0; k < occ.size(); ++k) {
        const double pk = 0.5 * std::pow(0.5, static_cast<double>(k));
        tv += std::abs(occ[k] - pk);
        tail -= pk;
    }
    CHECK(0.5 * (tv + tail) <= 0.03);
}

TEST_CASE("slow time scale marginal is the queue's geometric law", "[ctmc][slowish]") {
    // X1(t/n) for large n behaves like an M/M/1 with arrival 2 mu beta and
    // service lambda; by t = 25 that queue is essentially stationary, so the
    // marginal is geometric with ratio 2 beta / rho = 1/2.
    const ModelParams p(4.0, 1.0, 2000, 2000);
    const double slow_t = 25.0 / static_cast<double>(p.n);
    EmpiricalDist network;
    for (int i = 0; i < 2000; ++i) {
        const GridRun run = simulate_on_grid(p, {0, 0}, std::vector<double>{slow_t},
                                             derive_stream_seed(808, static_cast<std::uint64_t>(i)));
        network.add(run.states[0].x1);
    }
    const TestReport net_fit = chi_square_geometric(network, 0.5, 0.01);
    CHECK(net_fit.pass);

    EmpiricalDist queue;
    for (int i = 0; i < 2000; ++i)
        queue.add(simulate_mm1(Mm1Params(2.0, 4.0), 0, 25.0,
                               derive_stream_seed(909, static_cast<std::uint64_t>(i)))
                      .value_at(25.0));
    const TestReport queue_fit = chi_square_geometric(queue, 0.5, 0.01);
    CHECK(queue_fit.pass);
}

TEST_CASE("coupled runs never break domination", "[ctmc]") {
    const ModelParams p(4.0, 1.0, 100, 100);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const CoupledRun run = simulate_coupled_domination(p, 1.1, 3.0, seed);
        CHECK(max_domination_gap(run) <= 0);
        CHECK(validate_trajectory(run.network).empty());
    }
}

TEST_CASE("full-mass thinning accepts the first arrival", "[ctmc]") {
    // with f_n = beta0 n the acceptance probability at (0,0) is exactly 1,
    // so the first queue arrival is also a network up-jump
    const ModelParams p(4.0, 1.0, 100, 100);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CoupledRun run = simulate_coupled_domination(p, 1.0, 1.0, seed);
        if (run.queue.times.empty() || run.network.records.empty()) continue;
        std::size_t first_arrival = 0;
        while (first_arrival < run.queue.values.size() &&
               run.queue.values[first_arrival] == 0)
            ++first_arrival;
        REQUIRE(first_arrival < run.queue.times.size());
        CHECK(run.network.records.front().time <= run.queue.times[first_arrival]);
    }
}

TEST_CASE("coupling preconditions are enforced", "[ctmc]") {
    const ModelParams p(4.0, 1.0, 100, 100);
    CHECK_THROWS_AS(simulate_coupled_domination(p, 2.5, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(simulate_coupled_domination(p, 0.5, 1.0, 0), std::invalid_argument);
}

TEST_CASE("trajectory invariants over random configurations", "[ctmc]") {
    Rng rng(314);
    for (int c = 0; c < 40; ++c) {
        const double lambda = 0.2 + 4.0 * rng.uniform01();
        const double mu = 0.2 + 2.0 * rng.uniform01();
        const auto f_n = static_cast<std::int64_t>(1 + rng.uniform01() * 30);
        const ModelParams p(lambda, mu, 11, f_n);
        const Trajectory tr = simulate(p, {0, 0}, 3.0 + 10.0 * rng.uniform01(), rng.next_u64());
        CHECK(validate_trajectory(tr).empty());
    }
}

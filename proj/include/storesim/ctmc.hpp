#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "storesim/core.hpp"
#include "storesim/rng.hpp"

namespace storesim {

enum class JumpKind : std::uint8_t {
    Up,   // x1 + 1: a two-copy file degrades
    Dup,  // x1 - 1: a single-copy file regains its second copy
    Loss, // x0 + 1, x1 - 1: a single-copy file disappears for good
};

inline const char* to_string(JumpKind k) {
    switch (k) {
    case JumpKind::Up: return "up";
    case JumpKind::Dup: return "dup";
    default: return "loss";
    }
}

inline NetworkState apply_jump(NetworkState s, JumpKind k) {
    switch (k) {
    case JumpKind::Up: return {s.x0, s.x1 + 1};
    case JumpKind::Dup: return {s.x0, s.x1 - 1};
    default: return {s.x0 + 1, s.x1 - 1};
    }
}

struct JumpRecord {
    double time = 0.0;
    JumpKind kind = JumpKind::Up;
    NetworkState after;
};

struct Trajectory {
    ModelParams params;
    std::uint64_t seed = 0;
    NetworkState initial;
    std::vector<JumpRecord> records;
    bool absorbed = false;
    double horizon = 0.0;
};

struct StepResult {
    double holding = 0.0;
    NetworkState next;
    JumpKind kind = JumpKind::Up;
};

/// One jump of the chain: holding time ~ Exp(total rate), the kind chosen
/// with probability proportional to its rate. One exponential and one
/// uniform per event; the category order is fixed (up, dup, loss).
inline StepResult step(const ModelParams& p, NetworkState s, Rng& rng) {
    const TransitionRates r = transition_rates(p, s);
    const double total = r.total();
    if (!(total > 0.0))
        throw std::invalid_argument("step: no transition available (absorbing state)");
    const double holding = rng.exponential(total);
    const double u = rng.uniform01() * total;
    JumpKind kind;
    if (u < r.up)
        kind = JumpKind::Up;
    else if (u < r.up + r.dup)
        kind = JumpKind::Dup;
    else
        kind = JumpKind::Loss;
    return StepResult{holding, apply_jump(s, kind), kind};
}

/// Exact event-driven simulation until `horizon` or absorption at (f_n, 0).
/// Every jump is recorded; deterministic given the seed.
inline Trajectory simulate(const ModelParams& p, NetworkState initial, double horizon,
                           std::uint64_t seed) {
    if (!in_state_space(p, initial))
        throw std::invalid_argument("simulate: initial state outside the state space");
    if (!(horizon >= 0.0)) throw std::invalid_argument("simulate: horizon must be >= 0");

    Trajectory tr{p, seed, initial, {}, false, horizon};
    Rng rng(seed);
    NetworkState s = initial;
    double t = 0.0;
    while (true) {
        if (is_absorbing(p, s)) {
            tr.absorbed = true;
            break;
        }
        const StepResult sr = step(p, s, rng);
        const double jump_time = t + sr.holding;
        if (jump_time > horizon) break;
        tr.records.push_back(JumpRecord{jump_time, sr.kind, sr.next});
        s = sr.next;
        t = jump_time;
    }
    return tr;
}

/// State just after the last jump at or before t (piecewise-constant lookup).
inline NetworkState sample_at(const Trajectory& tr, double t) {
    if (t < 0.0) throw std::invalid_argument("sample_at: t must be >= 0");
    if (t > tr.horizon && !tr.absorbed)
        throw std::invalid_argument("sample_at: t beyond the horizon of an unabsorbed run");
    auto it = std::upper_bound(tr.records.begin(), tr.records.end(), t,
                               [](double v, const JumpRecord& r) { return v < r.time; });
    if (it == tr.records.begin()) return tr.initial;
    return std::prev(it)->after;
}

struct GridRun {
    ModelParams params;
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<NetworkState> states;
    bool absorbed = false;
};

/// Thinned-recording simulation: only the states at the given (ascending)
/// times are kept. Jump-for-jump identical to `simulate` with the same seed;
/// memory stays O(grid) even over horizons with O(n^2) events.
inline GridRun simulate_on_grid(const ModelParams& p, NetworkState initial,
                                std::span<const double> grid_times, std::uint64_t seed) {
    if (!in_state_space(p, initial))
        throw std::invalid_argument("simulate_on_grid: initial state outside the state space");
    if (grid_times.empty())
        throw std::invalid_argument("simulate_on_grid: empty grid");
    for (std::size_t i = 0; i < grid_times.size(); ++i) {
        if (grid_times[i] < 0.0 || (i > 0 && grid_times[i] < grid_times[i - 1]))
            throw std::invalid_argument("simulate_on_grid: grid must be ascending and >= 0");
    }

    GridRun run{p, seed, {grid_times.begin(), grid_times.end()}, {}, false};
    run.states.reserve(grid_times.size());
    Rng rng(seed);
    NetworkState s = initial;
    double t = 0.0;
    std::size_t idx = 0;
    while (idx < run.times.size()) {
        if (is_absorbing(p, s)) {
            run.absorbed = true;
            break;
        }
        const StepResult sr = step(p, s, rng);
        const double jump_time = t + sr.holding;
        while (idx < run.times.size() && run.times[idx] < jump_time) {
            run.states.push_back(s);
            ++idx;
        }
        s = sr.next;
        t = jump_time;
    }
    while (idx++ < run.times.size()) run.states.push_back(s);
    return run;
}

/// First time the count of lost files reaches ceil(delta * f_n).
/// The threshold is computed with a small relative nudge so that exact
/// products like 0.1 * 500 do not round up to 51.
inline double first_loss_fraction_time(const ModelParams& p, double delta,
                                       std::uint64_t seed) {
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("first_loss_fraction_time: delta must be in (0,1)");
    const double target = delta * static_cast<double>(p.f_n);
    auto threshold =
        static_cast<std::int64_t>(std::ceil(target - 1e-9 * std::max(1.0, target)));
    threshold = std::max<std::int64_t>(threshold, 1);

    Rng rng(seed);
    NetworkState s{0, 0};
    double t = 0.0;
    while (s.x0 < threshold) {
        if (is_absorbing(p, s)) return t; // unreachable for x0 < f_n; kept as a guard
        const StepResult sr = step(p, s, rng);
        t += sr.holding;
        s = sr.next;
    }
    return t;
}

// ---------------------------------------------------------------------------
// M/M/1 companion processes

struct Mm1Params {
    double arrival = 0.0;
    double service = 0.0;

    Mm1Params(double arrival_, double service_) : arrival(arrival_), service(service_) {
        if (arrival < 0.0) throw std::invalid_argument("Mm1Params: arrival must be >= 0");
        if (!(service > 0.0)) throw std::invalid_argument("Mm1Params: service must be > 0");
    }

    bool ergodic() const { return arrival < service; }
};

struct Mm1Path {
    Mm1Params params;
    std::uint64_t seed = 0;
    std::int64_t initial = 0;
    double horizon = 0.0;
    std::vector<double> times;
    std::vector<std::int64_t> values;

    std::int64_t value_at(double t) const {
        auto it = std::upper_bound(times.begin(), times.end(), t);
        if (it == times.begin()) return initial;
        return values[static_cast<std::size_t>(std::distance(times.begin(), it)) - 1];
    }

    /// Time-average occupation of each level over [0, horizon].
    std::vector<double> occupation(std::size_t levels) const {
        std::vector<double> occ(levels, 0.0);
        std::int64_t x = initial;
        double prev = 0.0;
        for (std::size_t k = 0; k < times.size(); ++k) {
            if (static_cast<std::size_t>(x) < levels) occ[static_cast<std::size_t>(x)] += times[k] - prev;
            prev = times[k];
            x = values[k];
        }
        if (static_cast<std::size_t>(x) < levels) occ[static_cast<std::size_t>(x)] += horizon - prev;
        for (auto& v : occ) v /= horizon;
        return occ;
    }
};

/// Birth-death queue: up at rate `arrival`, down at rate `service` while
/// positive. Used both as the slow-time-scale limit and as the dominating
/// process of the coupling below.
inline Mm1Path simulate_mm1(Mm1Params q, std::int64_t initial, double horizon,
                            std::uint64_t seed) {
    if (initial < 0) throw std::invalid_argument("simulate_mm1: initial must be >= 0");
    if (!(horizon >= 0.0)) throw std::invalid_argument("simulate_mm1: horizon must be >= 0");
    Mm1Path path{q, seed, initial, horizon, {}, {}};
    Rng rng(seed);
    std::int64_t x = initial;
    double t = 0.0;
    while (true) {
        const double down = x > 0 ? q.service : 0.0;
        const double total = q.arrival + down;
        if (!(total > 0.0)) break; // arrival == 0 and empty: stuck at 0
        const double jump_time = t + rng.exponential(total);
        if (jump_time > horizon) break;
        x += rng.uniform01() * total < q.arrival ? 1 : -1;
        path.times.push_back(jump_time);
        path.values.push_back(x);
        t = jump_time;
    }
    return path;
}

struct CoupledRun {
    Trajectory network;
    Mm1Path queue; // L(t): M/M/1 with arrival 2 mu beta0, service lambda, on sped-up time
};

/// Shared-source coupling that keeps X1(t) <= L(t) pathwise. Proposals:
///   arrivals at rate 2 mu beta0 n  -> L always steps up; X1 steps up with
///     acceptance probability (f_n - x0 - x1) / (beta0 n)  [<= 1 by precondition]
///   departures at rate lambda n    -> each process steps down when positive
///   losses at rate mu f_n          -> X1 only, accepted with probability x1 / f_n
/// The thinned network process follows exactly the transition rates of the
/// model; the queue is the dominating M/M/1 run at speed n.
inline CoupledRun simulate_coupled_domination(const ModelParams& p, double beta0,
                                              double horizon, std::uint64_t seed) {
    const double n = static_cast<double>(p.n);
    const double f_n = static_cast<double>(p.f_n);
    if (!(2.0 * p.mu * beta0 < p.lambda))
        throw std::invalid_argument("simulate_coupled_domination: need 2 mu beta0 < lambda");
    if (!(f_n <= beta0 * n))
        throw std::invalid_argument("simulate_coupled_domination: need f_n <= beta0 n");
    if (!(horizon >= 0.0))
        throw std::invalid_argument("simulate_coupled_domination: horizon must be >= 0");

    const double arr_rate = 2.0 * p.mu * beta0 * n;
    const double dep_rate = p.lambda * n;
    const double loss_rate = p.mu * f_n;
    const double total = arr_rate + dep_rate + loss_rate;

    CoupledRun run{Trajectory{p, seed, NetworkState{0, 0}, {}, false, horizon},
                   Mm1Path{Mm1Params(2.0 * p.mu * beta0 * n, p.lambda * n), seed, 0,
                           horizon, {}, {}}};
    Rng rng(seed);
    NetworkState s{0, 0};
    std::int64_t queue = 0;
    double t = 0.0;
    while (true) {
        const double jump_time = t + rng.exponential(total);
        if (jump_time > horizon) break;
        const double u = rng.uniform01() * total;
        if (u < arr_rate) {
            ++queue;
            run.queue.times.push_back(jump_time);
            run.queue.values.push_back(queue);
            const double accept = static_cast<double>(p.f_n - s.x0 - s.x1) / (beta0 * n);
            if (rng.uniform01() < accept) {
                s = apply_jump(s, JumpKind::Up);
                run.network.records.push_back(JumpRecord{jump_time, JumpKind::Up, s});
            }
        } else if (u < arr_rate + dep_rate) {
            if (queue > 0) {
                --queue;
                run.queue.times.push_back(jump_time);
                run.queue.values.push_back(queue);
            }
            if (s.x1 > 0) {
                s = apply_jump(s, JumpKind::Dup);
                run.network.records.push_back(JumpRecord{jump_time, JumpKind::Dup, s});
            }
        } else {
            if (rng.uniform01() * f_n < static_cast<double>(s.x1)) {
                s = apply_jump(s, JumpKind::Loss);
                run.network.records.push_back(JumpRecord{jump_time, JumpKind::Loss, s});
                if (is_absorbing(p, s)) run.network.absorbed = true;
            }
        }
        t = jump_time;
    }
    return run;
}

/// Largest value of X1 - L over the merged event times of a coupled run;
/// the domination guarantee is max gap <= 0.
inline std::int64_t max_domination_gap(const CoupledRun& run) {
    std::int64_t x1 = run.network.initial.x1;
    std::int64_t queue = run.queue.initial;
    std::int64_t gap = x1 - queue;
    std::size_t i = 0, j = 0;
    const auto& recs = run.network.records;
    const auto& q = run.queue;
    while (i < recs.size() || j < q.times.size()) {
        const double tn = i < recs.size() ? recs[i].time : std::numeric_limits<double>::infinity();
        const double tq = j < q.times.size() ? q.times[j] : std::numeric_limits<double>::infinity();
        if (tn <= tq) {
            x1 = recs[i].after.x1;
            ++i;
        }
        if (tq <= tn) {
            queue = q.values[j];
            ++j;
        }
        gap = std::max(gap, x1 - queue);
    }
    return gap;
}

/// Replays the jump kinds from the initial state and checks every record,
/// monotonicity of x0, strict time increase, conservation, and terminal
/// absorption. Returns a description of the first violation, or empty.
inline std::string validate_trajectory(const Trajectory& tr) {
    NetworkState s = tr.initial;
    double prev_time = 0.0;
    if (!in_state_space(tr.params, s)) return "initial state outside state space";
    for (std::size_t k = 0; k < tr.records.size(); ++k) {
        const JumpRecord& rec = tr.records[k];
        if (!(rec.time > prev_time))
            return "times not strictly increasing at record " + std::to_string(k);
        const NetworkState expect = apply_jump(s, rec.kind);
        if (expect != rec.after) return "replay mismatch at record " + std::to_string(k);
        if (rec.after.x0 < s.x0) return "x0 decreased at record " + std::to_string(k);
        if (!in_state_space(tr.params, rec.after))
            return "state outside state space at record " + std::to_string(k);
        if (is_absorbing(tr.params, s))
            return "jump out of the absorbing state at record " + std::to_string(k);
        s = rec.after;
        prev_time = rec.time;
    }
    if (tr.absorbed && !is_absorbing(tr.params, s))
        return "absorbed flag set but final state is not (f_n, 0)";
    return {};
}

} // namespace storesim

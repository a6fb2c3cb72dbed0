// Experiment runner: reads a flat JSON config, fans replicas out over
// threads, and writes CSV artifacts. `verify <suite>` runs the named
// verification suite and exits nonzero on any failing check.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "storesim/storesim.hpp"

namespace {

using namespace storesim;

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

struct CliOverrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::int64_t> replicas;
    std::optional<std::int64_t> parallelism;
};

ExperimentConfig load_config(const CliOverrides& cli, ExperimentKind expected_kind,
                             const std::string& suite = {}) {
    ExperimentConfig cfg;
    if (!cli.config_path.empty()) {
        cfg = parse_config(read_file(cli.config_path));
        if (cfg.kind != expected_kind)
            throw std::runtime_error(std::string("config kind '") + to_string(cfg.kind) +
                                     "' does not match the subcommand");
    } else {
        cfg.kind = expected_kind;
    }
    if (expected_kind == ExperimentKind::Verify) {
        if (!suite.empty()) {
            if (!cfg.verify_suite.empty() && cfg.verify_suite != suite)
                throw std::runtime_error("config verify suite '" + cfg.verify_suite +
                                         "' does not match the subcommand argument");
            cfg.verify_suite = suite;
        }
        if (cfg.verify_suite.empty())
            throw std::runtime_error("verify: no suite named (argument or config kind)");
    }
    if (cli.seed) cfg.seed = *cli.seed;
    if (cli.out) cfg.out = *cli.out;
    if (cli.replicas) cfg.replicas = *cli.replicas;
    if (cli.parallelism) cfg.parallelism = *cli.parallelism;
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
    return cfg;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& file) {
    const std::string dir = cfg.out.value_or(".");
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / file).string();
}

int run_simulate(const ExperimentConfig& cfg) {
    const ModelParams p = cfg.model();
    if (!cfg.horizon) throw ConfigError("horizon", "required for simulate");
    const NetworkState initial{cfg.x0.value_or(0), cfg.x1.value_or(0)};
    const std::int64_t replicas = cfg.replicas.value_or(1);
    const std::uint64_t seed = cfg.seed.value_or(0);
    const int parallelism = static_cast<int>(cfg.parallelism.value_or(0));

    std::vector<Trajectory> runs;
    runs.reserve(static_cast<std::size_t>(replicas));
    for (std::int64_t i = 0; i < replicas; ++i)
        runs.push_back(Trajectory{p, 0, initial, {}, false, 0.0});
    parallel_for_index(replicas, parallelism, [&](std::int64_t i) {
        runs[static_cast<std::size_t>(i)] = simulate(
            p, initial, *cfg.horizon, derive_stream_seed(seed, static_cast<std::uint64_t>(i)));
    });

    const std::string path = out_path(cfg, "trajectories.csv");
    write_file(path, to_csv(std::span<const Trajectory>(runs)));

    std::string summary = "replica,seed,events,absorbed,final_x0,final_x1\n";
    std::int64_t absorbed = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& tr = runs[i];
        const NetworkState last = tr.records.empty() ? tr.initial : tr.records.back().after;
        summary += format_int(static_cast<std::int64_t>(i)) + ',' + std::to_string(tr.seed) +
                   ',' + format_int(static_cast<std::int64_t>(tr.records.size())) + ',' +
                   (tr.absorbed ? "true" : "false") + ',' + format_int(last.x0) + ',' +
                   format_int(last.x1) + '\n';
        absorbed += tr.absorbed ? 1 : 0;
    }
    write_file(out_path(cfg, "summary.csv"), summary);

    std::cout << "simulate: " << replicas << " replica(s), " << absorbed
              << " absorbed, wrote " << path << "\n";
    return 0;
}

int run_fluid(const ExperimentConfig& cfg) {
    if (!cfg.lambda) throw ConfigError("lambda", "required for fluid");
    if (!cfg.mu) throw ConfigError("mu", "required for fluid");
    if (!cfg.horizon) throw ConfigError("horizon", "required for fluid");
    const double h = cfg.h.value_or(1e-3);
    double beta = 0.0;
    if (cfg.beta && !cfg.f_n)
        beta = *cfg.beta;
    else
        beta = cfg.model().beta();
    const FluidCurve curve = fluid_gsp(beta, *cfg.lambda, *cfg.mu, *cfg.horizon, h);
    const std::string path = out_path(cfg, "fluid.csv");
    write_file(path, to_csv(curve));
    std::cout << "fluid: " << curve.x0.size() << " grid points, wrote " << path << "\n";
    return 0;
}

int run_critical(const ExperimentConfig& cfg) {
    if (!cfg.lambda) throw ConfigError("lambda", "required for critical");
    if (!cfg.mu) throw ConfigError("mu", "required for critical");
    if (!cfg.horizon) throw ConfigError("horizon", "required for critical");
    const CriticalParams p(*cfg.lambda, *cfg.mu, cfg.gamma.value_or(0.0), cfg.y0.value_or(0.0));
    const double h = cfg.h.value_or(1e-3);
    const std::int64_t n_paths = cfg.replicas.value_or(5000);
    const EnsembleMoments m =
        ensemble_moments(p, *cfg.horizon, h, n_paths, cfg.seed.value_or(0),
                         NoiseMode::Normal, static_cast<int>(cfg.parallelism.value_or(0)));
    const std::string path = out_path(cfg, "critical_ensemble.csv");
    write_file(path, to_csv(m));
    std::cout << "critical: " << n_paths << " paths, wrote " << path << "\n";
    return 0;
}

int run_decay(const ExperimentConfig& cfg) {
    if (!cfg.lambda) throw ConfigError("lambda", "required for decay");
    if (!cfg.mu) throw ConfigError("mu", "required for decay");
    if (!cfg.horizon) throw ConfigError("horizon", "required for decay");
    double beta = 0.0;
    if (cfg.beta && !cfg.f_n)
        beta = *cfg.beta;
    else
        beta = cfg.model().beta();
    const double h = cfg.h.value_or(1e-3);
    const DecayCurve curve = psi_curve(beta, *cfg.lambda / *cfg.mu, *cfg.mu, *cfg.horizon, h);
    const std::string path = out_path(cfg, "decay.csv");
    write_file(path, to_csv(curve));
    std::cout << "decay: " << curve.psi.size() << " grid points, wrote " << path << "\n";
    return 0;
}

int run_verify(const ExperimentConfig& cfg) {
    VerifyOptions opt;
    opt.seed = cfg.seed;
    opt.parallelism = static_cast<int>(cfg.parallelism.value_or(0));

    std::vector<std::string> names;
    if (cfg.verify_suite == "all")
        names = suite_names();
    else
        names.push_back(cfg.verify_suite);

    bool all_pass = true;
    std::vector<TestReport> reports;
    for (const auto& name : names) {
        const SuiteResult suite = run_suite(name, opt);
        all_pass = all_pass && suite.pass();
        std::cout << "suite " << suite.name << ": " << (suite.pass() ? "PASS" : "FAIL") << "\n"
                  << to_text(suite.reports);
        reports.insert(reports.end(), suite.reports.begin(), suite.reports.end());
    }
    const std::string path = out_path(cfg, "verify_" + cfg.verify_suite + ".csv");
    write_file(path, to_csv(std::span<const TestReport>(reports)));
    std::cout << (all_pass ? "VERIFY PASS" : "VERIFY FAIL") << ", wrote " << path << "\n";
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"storesim: simulation and numerical verification of a replicated "
                 "storage network model"};
    app.require_subcommand(1);

    CliOverrides cli;
    std::string suite_arg;

    auto add_common = [&cli](CLI::App* cmd, bool config_required) {
        auto* c = cmd->add_option("--config", cli.config_path, "JSON config file");
        if (config_required) c->required();
        cmd->add_option("--seed", cli.seed, "base RNG seed (overrides config)");
        cmd->add_option("--out", cli.out, "output directory (overrides config)");
        cmd->add_option("--replicas", cli.replicas, "replica count (overrides config)");
        cmd->add_option("--parallelism", cli.parallelism,
                        "worker threads, 0 = hardware concurrency");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "event-driven network trajectories");
    add_common(simulate, true);
    CLI::App* fluid = app.add_subcommand("fluid", "fluid-limit curve via the GSP solver");
    add_common(fluid, true);
    CLI::App* critical = app.add_subcommand("critical", "reflected-SDE ensemble moments");
    add_common(critical, true);
    CLI::App* decay = app.add_subcommand("decay", "decay curve psi(t)");
    add_common(decay, true);
    CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", suite_arg, "suite name or 'all' (optional when the config names one)");
    add_common(verify, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return run_simulate(load_config(cli, storesim::ExperimentKind::Simulate));
        if (fluid->parsed())
            return run_fluid(load_config(cli, storesim::ExperimentKind::Fluid));
        if (critical->parsed())
            return run_critical(load_config(cli, storesim::ExperimentKind::Critical));
        if (decay->parsed())
            return run_decay(load_config(cli, storesim::ExperimentKind::Decay));
        if (verify->parsed())
            return run_verify(load_config(cli, storesim::ExperimentKind::Verify, suite_arg));
    } catch (const storesim::ConfigError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

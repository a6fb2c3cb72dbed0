#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "storesim/core.hpp"

namespace storesim {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& message)
        : std::runtime_error("config: field '" + field + "': " + message), field_(field) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

enum class ExperimentKind { Simulate, Fluid, Critical, Decay, Verify };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::Fluid: return "fluid";
    case ExperimentKind::Critical: return "critical";
    case ExperimentKind::Decay: return "decay";
    default: return "verify";
    }
}

/// Flat key-value experiment description. The file format is a flat JSON
/// object; keys are exactly the field names below. `f_n` wins over `beta`
/// when both are present (with a warning).
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Simulate;
    std::string verify_suite; // set when kind == Verify ("all" runs everything)

    std::optional<double> lambda;
    std::optional<double> mu;
    std::optional<std::int64_t> n;
    std::optional<std::int64_t> f_n;
    std::optional<double> beta;
    std::optional<double> horizon;
    std::optional<double> h;
    std::optional<std::int64_t> replicas;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::int64_t> parallelism;
    std::optional<double> gamma;
    std::optional<double> y0;
    std::optional<double> delta;
    std::optional<std::int64_t> x0;
    std::optional<std::int64_t> x1;

    std::vector<std::string> warnings;

    /// Resolves (lambda, mu, n, f_n|beta) into model parameters.
    ModelParams model() const {
        if (!lambda) throw ConfigError("lambda", "required for this experiment");
        if (!mu) throw ConfigError("mu", "required for this experiment");
        if (!n) throw ConfigError("n", "required for this experiment");
        if (f_n) return ModelParams(*lambda, *mu, *n, *f_n);
        if (beta) return ModelParams::with_beta(*lambda, *mu, *n, *beta);
        throw ConfigError("f_n", "either f_n or beta is required");
    }
};

namespace detail {

inline double get_positive(const nlohmann::json& v, const char* key) {
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    const double x = v.get<double>();
    if (!(x > 0.0)) throw ConfigError(key, "must be positive");
    return x;
}

inline double get_nonneg(const nlohmann::json& v, const char* key) {
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    const double x = v.get<double>();
    if (!(x >= 0.0)) throw ConfigError(key, "must be >= 0");
    return x;
}

inline std::int64_t get_positive_int(const nlohmann::json& v, const char* key) {
    if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < 1) throw ConfigError(key, "must be >= 1");
    return x;
}

} // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("<document>", "expected a flat JSON object");

    ExperimentConfig cfg;
    bool have_kind = false;
    for (const auto& [key, value] : doc.items()) {
        if (key == "kind") {
            if (!value.is_string()) throw ConfigError("kind", "expected a string");
            const std::string s = value.get<std::string>();
            if (s == "simulate")
                cfg.kind = ExperimentKind::Simulate;
            else if (s == "fluid")
                cfg.kind = ExperimentKind::Fluid;
            else if (s == "critical")
                cfg.kind = ExperimentKind::Critical;
            else if (s == "decay")
                cfg.kind = ExperimentKind::Decay;
            else if (s.rfind("verify:", 0) == 0) {
                cfg.kind = ExperimentKind::Verify;
                cfg.verify_suite = s.substr(7);
                if (cfg.verify_suite.empty())
                    throw ConfigError("kind", "verify: requires a suite name");
            } else
                throw ConfigError("kind",
                                  "unknown kind '" + s +
                                      "' (expected simulate|fluid|critical|decay|verify:<suite>)");
            have_kind = true;
        } else if (key == "lambda")
            cfg.lambda = detail::get_positive(value, "lambda");
        else if (key == "mu")
            cfg.mu = detail::get_positive(value, "mu");
        else if (key == "n")
            cfg.n = detail::get_positive_int(value, "n");
        else if (key == "f_n")
            cfg.f_n = detail::get_positive_int(value, "f_n");
        else if (key == "beta")
            cfg.beta = detail::get_positive(value, "beta");
        else if (key == "horizon")
            cfg.horizon = detail::get_nonneg(value, "horizon");
        else if (key == "h")
            cfg.h = detail::get_positive(value, "h");
        else if (key == "replicas")
            cfg.replicas = detail::get_positive_int(value, "replicas");
        else if (key == "seed") {
            if (!value.is_number_integer())
                throw ConfigError("seed", "expected an integer");
            cfg.seed = value.get<std::uint64_t>();
        } else if (key == "out") {
            if (!value.is_string()) throw ConfigError("out", "expected a string");
            cfg.out = value.get<std::string>();
        } else if (key == "parallelism")
            cfg.parallelism = detail::get_positive_int(value, "parallelism");
        else if (key == "gamma") {
            if (!value.is_number()) throw ConfigError("gamma", "expected a number");
            cfg.gamma = value.get<double>();
        } else if (key == "y0")
            cfg.y0 = detail::get_nonneg(value, "y0");
        else if (key == "delta") {
            if (!value.is_number()) throw ConfigError("delta", "expected a number");
            const double d = value.get<double>();
            if (!(d > 0.0) || !(d < 1.0)) throw ConfigError("delta", "must be in (0,1)");
            cfg.delta = d;
        } else if (key == "x0") {
            if (!value.is_number_integer()) throw ConfigError("x0", "expected an integer");
            const auto v = value.get<std::int64_t>();
            if (v < 0) throw ConfigError("x0", "must be >= 0");
            cfg.x0 = v;
        } else if (key == "x1") {
            if (!value.is_number_integer()) throw ConfigError("x1", "expected an integer");
            const auto v = value.get<std::int64_t>();
            if (v < 0) throw ConfigError("x1", "must be >= 0");
            cfg.x1 = v;
        } else
            throw ConfigError(key, "unknown key");
    }
    if (!have_kind) throw ConfigError("kind", "missing required key");
    if (cfg.f_n && cfg.beta)
        cfg.warnings.push_back("both f_n and beta supplied; beta ignored, f_n wins");
    return cfg;
}

} // namespace storesim

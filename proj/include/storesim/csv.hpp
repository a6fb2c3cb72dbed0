#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <system_error>

#include "storesim/critical.hpp"
#include "storesim/ctmc.hpp"
#include "storesim/decay.hpp"
#include "storesim/fluid.hpp"
#include "storesim/skorokhod.hpp"
#include "storesim/stats.hpp"

namespace storesim {

/// Shortest round-trip decimal form; '.' separator, no locale.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t v) { return std::to_string(v); }

inline std::string to_csv(const Trajectory& tr) {
    std::string out = "time,kind,x0,x1\n";
    for (const auto& rec : tr.records) {
        out += format_double(rec.time);
        out += ',';
        out += to_string(rec.kind);
        out += ',';
        out += format_int(rec.after.x0);
        out += ',';
        out += format_int(rec.after.x1);
        out += '\n';
    }
    return out;
}

inline std::string to_csv(std::span<const Trajectory> trajectories) {
    std::string out = "replica,time,kind,x0,x1\n";
    for (std::size_t r = 0; r < trajectories.size(); ++r) {
        for (const auto& rec : trajectories[r].records) {
            out += format_int(static_cast<std::int64_t>(r));
            out += ',';
            out += format_double(rec.time);
            out += ',';
            out += to_string(rec.kind);
            out += ',';
            out += format_int(rec.after.x0);
            out += ',';
            out += format_int(rec.after.x1);
            out += '\n';
        }
    }
    return out;
}

inline std::string to_csv(const GridPath& path, const char* value_name = "value") {
    std::string out = std::string("t,") + value_name + "\n";
    for (std::size_t k = 0; k < path.size(); ++k) {
        out += format_double(path.time_at(k));
        out += ',';
        out += format_double(path.values[k]);
        out += '\n';
    }
    return out;
}

inline std::string to_csv(const FluidCurve& curve) {
    std::string out = "t,x0,x1\n";
    for (std::size_t k = 0; k < curve.x0.size(); ++k) {
        out += format_double(curve.step * static_cast<double>(k));
        out += ',';
        out += format_double(curve.x0[k]);
        out += ',';
        out += format_double(curve.x1[k]);
        out += '\n';
    }
    return out;
}

inline std::string to_csv(const DecayCurve& curve) {
    std::string out = "t,psi,residual\n";
    for (std::size_t k = 0; k < curve.psi.size(); ++k) {
        out += format_double(curve.step * static_cast<double>(k));
        out += ',';
        out += format_double(curve.psi[k]);
        out += ',';
        out += format_double(curve.residual[k]);
        out += '\n';
    }
    return out;
}

inline std::string to_csv(const EnsembleMoments& m) {
    std::string out = "t,mean_y,var_y,stderr_y,mean_x0_scaled,stderr_x0_scaled\n";
    for (std::size_t k = 0; k < m.mean_y.size(); ++k) {
        out += format_double(m.step * static_cast<double>(k));
        out += ',';
        out += format_double(m.mean_y[k]);
        out += ',';
        out += format_double(m.var_y[k]);
        out += ',';
        out += format_double(m.stderr_y[k]);
        out += ',';
        out += format_double(m.mean_x0_scaled[k]);
        out += ',';
        out += format_double(m.stderr_x0_scaled[k]);
        out += '\n';
    }
    return out;
}

/// Line-oriented human-readable summary of a report batch.
inline std::string to_text(std::span<const TestReport> reports) {
    std::string out;
    for (const auto& r : reports) {
        out += r.pass ? "pass  " : "FAIL  ";
        out += r.name;
        out += "  statistic=";
        out += format_double(r.statistic);
        out += " threshold=";
        out += format_double(r.threshold);
        if (!r.description.empty()) {
            out += "  (";
            out += r.description;
            out += ')';
        }
        out += '\n';
    }
    return out;
}

inline std::string to_csv(std::span<const TestReport> reports) {
    std::string out = "name,statistic,threshold,pass\n";
    for (const auto& r : reports) {
        out += r.name;
        out += ',';
        out += format_double(r.statistic);
        out += ',';
        out += format_double(r.threshold);
        out += ',';
        out += r.pass ? "true" : "false";
        out += '\n';
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

} // namespace storesim

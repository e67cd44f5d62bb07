#pragma once

// CSV and JSON serialization for trajectories and reports. Files are written
// to a temporary sibling and renamed into place.

#include "fbvp/analysis.hpp"
#include "fbvp/errors.hpp"
#include "fbvp/rk_integrators.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

namespace fbvp::io {

/// 17 significant digits: round-trips every double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::config, "cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw Error(ErrorKind::config, "write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error(ErrorKind::config, "cannot rename into " + path.string() + ": " + ec.message());
    }
}

/// Header `x,u,du_dx`, nodes in order of increasing x.
inline std::string trajectory_csv(const Trajectory<2>& traj) {
    std::ostringstream os;
    os << "x,u,du_dx\n";
    const std::size_t n = traj.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = traj.direction() > 0 ? i : n - 1 - i;
        os << format_double(traj.x(k)) << ',' << format_double(traj.state(k)[0]) << ','
           << format_double(traj.state(k)[1]) << '\n';
    }
    return os.str();
}

inline std::string report_csv(const ConvergenceReport& rep) {
    std::ostringstream os;
    os << "parameter,free_boundary,missing_slope,residual,sup_error\n";
    for (const auto& p : rep.points) {
        os << format_double(p.parameter) << ',' << format_double(p.free_boundary) << ','
           << format_double(p.missing_slope) << ',' << format_double(p.residual) << ','
           << (p.sup_error ? format_double(*p.sup_error) : std::string()) << '\n';
    }
    return os.str();
}

inline nlohmann::ordered_json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json to_json(const ConvergenceReport& rep) {
    nlohmann::ordered_json j;
    j["sweep_variable"] = std::string(to_string(rep.sweep_variable));
    auto& pts = j["points"] = nlohmann::ordered_json::array();
    for (const auto& p : rep.points) {
        pts.push_back({{"parameter", p.parameter},
                       {"free_boundary", p.free_boundary},
                       {"missing_slope", p.missing_slope},
                       {"residual", p.residual},
                       {"sup_error", optional_number(p.sup_error)}});
    }
    j["estimated_rate"] = optional_number(rep.estimated_rate);
    j["estimated_K"] = optional_number(rep.estimated_K);
    return j;
}

} // namespace fbvp::io

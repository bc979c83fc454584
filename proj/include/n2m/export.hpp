#pragma once

// CSV, JSON and SVG writers for trajectories and reports.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "n2m/engine.hpp"
#include "n2m/swarm.hpp"

namespace n2m {

inline constexpr const char* kTrajectoryCsvHeader = "t,norm,omega,delta,epsilon_t,flops,events";
inline constexpr const char* kCollectiveCsvHeader = "t,sum_delta,active_count";

/// %.12g, the fixed precision of every numeric CSV field.
inline std::string fmt12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::string trajectory_csv(const Trajectory& traj) {
    std::string out = kTrajectoryCsvHeader;
    out += '\n';
    for (const auto& r : traj.records) {
        out += std::to_string(r.t);
        for (double v : {r.norm, r.omega, r.delta, r.epsilon, r.flops}) {
            out += ',';
            out += fmt12(v);
        }
        out += ',';
        out += event_names(r.events);
        out += '\n';
    }
    return out;
}

inline std::string collective_csv(const SwarmTrajectory& traj) {
    std::string out = kCollectiveCsvHeader;
    out += '\n';
    for (const auto& c : traj.collective)
        out += std::to_string(c.t) + ',' + fmt12(c.sum_delta) + ',' + std::to_string(c.active) + '\n';
    return out;
}

inline nlohmann::json drift_matrix_json(const DriftMatrix& d) {
    return {{"matrix", d.entries}, {"spectral_radius", d.spectral_radius}, {"tolerance", d.tolerance}};
}

/// Writes via a sibling temporary and rename, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    require(!ec, ErrorCode::IoError, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(f), ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        require(static_cast<bool>(f), ErrorCode::IoError, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    require(!ec, ErrorCode::IoError, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    require(static_cast<bool>(f), ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// SVG

struct PlotSeries {
    std::string label;
    std::vector<double> values;  // y at t = 0, 1, ...
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

}  // namespace detail

/// Norm against t: axes, one polyline per series, a dashed line at Gamma.
inline std::string svg_plot(const std::vector<PlotSeries>& series, double gamma, const std::string& title) {
    constexpr double W = 640, H = 400, L = 60, R = 20, T = 30, B = 40;
    std::size_t n = 1;
    double ymax = gamma;
    for (const auto& s : series) {
        n = std::max(n, s.values.size());
        for (double v : s.values)
            if (std::isfinite(v)) ymax = std::max(ymax, v);
    }
    if (ymax <= 0) ymax = 1;
    const double xspan = static_cast<double>(std::max<std::size_t>(n - 1, 1));
    auto px = [&](double t) { return L + (W - L - R) * t / xspan; };
    auto py = [&](double y) { return H - B - (H - T - B) * std::min(y, ymax) / ymax; };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
    out += "<title>" + detail::xml_escape(title) + "</title>\n";
    out += "<line class=\"axis\" x1=\"" + fmt12(L) + "\" y1=\"" + fmt12(H - B) + "\" x2=\"" + fmt12(W - R) + "\" y2=\"" +
           fmt12(H - B) + "\" stroke=\"black\"/>\n";
    out += "<line class=\"axis\" x1=\"" + fmt12(L) + "\" y1=\"" + fmt12(T) + "\" x2=\"" + fmt12(L) + "\" y2=\"" +
           fmt12(H - B) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt12(W - R) + "\" y=\"" + fmt12(H - 10) + "\" text-anchor=\"end\">t = " +
           std::to_string(n - 1) + "</text>\n";
    out += "<text x=\"5\" y=\"" + fmt12(T) + "\">" + fmt12(ymax) + "</text>\n";
    out += "<line class=\"gamma\" x1=\"" + fmt12(L) + "\" y1=\"" + fmt12(py(gamma)) + "\" x2=\"" + fmt12(W - R) +
           "\" y2=\"" + fmt12(py(gamma)) + "\" stroke=\"red\" stroke-dasharray=\"4 4\"/>\n";
    static constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#17becf"};
    std::size_t idx = 0;
    for (const auto& s : series) {
        // thin long series to at most ~2000 vertices
        const std::size_t stride = std::max<std::size_t>(1, s.values.size() / 2000);
        out += "<polyline fill=\"none\" stroke=\"" + std::string(kColors[idx++ % 6]) + "\" points=\"";
        for (std::size_t t = 0; t < s.values.size(); t += stride) {
            if (t) out += ' ';
            out += fmt12(px(static_cast<double>(t))) + ',' + fmt12(py(s.values[t]));
        }
        out += "\"><title>" + detail::xml_escape(s.label) + "</title></polyline>\n";
    }
    out += "</svg>\n";
    return out;
}

// ---------------------------------------------------------------------------
// JSON summaries

inline nlohmann::json record_json(const Record& r) {
    return {{"t", r.t}, {"norm", r.norm}, {"omega", r.omega}, {"delta", r.delta},
            {"epsilon_t", r.epsilon}, {"flops", r.flops}, {"events", event_names(r.events)}};
}

inline nlohmann::json drift_json(const DriftReport& r) {
    return {{"passed", r.passed}, {"t0", r.t0}, {"steps_checked", r.steps_checked},
            {"per_step_violations", r.per_step_violations}, {"cumulative_violations", r.cumulative_violations},
            {"min_step_margin", std::isfinite(r.min_step_margin) ? nlohmann::json(r.min_step_margin) : nlohmann::json()},
            {"mean_drift", r.mean_drift}, {"drift_bound", r.drift_bound}, {"standard_error", r.standard_error},
            {"masked_steps", r.masked_steps}};
}

inline nlohmann::json swarm_json(const SwarmTrajectory& traj, const CollectiveGainReport& gain) {
    nlohmann::json agents = nlohmann::json::array();
    for (std::size_t i = 0; i < traj.agents.size(); ++i) {
        const auto& g = gain.per_agent[i];
        agents.push_back({{"agent", i + 1}, {"final_norm", traj.agents[i].final_norm}, {"mean_delta", g.observed},
                          {"bound", g.bound}, {"standard_error", g.standard_error}, {"passed", g.passed},
                          {"activity", gain.activity[i]}});
    }
    return {{"seed", traj.seed}, {"delta_solo", traj.delta_solo}, {"beta_used", gain.beta_used},
            {"uniform_beta", gain.uniform}, {"agents", agents},
            {"collective", {{"mean", gain.collective.observed}, {"bound", gain.collective.bound},
                            {"standard_error", gain.collective.standard_error}, {"passed", gain.collective.passed}}},
            {"passed", gain.passed}};
}

}  // namespace n2m

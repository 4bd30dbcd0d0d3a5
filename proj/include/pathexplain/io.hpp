#pragma once
// Serialization for attribution/interaction results (CSV and JSON) and the
// per-run manifest that records how an artifact directory was produced.

#include <fstream>
#include <string>
#include <vector>

#include "pathexplain/attribution.hpp"
#include "pathexplain/interaction.hpp"
#include "pathexplain/model_io.hpp"

namespace pathexplain {

namespace detail {

inline json baseline_to_json(const BaselineInfo& b) {
    json j{{"kind", b.kind == BaselineKind::single ? "single" : "background"},
           {"content_hash", b.content_hash}};
    if (b.kind == BaselineKind::single) {
        j["x_prime"] = b.x_prime;
    } else {
        j["n_samples"] = b.n_samples;
        j["seed"] = b.seed;
        j["mean"] = b.x_prime;
    }
    return j;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace detail

/// CSV: one row per feature with its attribution, input value, and baseline
/// value (mean baseline for background policies).
inline void save_attribution_csv(const std::string& path, const AttributionVector& a) {
    auto out = detail::open_out(path);
    out << "feature_index,phi,x_value,baseline_value\n";
    for (std::size_t i = 0; i < a.values.size(); ++i)
        out << i << "," << format_double(a.values[i]) << "," << format_double(a.x[i]) << ","
            << format_double(a.baseline.x_prime[i]) << "\n";
}

inline void save_attribution_json(const std::string& path, const AttributionVector& a) {
    json j{{"phi", a.values},
           {"x", a.x},
           {"reference_output", a.reference_output},
           {"input_output", a.input_output},
           {"completeness_residual", completeness_residual(a)},
           {"k", a.k},
           {"scheme", a.scheme == QuadScheme::right_endpoint ? "right-endpoint" : "midpoint"},
           {"baseline", detail::baseline_to_json(a.baseline)}};
    detail::open_out(path) << j.dump(2) << "\n";
}

/// CSV: lower triangle including the diagonal, one row per (i, j) with i >= j.
inline void save_interaction_csv(const std::string& path, const InteractionMatrix& m) {
    auto out = detail::open_out(path);
    out << "i,j,gamma,method\n";
    for (std::size_t i = 0; i < m.gamma.rows; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            out << i << "," << j << "," << format_double(m.gamma(i, j)) << "," << m.method << "\n";
}

inline void save_interaction_json(const std::string& path, const InteractionMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.gamma.rows; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.gamma.cols; ++j) row.push_back(m.gamma(i, j));
        rows.push_back(std::move(row));
    }
    json j{{"gamma", std::move(rows)},
           {"method", m.method},
           {"x", m.x},
           {"reference_output", m.reference_output},
           {"input_output", m.input_output},
           {"k", m.k},
           {"m", m.m},
           {"scheme", m.scheme == QuadScheme::right_endpoint ? "right-endpoint" : "midpoint"},
           {"n_path_evals", m.n_path_evals},
           {"baseline", detail::baseline_to_json(m.baseline)}};
    detail::open_out(path) << j.dump(2) << "\n";
}

/// Record of one CLI run: the exact command, resolved flag values, seed,
/// produced artifacts, library version, and wall-clock duration. Exactly one
/// manifest is written per output directory.
struct RunManifest {
    std::string command;                 // subcommand path, e.g. "bench roar"
    json flags = json::object();         // resolved flag values
    std::uint64_t seed = 0;              // effective root seed
    std::vector<std::string> artifacts;  // paths written, relative to the directory
    double duration_seconds = 0.0;
};

inline void save_run_manifest(const std::string& path, const RunManifest& m) {
    json j{{"command", m.command},      {"flags", m.flags},
           {"seed", m.seed},            {"artifacts", m.artifacts},
           {"version", kVersion},       {"duration_seconds", m.duration_seconds}};
    detail::open_out(path) << j.dump(2) << "\n";
}

}  // namespace pathexplain

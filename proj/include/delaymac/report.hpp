#pragma once

// CSV/JSON emitters for every result type, and the run manifest written next
// to CLI outputs. Numbers use shortest round-trip formatting.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "delaymac/bias.hpp"
#include "delaymac/config.hpp"
#include "delaymac/design_space.hpp"
#include "delaymac/energy.hpp"
#include "delaymac/multiplier.hpp"
#include "delaymac/units.hpp"

namespace delaymac::report {

inline constexpr const char* tool_version = "0.3.0";

/// 64-bit FNV-1a, hex encoded.
inline std::string digest(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string config_hash(const Config& c) { return digest(config_to_json(c).dump()); }

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    std::string tool_version = report::tool_version;

    nlohmann::json to_json() const {
        return {{"command", command},
                {"config_hash", config_hash},
                {"seed", seed},
                {"outputs", outputs},
                {"tool_version", tool_version}};
    }
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// --- design space -----------------------------------------------------------

inline std::string region_csv(const design::DesignRegion& r) {
    std::string s = "c_star,i_star,c1,c2,c3,feasible\n";
    for (std::size_t a = 0; a < r.grid_cstar.size(); ++a)
        for (std::size_t b = 0; b < r.grid_istar.size(); ++b) {
            s += format_double(r.grid_cstar[a]) + ',' + format_double(r.grid_istar[b]) + ',';
            s += r.mask_c1(a, b) ? "1," : "0,";
            s += r.mask_c2(a, b) ? "1," : "0,";
            s += r.mask_c3(a, b) ? "1," : "0,";
            s += r.feasible(a, b) ? "1\n" : "0\n";
        }
    return s;
}

inline nlohmann::json region_summary(const design::DesignRegion& r, double epsilon) {
    nlohmann::json j;
    j["n_bits"] = r.n_bits;
    j["epsilon"] = epsilon;
    j["grid"] = {{"c_star", {r.grid_cstar.front(), r.grid_cstar.back(), r.grid_cstar.size()}},
                 {"i_star", {r.grid_istar.front(), r.grid_istar.back(), r.grid_istar.size()}}};
    j["counts"] = {{"c1", r.mask_c1.count()},
                   {"c2", r.mask_c2.count()},
                   {"c3", r.mask_c3.count()},
                   {"feasible", r.feasible.count()}};
    j["feasible"] = !r.empty();
    if (r.empty()) {
        j["optimum"] = nullptr;
        j["bounds"] = nullptr;
        return j;
    }
    const auto [c, i] = design::optimal_point(r);
    j["optimum"] = {{"c_star", c}, {"i_star", i}};
    double c_lo = 1e300, c_hi = 0, i_lo = 1e300, i_hi = 0;
    for (std::size_t a = 0; a < r.grid_cstar.size(); ++a)
        for (std::size_t b = 0; b < r.grid_istar.size(); ++b)
            if (r.feasible(a, b)) {
                c_lo = std::min(c_lo, r.grid_cstar[a]);
                c_hi = std::max(c_hi, r.grid_cstar[a]);
                i_lo = std::min(i_lo, r.grid_istar[b]);
                i_hi = std::max(i_hi, r.grid_istar[b]);
            }
    j["bounds"] = {{"c_star", {c_lo, c_hi}}, {"i_star", {i_lo, i_hi}}};
    return j;
}

inline nlohmann::json calibration_json(const design::CalibrationResult& r) {
    nlohmann::json targets = nlohmann::json::array();
    for (std::size_t k = 0; k < r.target_labels.size(); ++k)
        targets.push_back({{"target", r.target_labels[k]},
                           {"met", k < r.targets_met.size() ? nlohmann::json(bool(r.targets_met[k])) : nlohmann::json(nullptr)}});
    return {{"unit_scale", {r.unit_scale.sd, r.unit_scale.td}},
            {"sd_convention", r.sd_convention.label()},
            {"td_convention", r.td_convention.label()},
            {"global_scale", r.global_scale},
            {"residual", r.residual},
            {"targets", targets}};
}

/// Reads a persisted calibration back into a UnitScale.
inline UnitScale unit_scale_from_json(const nlohmann::json& j) {
    if (!j.contains("unit_scale") || !j["unit_scale"].is_array() || j["unit_scale"].size() != 2)
        throw ParseError("calibration file lacks unit_scale [sd, td]");
    return {j["unit_scale"][0].get<double>(), j["unit_scale"][1].get<double>()};
}

// --- multiplier -------------------------------------------------------------

/// When `positive_means_greater_va` is set the delay sign is flipped so that
/// V_A > V_A0 with positive W reads as a positive product.
inline std::string sweep_csv(const std::vector<mult::SweepRow>& rows, bool positive_means_greater_va = false) {
    std::string s = "v_a,w,s,delta_t_s,model,seed\n";
    for (const auto& r : rows) {
        const double dt = positive_means_greater_va ? -r.delta_t : r.delta_t;
        s += format_double(r.v_a) + ',' + std::to_string(r.w) + ',' + std::to_string(r.s) + ',' + format_double(dt) +
             ',' + mult::to_string(r.model) + ',' + (r.seed ? std::to_string(*r.seed) : std::string()) + '\n';
    }
    return s;
}

inline nlohmann::json multiply_trace_json(const mult::MultiplyResult& r) {
    return {{"out", {{"t_var", r.out.t_var}, {"t_ref", r.out.t_ref}}},
            {"delta_t", r.delta_t},
            {"per_bit_delays", r.per_bit_delays},
            {"warnings", r.warnings}};
}

// --- energy -----------------------------------------------------------------

inline nlohmann::json energy_json(const energy::EnergyBreakdown& e, int n_bits) {
    const auto row = [&](const char* name, double v) {
        return nlohmann::json{{"component", name}, {"energy_per_mac_j", v}, {"energy_per_mac_per_bit_j", v / n_bits}};
    };
    return {{"mode", energy::to_string(e.mode)},
            {"n_bits", n_bits},
            {"components",
             {row("E_C*", e.e_cstar), row("E_TD1", e.e_td1), row("E_TD2", e.e_td2), row("E_PU", e.e_pu),
              row("E_INV", e.e_inv)}},
            {"total", e.total},
            {"per_bit", e.per_bit}};
}

inline std::string energy_csv(const energy::EnergyBreakdown& e, int n_bits) {
    std::string s = "component,energy_per_mac_j,energy_per_mac_per_bit_j\n";
    const auto row = [&](const char* name, double v) {
        s += std::string(name) + ',' + format_double(v) + ',' + format_double(v / n_bits) + '\n';
    };
    row("E_C*", e.e_cstar);
    row("E_TD1", e.e_td1);
    row("E_TD2", e.e_td2);
    row("E_PU", e.e_pu);
    row("E_INV", e.e_inv);
    row("Total", e.total);
    return s;
}

// --- bias -------------------------------------------------------------------

inline nlohmann::json bias_json(const bias::BiasPlan& p) {
    const auto rows = [](const std::vector<bias::Sizing>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& s : v) a.push_back({{"fet", s.label}, {"width", s.width}, {"length", s.length}});
        return a;
    };
    nlohmann::json scaling = nlohmann::json::array();
    for (const auto& b : p.widths.scaling) scaling.push_back(rows(b));
    return {{"n_bits", p.n_bits},
            {"widths", {{"source", rows(p.widths.source)}, {"scaling", scaling}}},
            {"currents", p.currents},
            {"v_b1", p.v_b1},
            {"v_b2", p.v_b2}};
}

inline std::string bias_csv(const bias::BiasPlan& p) {
    std::string s = "i,current_a,v_b1,v_b2\n";
    for (std::size_t i = 0; i < p.currents.size(); ++i)
        s += std::to_string(i) + ',' + format_double(p.currents[i]) + ',' + format_double(p.v_b1[i]) + ',' +
             format_double(p.v_b2[i]) + '\n';
    return s;
}

}  // namespace delaymac::report

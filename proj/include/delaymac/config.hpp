#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "delaymac/model.hpp"
#include "delaymac/units.hpp"

namespace delaymac {

/// Everything a run needs, after defaults and validation.
struct Config {
    TechnologyProfile tech;
    CellDesign cell;
    MultiplierSpec multiplier;
    JitterFit fit;
    /// One line per key that was not in the file, e.g. "c_re = 3.82e-16 (default)".
    std::vector<std::string> provenance;
};

namespace detail {

inline double quantity_from_json(const nlohmann::json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        try {
            return parse_quantity(v.get<std::string>());
        } catch (const ParseError& e) {
            throw ValidationError(key, e.what());
        }
    }
    throw ValidationError(key, "expected a number or a suffixed quantity string");
}

inline int int_from_json(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number_integer()) throw ValidationError(key, "expected an integer");
    return v.get<int>();
}

/// Field table: json key -> (reader, writer). Kept in one place so load and
/// serialize cannot drift apart.
struct Field {
    std::function<void(Config&, const nlohmann::json&, const std::string&)> read;
    std::function<nlohmann::json(const Config&)> write;
};

template <typename Member>
Field scalar_field(Member member) {
    return {
        [member](Config& c, const nlohmann::json& v, const std::string& key) {
            c.*member.first.*member.second = quantity_from_json(v, key);
        },
        [member](const Config& c) { return nlohmann::json(c.*member.first.*member.second); }};
}

inline const std::map<std::string, Field>& fields() {
    using nlohmann::json;
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        const auto tech = [&](const char* k, double TechnologyProfile::*m) {
            t[k] = scalar_field(std::pair{&Config::tech, m});
        };
        const auto cell = [&](const char* k, double CellDesign::*m) {
            t[k] = scalar_field(std::pair{&Config::cell, m});
        };
        const auto fit = [&](const char* k, double JitterFit::*m) {
            t[k] = scalar_field(std::pair{&Config::fit, m});
        };
        tech("v_dd", &TechnologyProfile::v_dd);
        tech("v_thn", &TechnologyProfile::v_thn);
        tech("v_thp", &TechnologyProfile::v_thp);
        tech("v_t", &TechnologyProfile::v_t);
        tech("i_0", &TechnologyProfile::i_0);
        tech("gamma", &TechnologyProfile::gamma);
        tech("mu_wl_cox", &TechnologyProfile::mu_wl_cox);
        tech("temperature", &TechnologyProfile::temperature);
        cell("c_star", &CellDesign::c_star);
        cell("c_s_eff", &CellDesign::c_s_eff);
        cell("dq_of_md", &CellDesign::dq_of_md);
        cell("dq_of_pd", &CellDesign::dq_of_pd);
        cell("c_re", &CellDesign::c_re);
        cell("i_star", &CellDesign::i_star);
        fit("k1", &JitterFit::k1);
        fit("p1", &JitterFit::p1);
        fit("k2", &JitterFit::k2);
        fit("q2", &JitterFit::q2);

        // v_a0 is shared by the cell template and the multiplier.
        t["v_a0"] = {[](Config& c, const json& v, const std::string& key) {
                         c.cell.v_a0 = c.multiplier.v_a0 = quantity_from_json(v, key);
                     },
                     [](const Config& c) { return json(c.cell.v_a0); }};
        t["i_star_fastest"] = {[](Config& c, const json& v, const std::string& key) {
                                   c.multiplier.i_star_fastest = quantity_from_json(v, key);
                               },
                               [](const Config& c) { return json(c.multiplier.i_star_fastest); }};
        t["n_bits"] = {[](Config& c, const json& v, const std::string& key) {
                           c.multiplier.n_bits = int_from_json(v, key);
                       },
                       [](const Config& c) { return json(c.multiplier.n_bits); }};
        t["sign"] = {[](Config& c, const json& v, const std::string& key) {
                         c.multiplier.sign = int_from_json(v, key);
                     },
                     [](const Config& c) { return json(c.multiplier.sign); }};
        t["weight_bits"] = {[](Config& c, const json& v, const std::string& key) {
                                if (!v.is_array()) throw ValidationError(key, "expected an array");
                                c.multiplier.weight_bits.clear();
                                for (const auto& b : v) c.multiplier.weight_bits.push_back(int_from_json(b, key));
                            },
                            [](const Config& c) { return json(c.multiplier.weight_bits); }};
        t["pair_factor"] = {[](Config& c, const json& v, const std::string& key) {
                                c.fit.pair_factor = int_from_json(v, key);
                            },
                            [](const Config& c) { return json(c.fit.pair_factor); }};
        t["unit_scale"] = {[](Config& c, const json& v, const std::string& key) {
                               if (v.is_null()) {
                                   c.fit.unit_scale.reset();
                                   return;
                               }
                               if (!v.is_array() || v.size() != 2)
                                   throw ValidationError(key, "expected [sd_scale, td_scale] or null");
                               c.fit.unit_scale = UnitScale{quantity_from_json(v[0], key),
                                                            quantity_from_json(v[1], key)};
                           },
                           [](const Config& c) {
                               if (!c.fit.unit_scale) return json(nullptr);
                               return json::array({c.fit.unit_scale->sd, c.fit.unit_scale->td});
                           }};
        return t;
    }();
    return table;
}

}  // namespace detail

inline void validate(const Config& c) {
    c.tech.validate();
    c.cell.validate();
    c.multiplier.validate();
    c.fit.validate();
    if (c.cell.v_a0 > c.tech.v_dd) throw ValidationError("v_a0", "must not exceed v_dd");
}

/// Builds a validated Config from a parsed JSON object. Unknown keys are rejected.
inline Config config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("config root must be a JSON object");
    const auto& table = detail::fields();
    for (const auto& [key, _] : j.items())
        if (!table.count(key)) throw ValidationError(key, "unknown configuration key");

    Config c;
    // weight_bits has to follow n_bits when only n_bits is given
    bool bits_given = j.contains("weight_bits");
    for (const auto& [key, field] : table) {
        if (j.contains(key)) {
            field.read(c, j.at(key), key);
        }
    }
    if (j.contains("n_bits") && !bits_given) c.multiplier.weight_bits.assign(std::max(c.multiplier.n_bits, 0), 1);
    // v_t follows temperature unless it was set explicitly
    if (j.contains("temperature") && !j.contains("v_t")) c.tech.v_t = thermal_voltage(c.tech.temperature);

    for (const auto& [key, field] : table)
        if (!j.contains(key)) c.provenance.push_back(key + " = " + field.write(c).dump() + " (default)");

    validate(c);
    return c;
}

inline Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("config '" + path.string() + "': " + e.what());
    }
    return config_from_json(j);
}

/// Every key with its resolved value; feeding this back to config_from_json
/// reproduces the same Config bit for bit.
inline nlohmann::json config_to_json(const Config& c) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, field] : detail::fields()) j[key] = field.write(c);
    return j;
}

}  // namespace delaymac

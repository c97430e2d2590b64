#pragma once

// Algebraic model of the two-branch bias generator: a source branch turning
// V_REF into I_bias, and a scaling branch producing 2^-i currents with their
// primary (V_B1) and secondary (V_B2) gate biases.

#include <cmath>
#include <string>
#include <vector>

#include "delaymac/error.hpp"
#include "delaymac/model.hpp"

namespace delaymac::bias {

struct Sizing {
    std::string label;
    double width = 1.0;   // multiple of 160 nm
    double length = 1.0;  // multiple of 120 nm
};

/// Transistor sizes. `source` rows are shared; `scaling[i]` are the rows of the
/// branch for exponent i.
struct WidthTable {
    int n_bits = 0;
    std::vector<Sizing> source;
    std::vector<std::vector<Sizing>> scaling;
};

inline WidthTable width_table(int n) {
    if (n < 1 || n > 8) throw ValidationError("n_bits", "bias width table covers 1..8 bits");
    const double two_n = std::ldexp(1.0, n);
    WidthTable t;
    t.n_bits = n;
    t.source = {{"M1", 1.0, 1.0}, {"M2-3", two_n, 1.0}, {"M4-6", 10.0 * two_n, 10.0}};
    for (int i = 0; i < n; ++i) {
        const double two_i = std::ldexp(1.0, i);
        t.scaling.push_back({{"M7-9", 10.0 * two_i, 10.0},
                             {"M10", std::pow(2.6, i), 10.0},
                             {"M11", two_i, 10.0},
                             {"M12", 1.0, 1.0}});
    }
    return t;
}

/// Which M10 scaling law to use; the two published forms disagree.
enum class M10Mode { equation, table };

inline double secondary_bias_width(int i, double w_max, M10Mode mode = M10Mode::equation) {
    if (i < 0) throw ValidationError("i", "must be >= 0");
    return mode == M10Mode::equation ? w_max * std::pow(1.3, -i) : w_max * std::pow(2.6, i);
}

struct BiasParams {
    double slope_factor = 1.3;      // subthreshold slope m
    Amperes i_spec = 2e-6;          // current at V_GS = V_thn for a unit-width device
    Amperes subthreshold_ceiling = 2e-6;
    Volts drain_pin = 0.100;        // intermediate drain held ~4 V_T above ground
    Volts pin_tolerance = 0.005;
};

struct BiasPlan {
    int n_bits = 0;
    WidthTable widths;
    std::vector<Amperes> currents;
    std::vector<Volts> v_b1;
    std::vector<Volts> v_b2;
};

inline Amperes bias_current(Volts v_ref, const TechnologyProfile& tech, const BiasParams& p = {}) {
    const Amperes i = p.i_spec * std::exp((v_ref - tech.v_thn) / (p.slope_factor * tech.v_t));
    if (i > p.subthreshold_ceiling)
        throw RegimeError("bias current " + format_double(i) + " A exceeds the subthreshold ceiling");
    return i;
}

/// V_REF that produces `i_bias` in the source branch.
inline Volts reference_for_current(Amperes i_bias, const TechnologyProfile& tech, const BiasParams& p = {}) {
    return tech.v_thn + p.slope_factor * tech.v_t * std::log(i_bias / p.i_spec);
}

/// Ideal mirror output currents I_bias * 2^-i, i = 0..n-1.
inline std::vector<Amperes> branch_currents(Volts v_ref, int n, const TechnologyProfile& tech,
                                            const BiasParams& p = {}) {
    if (n < 1 || n > 30) throw ValidationError("n_bits", "must be in [1, 30]");
    const Amperes i_bias = bias_current(v_ref, tech, p);
    std::vector<Amperes> out(n);
    for (int i = 0; i < n; ++i) out[i] = std::ldexp(i_bias, -i);
    return out;
}

inline BiasPlan plan(Volts v_ref, int n, const TechnologyProfile& tech, const BiasParams& p = {}) {
    BiasPlan b;
    b.n_bits = n;
    b.widths = width_table(n);
    b.currents = branch_currents(v_ref, n, tech, p);
    for (int i = 0; i < n; ++i) {
        // unit-width self-biased M12 carrying the branch current
        const Volts vb1 = tech.v_thn + p.slope_factor * tech.v_t * std::log(b.currents[i] / p.i_spec);
        b.v_b1.push_back(vb1);
        b.v_b2.push_back(vb1 + p.drain_pin);
    }
    return b;
}

/// First-order current error from drain-voltage mismatch against finite r_ds:
/// dI/I = dV_DS / (r_ds * I), per branch.
inline std::vector<double> mirror_error(const BiasPlan& plan, const std::vector<Ohms>& r_ds,
                                        const std::vector<Volts>& dv_ds) {
    const std::size_t n = plan.currents.size();
    if (r_ds.size() != n || dv_ds.size() != n)
        throw ValidationError("r_ds", "need one r_ds and one dv_ds per branch");
    std::vector<double> err(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(r_ds[i] > 0.0)) throw ValidationError("r_ds", "must be > 0");
        err[i] = std::isinf(r_ds[i]) ? 0.0 : dv_ds[i] / (r_ds[i] * plan.currents[i]);
    }
    return err;
}

}  // namespace delaymac::bias

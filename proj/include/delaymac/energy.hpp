#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "delaymac/error.hpp"
#include "delaymac/model.hpp"

namespace delaymac::energy {

enum class Mode { sense, acceleration };

inline const char* to_string(Mode m) { return m == Mode::sense ? "sense" : "acceleration"; }

struct EnergyBreakdown {
    Joules e_cstar = 0.0;
    Joules e_td1 = 0.0;
    Joules e_td2 = 0.0;
    Joules e_pu = 0.0;
    Joules e_inv = 0.0;
    Joules total = 0.0;
    Joules per_bit = 0.0;
    Mode mode = Mode::sense;
};

/// Per-MAC constants that have no closed form, plus the node capacitances.
/// Defaults reproduce the simulated per-bit energies of the 5-bit design.
struct EnergyConstants {
    Joules e_pu_per_bit = 9.0e-15;
    Joules e_inv_per_bit = 3.0e-15;
    Farads c_detector_node = 0.382e-15;  // 0.55 fJ per cell at 1.2 V
    Farads c_latch_node = 0.59e-15;      // 0.85 fJ per cell at 1.2 V
    double recharge_fraction = 0.0;      // acceleration mode: share of C* restored in bypassed cells
    int cells_per_bit = 2;               // variable + reference cell
};

/// Energy to charge `c` from 0 to V_DD through the supply.
inline Joules cap_energy(Farads c, const TechnologyProfile& tech) {
    if (!(c > 0.0)) throw ValidationError("c", "must be > 0");
    return c * tech.v_dd * tech.v_dd;
}

/// Short-circuit loss of a CMOS-inverter detector driven by a ramp of slope `rate`.
inline Joules short_circuit_energy(VoltsPerSecond rate, const TechnologyProfile& tech) {
    if (!(rate > 0.0)) throw ValidationError("rate", "must be > 0");
    const Volts overlap = tech.v_dd - tech.v_thp - tech.v_thn;
    if (overlap <= 0.0) return 0.0;
    return tech.v_dd / (6.0 * rate) * tech.mu_wl_cox * overlap * overlap * overlap;
}

/// Short-circuit loss summed over a multiplier whose cell for exponent i
/// discharges 2^i times slower than the fastest. The published total,
/// (2^{n+1} - 1) E_SC, sums exponents 0..n inclusive; this follows it.
inline Joules multiplier_short_circuit_energy(int n, VoltsPerSecond fastest_rate, const TechnologyProfile& tech) {
    if (n < 1 || n > 60) throw ValidationError("n_bits", "must be in [1, 60]");
    Joules sum = 0.0;
    for (int i = 0; i <= n; ++i) sum += short_circuit_energy(std::ldexp(fastest_rate, -i), tech);
    return sum;
}

inline EnergyBreakdown mac_energy(const MultiplierSpec& spec, const CellDesign& cell, const TechnologyProfile& tech,
                                  Mode mode, const EnergyConstants& k = {}) {
    spec.validate();
    if (!(k.recharge_fraction >= 0.0 && k.recharge_fraction <= 1.0))
        throw ValidationError("recharge_fraction", "must lie in [0, 1]");

    const int n = spec.n_bits;
    const double cells = k.cells_per_bit;
    const int used = std::popcount(spec.weight());
    // cells whose C* and detector nodes are exercised this cycle
    const double charged = mode == Mode::sense ? n : used + k.recharge_fraction * (n - used);
    const double fired = mode == Mode::sense ? n : used;

    EnergyBreakdown e;
    e.mode = mode;
    e.e_cstar = cells * charged * cap_energy(cell.c_star, tech);
    e.e_td1 = cells * fired * cap_energy(k.c_detector_node, tech);
    e.e_td2 = cells * fired * cap_energy(k.c_latch_node, tech);
    e.e_pu = n * k.e_pu_per_bit;
    e.e_inv = n * k.e_inv_per_bit;
    e.total = e.e_cstar + e.e_td1 + e.e_td2 + e.e_pu + e.e_inv;
    e.per_bit = e.total / n;
    return e;
}

/// Simulated energy table of the 5-bit multiplier at V_A = 1.2 V, |W| = 31, in fJ.
struct ReferenceRow {
    const char* component;
    double per_mac_fj;
    double per_bit_fj;
};

inline constexpr std::array<ReferenceRow, 5> reference_components{{
    {"E_C*", 34.0, 6.8},
    {"E_TD1", 5.6, 1.1},
    {"E_TD2", 8.8, 1.7},
    {"E_PU", 46.0, 9.0},
    {"E_INV", 16.0, 3.0},
}};
inline constexpr ReferenceRow reference_total{"Total", 110.0, 22.0};
inline constexpr ReferenceRow reference_total_simulated{"Total (sim.)", 116.0, 23.0};

inline double reference_row_sum_per_bit() {
    double s = 0.0;
    for (const auto& r : reference_components) s += r.per_bit_fj;
    return s;
}

inline double reference_row_sum_per_mac() {
    double s = 0.0;
    for (const auto& r : reference_components) s += r.per_mac_fj;
    return s;
}

/// Derives detector/latch node capacitances from per-bit energies split over
/// `cells_per_bit` cells: C = E / (cells * V_DD^2).
inline Farads node_capacitance_from_energy(Joules per_bit, int cells_per_bit, const TechnologyProfile& tech) {
    return per_bit / (cells_per_bit * tech.v_dd * tech.v_dd);
}

}  // namespace delaymac::energy

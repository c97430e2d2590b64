#pragma once

// Closed-form models of one delay cell: voltage initialization, steady
// discharge and the exponential-FET threshold detector.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "delaymac/error.hpp"
#include "delaymac/model.hpp"

namespace delaymac::cell {

/// Which offset charge the initialization model uses.
enum class Offset { within_pulse, after_pulse };

struct InitResult {
    Volts dv0 = 0.0;       // drop of V* below V_DD after charge sharing
    bool clamped = false;  // V_A <= V_thn, linear term forced to zero
};

struct LatchResult {
    Seconds t_d = 0.0;
    Volts dv_th = 0.0;
    bool linearized = false;  // linear form within 1% of the exact delay
};

inline Coulombs offset_charge(const CellDesign& cell, Offset which) {
    return which == Offset::within_pulse ? cell.dq_of_md : cell.dq_of_pd;
}

/// Initial drop of the C* voltage for input `v_a`. Below V_thn only the offset
/// charge remains.
inline InitResult initial_drop(Volts v_a, const CellDesign& cell, const TechnologyProfile& tech,
                               Offset which = Offset::within_pulse) {
    if (!(v_a >= 0.0 && v_a <= tech.v_dd)) throw ValidationError("v_a", "must lie in [0, v_dd]");
    const Volts overdrive = v_a - tech.v_thn;
    const bool clamped = overdrive <= 0.0;
    const Volts linear = clamped ? 0.0 : (cell.c_s_eff / cell.c_star) * overdrive;
    return {linear + offset_charge(cell, which) / cell.c_star, clamped};
}

/// Smallest C* for which charge sharing stays linear up to V_A = V_DD.
inline Farads init_validity_min_cstar(const CellDesign& cell, const TechnologyProfile& tech,
                                      Offset which = Offset::within_pulse) {
    if (!(tech.v_thn > 0.0)) throw ValidationError("v_thn", "must be > 0");
    return (cell.c_s_eff * (tech.v_dd - tech.v_thn) + offset_charge(cell, which)) / tech.v_thn;
}

inline Seconds absolute_delay_ideal(Volts dv0, Volts dv_th, const CellDesign& cell) {
    if (dv_th < dv0) throw RegimeError("latch point below initial drop: latch fires before discharge");
    return (cell.c_star / cell.i_star) * (dv_th - dv0);
}

/// Referential delay against the reference input v_a0; independent of C*.
inline Seconds referential_delay_ideal(Volts v_a, const CellDesign& cell) {
    return -(cell.c_s_eff / cell.i_star) * (v_a - cell.v_a0);
}

/// Referential delay when the discharged capacitance depends on its voltage.
/// Integrates C(v) between the initialized C* voltages for v_a0 and v_a.
inline Seconds referential_delay_varcap(Volts v_a, const CellDesign& cell, const TechnologyProfile& tech,
                                        const std::function<Farads(Volts)>& c_of_v,
                                        double rel_tol = 1e-9) {
    const Volts v_ref = tech.v_dd - initial_drop(cell.v_a0, cell, tech).dv0;
    const Volts v_var = tech.v_dd - initial_drop(v_a, cell, tech).dv0;
    if (v_ref == v_var) return 0.0;

    double error_estimate = 0.0;
    const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        c_of_v, v_ref, v_var, 30, rel_tol, &error_estimate);
    if (!std::isfinite(integral) || error_estimate > rel_tol * std::abs(integral))
        throw RegimeError("capacitance quadrature did not converge");
    return integral / cell.i_star;
}

/// Delay offset caused by a threshold shift of the shared input FET.
inline Seconds pv_delay_offset(Volts dv_thn, const CellDesign& cell) {
    return -(cell.c_s_eff / cell.i_star) * dv_thn;
}

namespace detail {
inline void require_exponential_regime(Volts dv0, const TechnologyProfile& tech) {
    if (dv0 >= tech.v_thp) throw RegimeError("initial drop reaches v_thp: detector leaves the exponential regime");
}

/// R*C*V_thn/(I_0*V_T), the argument shared by the latch formulas.
inline double latch_argument(const CellDesign& cell, const TechnologyProfile& tech) {
    return cell.discharge_rate() * cell.c_re * tech.v_thn / (tech.i_0 * tech.v_t);
}
}  // namespace detail

/// Detector drain voltage t seconds after discharge starts.
inline Volts vre_transient(Seconds t, Volts dv0, const CellDesign& cell, const TechnologyProfile& tech) {
    if (t < 0.0) throw ValidationError("t", "must be >= 0");
    detail::require_exponential_regime(dv0, tech);
    const double rate = cell.discharge_rate();
    return (tech.i_0 / cell.c_re) * (tech.v_t / rate) * std::exp(dv0 / tech.v_t) *
           std::expm1(rate * t / tech.v_t);
}

/// Drop of V* at which the half-latch fires; does not depend on V_A.
inline Volts latch_point(const CellDesign& cell, const TechnologyProfile& tech) {
    const double arg = detail::latch_argument(cell, tech);
    if (!(arg > 1.0)) throw RegimeError("latch argument <= 1: detector linearity constraint grossly violated");
    return tech.v_t * std::log(arg);
}

/// Linearity ratio of the detector (must be >> 1). With `power` set, the
/// polynomial-device variant replaces V_T by V_G0/p in the last factor.
inline double td_linearity_margin(const CellDesign& cell, const TechnologyProfile& tech, Volts dv0_max,
                                  std::optional<double> power = std::nullopt, Volts v_g0 = 0.0) {
    if (!(dv0_max >= 0.0 && dv0_max < tech.v_dd)) throw ValidationError("dv0_max", "must lie in [0, v_dd)");
    const double head = cell.discharge_rate() * cell.c_re / (tech.i_0 * std::exp(dv0_max / tech.v_t));
    if (!power) return head * tech.v_thn / tech.v_t;
    if (!(*power > 0.0) || !(v_g0 > 0.0)) throw ValidationError("power", "p and v_g0 must be > 0");
    return head * tech.v_thn / (v_g0 / *power);
}

/// Exact latch delay from the start of discharge.
inline LatchResult latch_delay(Volts dv0, const CellDesign& cell, const TechnologyProfile& tech) {
    detail::require_exponential_regime(dv0, tech);
    const Volts dv_th = latch_point(cell, tech);
    const double rate = cell.discharge_rate();
    const double margin = detail::latch_argument(cell, tech) * std::exp(-dv0 / tech.v_t);
    const Seconds exact = (tech.v_t / rate) * std::log1p(margin);
    const Seconds linear = (tech.v_t / rate) * std::log(margin);
    const bool linearized = margin > 1.0 && std::abs(exact - linear) < 0.01 * exact;
    return {exact, dv_th, linearized};
}

}  // namespace delaymac::cell

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "delaymac/error.hpp"
#include "delaymac/units.hpp"

namespace delaymac {

/// Process-level constants shared by every cell.
struct TechnologyProfile {
    Volts v_dd = 1.2;
    Volts v_thn = 0.319;
    Volts v_thp = 0.45;
    Volts v_t = 0.02585;
    Amperes i_0 = 100e-15;     // subthreshold scale current of the detector FET
    double gamma = 1.5;        // excess noise factor
    double mu_wl_cox = 100e-6; // A/V^2, aggregate inverter strength for short-circuit energy
    Kelvin temperature = 300.0;

    void validate() const {
        if (!(v_thn > 0.0)) throw ValidationError("v_thn", "must be > 0");
        if (!(v_dd > v_thn)) throw ValidationError("v_dd", "must exceed v_thn");
        if (!(v_thp > 0.0)) throw ValidationError("v_thp", "must be > 0");
        if (!(v_dd > v_thp)) throw ValidationError("v_dd", "must exceed v_thp");
        if (!(temperature > 0.0)) throw ValidationError("temperature", "must be > 0");
        if (!(v_t > 0.0)) throw ValidationError("v_t", "must be > 0");
        if (std::abs(v_t / thermal_voltage(temperature) - 1.0) > 1e-3)
            throw ValidationError("v_t", "inconsistent with temperature (kT/q within 0.1%)");
        if (!(i_0 > 0.0)) throw ValidationError("i_0", "must be > 0");
        if (!(gamma >= 1.0)) throw ValidationError("gamma", "must be >= 1");
        if (!(mu_wl_cox > 0.0)) throw ValidationError("mu_wl_cox", "must be > 0");
    }
};

/// Per-cell designables and fitted parasitics.
struct CellDesign {
    Farads c_star = 2.2e-15;
    Farads c_s_eff = 0.23e-15;   // C_S + C_pS
    Coulombs dq_of_md = 0.5e-15; // offset charge within the discharge pulse
    Coulombs dq_of_pd = 0.45e-15; // offset charge after the pulse
    Farads c_re = 0.382e-15;     // net capacitance at the detector drain
    Amperes i_star = 1e-6;
    Volts v_a0 = 0.75;

    void validate() const {
        const auto positive = [](double v, const char* name) {
            if (!(v > 0.0)) throw ValidationError(name, "must be > 0");
        };
        positive(c_star, "c_star");
        positive(c_s_eff, "c_s_eff");
        positive(dq_of_md, "dq_of_md");
        positive(dq_of_pd, "dq_of_pd");
        positive(c_re, "c_re");
        positive(i_star, "i_star");
        if (dq_of_pd > dq_of_md) throw ValidationError("dq_of_pd", "must not exceed dq_of_md");
        if (!(v_a0 >= 0.0)) throw ValidationError("v_a0", "must be >= 0");
    }

    CellDesign with_current(Amperes i) const {
        CellDesign c = *this;
        c.i_star = i;
        return c;
    }

    CellDesign with_capacitance(Farads c_new) const {
        CellDesign c = *this;
        c.c_star = c_new;
        return c;
    }

    VoltsPerSecond discharge_rate() const { return i_star / c_star; }
};

/// One signed n-bit delay multiplier. Bit 0 is the fastest cell.
struct MultiplierSpec {
    int n_bits = 5;
    int sign = +1;
    std::vector<int> weight_bits = {1, 1, 1, 1, 1};
    Amperes i_star_fastest = 1e-6;
    Volts v_a0 = 0.75;

    void validate() const {
        if (n_bits < 1 || n_bits > 30) throw ValidationError("n_bits", "must be in [1, 30]");
        if (sign != 1 && sign != -1) throw ValidationError("sign", "must be +1 or -1");
        if (static_cast<int>(weight_bits.size()) != n_bits)
            throw ValidationError("weight_bits", "length must equal n_bits");
        for (int b : weight_bits)
            if (b != 0 && b != 1) throw ValidationError("weight_bits", "entries must be 0 or 1");
        if (!(i_star_fastest > 0.0)) throw ValidationError("i_star_fastest", "must be > 0");
        if (!(v_a0 >= 0.0)) throw ValidationError("v_a0", "must be >= 0");
    }

    std::uint64_t weight() const {
        std::uint64_t w = 0;
        for (std::size_t i = 0; i < weight_bits.size(); ++i)
            if (weight_bits[i]) w |= std::uint64_t{1} << i;
        return w;
    }

    Amperes bit_current(int i) const { return std::ldexp(i_star_fastest, -i); }

    /// Multiplier for signed integer weight `w` with |w| < 2^n.
    static MultiplierSpec from_signed(long long w, int n_bits, Amperes i_fastest, Volts v_a0) {
        MultiplierSpec s;
        s.n_bits = n_bits;
        s.sign = w < 0 ? -1 : 1;
        const unsigned long long mag = w < 0 ? static_cast<unsigned long long>(-w)
                                             : static_cast<unsigned long long>(w);
        if (n_bits < 1 || n_bits > 30 || (mag >> n_bits) != 0)
            throw ValidationError("weight", "magnitude out of range for " + std::to_string(n_bits) + " bits");
        s.weight_bits.assign(n_bits, 0);
        for (int i = 0; i < n_bits; ++i) s.weight_bits[i] = static_cast<int>((mag >> i) & 1u);
        s.i_star_fastest = i_fastest;
        s.v_a0 = v_a0;
        return s;
    }
};

/// Calibrated multipliers for (k1, k2) that map the fitted constants into SI.
struct UnitScale {
    double sd = 1.0;
    double td = 1.0;

    bool operator==(const UnitScale&) const = default;
};

/// Fitted jitter constants. Raw values are kept verbatim; `unit_scale` holds the
/// convention resolved by calibration, and is empty until then.
struct JitterFit {
    double k1 = 2.95e-16;
    double p1 = 2.46;
    double k2 = 1.29e-10;
    double q2 = 1.5;
    std::optional<UnitScale> unit_scale;
    int pair_factor = 1;  // 1: variable path only, 2: reference path jittered as well

    void validate() const {
        if (!(k1 > 0.0)) throw ValidationError("k1", "must be > 0");
        if (!(k2 > 0.0)) throw ValidationError("k2", "must be > 0");
        if (!(p1 > 0.0)) throw ValidationError("p1", "must be > 0");
        if (!(q2 > 0.0)) throw ValidationError("q2", "must be > 0");
        if (unit_scale && !(unit_scale->sd > 0.0 && unit_scale->td > 0.0))
            throw ValidationError("unit_scale", "entries must be > 0");
        if (pair_factor != 1 && pair_factor != 2) throw ValidationError("pair_factor", "must be 1 or 2");
    }

    bool calibrated() const { return unit_scale.has_value(); }

    const UnitScale& scale() const {
        if (!unit_scale) throw UncalibratedFitError();
        return *unit_scale;
    }

    JitterFit with_scale(UnitScale s) const {
        JitterFit f = *this;
        f.unit_scale = s;
        return f;
    }
};

}  // namespace delaymac

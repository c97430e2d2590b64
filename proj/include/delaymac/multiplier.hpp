#pragma once

// Event-level model of the signed n-bit delay multiplier and of serial MAC
// chains. A value is carried as the time of a variable edge relative to a
// reference edge. Each set weight bit i routes both edges through a pair of
// cells whose current is I*_f / 2^i; cleared bits are bypassed.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "delaymac/cell.hpp"
#include "delaymac/error.hpp"
#include "delaymac/jitter.hpp"
#include "delaymac/model.hpp"

namespace delaymac::mult {

/// Inputs below this distort the transfer characteristic.
inline constexpr Volts input_floor = 0.075;

struct ReferentialEvent {
    Seconds t_var = 0.0;
    Seconds t_ref = 0.0;

    Seconds referential_delay() const { return t_var - t_ref; }
};

enum class Model { ideal, nonlinear };

inline const char* to_string(Model m) { return m == Model::ideal ? "ideal" : "nonlinear"; }

struct SimOptions {
    Model model = Model::ideal;
    std::optional<JitterFit> fit;      // jitter is injected when both fit and seed are set
    std::optional<std::uint64_t> seed;
    std::optional<Volts> dv_th;        // latch point override for the ideal model's absolute delays

    bool noisy() const { return fit.has_value() && seed.has_value(); }
};

struct MultiplyResult {
    ReferentialEvent out;
    Seconds delta_t = 0.0;
    std::vector<Seconds> per_bit_delays;  // noiseless, before the sign is applied
    std::vector<std::string> warnings;
};

namespace detail {

struct CellPair {
    Seconds t_ref = 0.0;    // absolute delay of the reference-input cell
    Seconds per_bit = 0.0;  // referential delay contributed by this bit
};

inline CellPair evaluate_bit(const CellDesign& c, Volts v_a, const TechnologyProfile& tech, const SimOptions& opt) {
    if (opt.model == Model::ideal) {
        const Volts dv_th = opt.dv_th ? *opt.dv_th : cell::latch_point(c, tech);
        const Seconds t_ref = cell::absolute_delay_ideal(cell::initial_drop(c.v_a0, c, tech).dv0, dv_th, c);
        return {t_ref, cell::referential_delay_ideal(v_a, c)};
    }
    const Seconds t_ref = cell::latch_delay(cell::initial_drop(c.v_a0, c, tech).dv0, c, tech).t_d;
    const Seconds t_var = cell::latch_delay(cell::initial_drop(v_a, c, tech).dv0, c, tech).t_d;
    return {t_ref, t_var - t_ref};
}

inline MultiplyResult multiply(const ReferentialEvent& ev_in, const MultiplierSpec& spec, Volts v_a,
                               const CellDesign& cell_template, const TechnologyProfile& tech, const SimOptions& opt,
                               jitter::GaussianStream* gauss) {
    spec.validate();
    if (!(v_a >= 0.0 && v_a <= tech.v_dd)) throw ValidationError("v_a", "must lie in [0, v_dd]");
    if (!(std::isfinite(ev_in.t_var) && std::isfinite(ev_in.t_ref)))
        throw ValidationError("ev_in", "event times must be finite");

    MultiplyResult r;
    if (v_a < input_floor) r.warnings.push_back("v_a below the 75 mV input floor; output is distorted");

    CellDesign base = cell_template;
    base.v_a0 = spec.v_a0;

    Seconds path_var = 0.0;  // accumulated delay of the path driven by v_a
    Seconds path_ref = 0.0;  // accumulated delay of the path driven by v_a0
    Seconds signal = 0.0;    // referential part, summed separately to keep it exact
    r.per_bit_delays.assign(spec.n_bits, 0.0);
    for (int i = 0; i < spec.n_bits; ++i) {
        if (!spec.weight_bits[i]) continue;  // bypassed: no delay, no jitter
        const CellDesign c = base.with_current(spec.bit_current(i));
        const auto pair = evaluate_bit(c, v_a, tech, opt);
        r.per_bit_delays[i] = pair.per_bit;

        Seconds j_var = 0.0, j_ref = 0.0;
        if (gauss) {
            const auto budget = jitter::total_jitter(c, *opt.fit);
            j_var = jitter::draw_cell_jitter(*gauss, budget);
            if (opt.fit->pair_factor == 2) j_ref = jitter::draw_cell_jitter(*gauss, budget);
        }
        path_ref += pair.t_ref + j_ref;
        path_var += pair.t_ref + pair.per_bit + j_var;
        signal += pair.per_bit + (j_var - j_ref);
    }

    // A negative weight relays the edges into swapped paths and swaps them back
    // afterwards, which negates the accumulated referential delay.
    r.delta_t = spec.sign * signal;
    if (spec.sign > 0) {
        r.out = {ev_in.t_var + path_var, ev_in.t_ref + path_ref};
    } else {
        r.out = {ev_in.t_var + path_ref, ev_in.t_ref + path_var};
    }
    return r;
}

}  // namespace detail

inline MultiplyResult simulate_multiply(const ReferentialEvent& ev_in, const MultiplierSpec& spec, Volts v_a,
                                        const CellDesign& cell_template, const TechnologyProfile& tech,
                                        const SimOptions& opt = {}) {
    if (opt.noisy()) {
        jitter::GaussianStream gauss(*opt.seed);
        return detail::multiply(ev_in, spec, v_a, cell_template, tech, opt, &gauss);
    }
    return detail::multiply(ev_in, spec, v_a, cell_template, tech, opt, nullptr);
}

/// Model variance of delta_t: every traversed cell on the jittered paths.
inline double jitter_variance(const MultiplierSpec& spec, const CellDesign& cell_template, const JitterFit& fit) {
    spec.validate();
    double var = 0.0;
    for (int i = 0; i < spec.n_bits; ++i) {
        if (!spec.weight_bits[i]) continue;
        const auto b = jitter::total_jitter(cell_template.with_current(spec.bit_current(i)), fit);
        var += fit.pair_factor * (b.var_sd + b.var_td);
    }
    return var;
}

/// Shared parameters of every multiplier in a serial chain.
struct ChainTemplate {
    int n_bits = 5;
    Amperes i_star_fastest = 1e-6;
    Volts v_a0 = 0.75;
    CellDesign cell;
    TechnologyProfile tech;
    SimOptions options;
};

struct DotProductResult {
    Seconds total = 0.0;
    std::vector<ReferentialEvent> trace;  // trace[0] is the input; trace[j+1] follows multiplier j
    std::vector<MultiplyResult> stages;
};

/// Serial cascade: each multiplier consumes the previous output event. One
/// jitter stream (seeded once) feeds the whole chain.
inline DotProductResult simulate_dot_product(const std::vector<long long>& weights, const std::vector<Volts>& v_as,
                                             const ChainTemplate& chain, ReferentialEvent ev_in = {}) {
    if (weights.size() != v_as.size()) throw ValidationError("weights", "length differs from v_as");
    std::optional<jitter::GaussianStream> gauss;
    if (chain.options.noisy()) gauss.emplace(*chain.options.seed);

    DotProductResult r;
    r.trace.push_back(ev_in);
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const auto spec = MultiplierSpec::from_signed(weights[j], chain.n_bits, chain.i_star_fastest, chain.v_a0);
        auto stage = detail::multiply(r.trace.back(), spec, v_as[j], chain.cell, chain.tech, chain.options,
                                      gauss ? &*gauss : nullptr);
        r.total += stage.delta_t;
        r.trace.push_back(stage.out);
        r.stages.push_back(std::move(stage));
    }
    return r;
}

/// Differential multiply: the two paths take v_a0 + v_a and v_a0 - v_a through
/// cells whose transfer carries a quadratic term alpha*(v - v_a0)^2. Half the
/// difference keeps the odd part only.
inline Seconds differential_multiply(const MultiplierSpec& spec, Volts v_a, double distortion_alpha,
                                     const CellDesign& cell_template, const TechnologyProfile& tech) {
    spec.validate();
    const Volts hi = spec.v_a0 + v_a;
    const Volts lo = spec.v_a0 - v_a;
    for (Volts v : {hi, lo})
        if (!(v >= input_floor && v <= tech.v_dd))
            throw ValidationError("v_a", "v_a0 +/- v_a leaves the input range [75 mV, v_dd]");

    const Volts d_hi = hi - spec.v_a0;
    const Volts d_lo = lo - spec.v_a0;
    Seconds out = 0.0;
    for (int i = 0; i < spec.n_bits; ++i) {
        if (!spec.weight_bits[i]) continue;
        const double k = -(cell_template.c_s_eff / spec.bit_current(i));
        const Seconds f_hi = k * (d_hi + distortion_alpha * d_hi * d_hi);
        const Seconds f_lo = k * (d_lo + distortion_alpha * d_lo * d_lo);
        out += 0.5 * (f_hi - f_lo);
    }
    return spec.sign * out;
}

/// Single-ended counterpart with the same quadratic term, for comparison.
inline Seconds single_ended_distorted(const MultiplierSpec& spec, Volts v_a, double distortion_alpha,
                                      const CellDesign& cell_template) {
    spec.validate();
    const Volts d = v_a - spec.v_a0;
    Seconds out = 0.0;
    for (int i = 0; i < spec.n_bits; ++i) {
        if (!spec.weight_bits[i]) continue;
        out += -(cell_template.c_s_eff / spec.bit_current(i)) * (d + distortion_alpha * d * d);
    }
    return spec.sign * out;
}

struct SweepRow {
    Volts v_a = 0.0;
    long long w = 0;  // signed weight
    int s = 1;        // sign of w (+1 for w = 0)
    Seconds delta_t = 0.0;
    Model model = Model::ideal;
    std::optional<std::uint64_t> seed;
};

enum class SweepOrder { iso_weight, iso_input };

struct SweepFamily {
    int n_bits = 5;
    Amperes i_star_fastest = 1e-6;
    Volts v_a0 = 0.75;
};

/// Transfer characteristic rows. iso_weight groups rows by W (one V_A sweep per
/// weight); iso_input groups them by V_A.
inline std::vector<SweepRow> transfer_sweep(const SweepFamily& family, const std::vector<Volts>& v_a_grid,
                                            const std::vector<long long>& weights, const CellDesign& cell_template,
                                            const TechnologyProfile& tech, const SimOptions& opt = {},
                                            SweepOrder order = SweepOrder::iso_weight) {
    std::vector<SweepRow> rows;
    const auto emit = [&](long long w, Volts v) {
        const auto spec = MultiplierSpec::from_signed(w, family.n_bits, family.i_star_fastest, family.v_a0);
        const auto r = simulate_multiply({}, spec, v, cell_template, tech, opt);
        rows.push_back({v, w, spec.sign, r.delta_t, opt.model, opt.noisy() ? opt.seed : std::nullopt});
    };
    if (order == SweepOrder::iso_weight) {
        for (long long w : weights)
            for (Volts v : v_a_grid) emit(w, v);
    } else {
        for (Volts v : v_a_grid)
            for (long long w : weights) emit(w, v);
    }
    return rows;
}

/// Largest residual of the least-squares line through (x, y), relative to the
/// span of y. Zero span gives zero.
inline double max_affine_deviation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("x", "need two or more paired samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, ymin = y[0], ymax = y[0];
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        ymin = std::min(ymin, y[k]);
        ymax = std::max(ymax, y[k]);
    }
    if (ymax == ymin) return 0.0;
    const double slope = sxy / sxx;
    double worst = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k)
        worst = std::max(worst, std::abs(y[k] - (my + slope * (x[k] - mx))));
    return worst / (ymax - ymin);
}

}  // namespace delaymac::mult

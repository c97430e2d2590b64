#pragma once

// Feasibility of (C*, I*_f, n) under the three design constraints:
//   1. linear voltage initialization  (C* above a floor)
//   2. linear threshold detection     (slowest cell fast enough)
//   3. jitter of the slowest cell below a fraction of the fastest cell's
//      maximum referential delay.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "delaymac/cell.hpp"
#include "delaymac/error.hpp"
#include "delaymac/jitter.hpp"
#include "delaymac/model.hpp"

namespace delaymac::design {

inline constexpr int default_max_bits_cap = 16;

struct Grid {
    std::vector<Farads> c_star;
    std::vector<Amperes> i_fastest;

    static std::vector<double> logspace(double lo, double hi, std::size_t n) {
        std::vector<double> v(n);
        const double span = std::log(hi / lo);
        for (std::size_t k = 0; k < n; ++k)
            v[k] = lo * std::exp(span * static_cast<double>(k) / static_cast<double>(n - 1));
        v.back() = hi;
        return v;
    }

    static Grid logarithmic(Farads c_lo, Farads c_hi, std::size_t nc, Amperes i_lo, Amperes i_hi, std::size_t ni) {
        Grid g{logspace(c_lo, c_hi, nc), logspace(i_lo, i_hi, ni)};
        g.validate();
        return g;
    }

    /// 64 x 64 log grid over C* in [0.5 fF, 50 fF], I*_f in [50 nA, 20 uA].
    static Grid standard() { return logarithmic(0.5e-15, 50e-15, 64, 50e-9, 20e-6, 64); }

    void validate() const {
        const auto check = [](const std::vector<double>& axis, const char* name) {
            if (axis.size() < 16) throw ValidationError(name, "needs at least 16 points");
            for (std::size_t k = 0; k < axis.size(); ++k) {
                if (!(axis[k] > 0.0)) throw ValidationError(name, "must be positive");
                if (k > 0 && !(axis[k] > axis[k - 1])) throw ValidationError(name, "must be strictly increasing");
            }
        };
        check(c_star, "grid_cstar");
        check(i_fastest, "grid_istar");
    }
};

/// Row-major boolean matrix indexed [c_star][i_fastest].
class Mask {
public:
    Mask() = default;
    Mask(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), bits_(rows * cols, 0) {}

    bool operator()(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c] != 0; }
    void set(std::size_t r, std::size_t c, bool v) { bits_[r * cols_ + c] = v ? 1 : 0; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool any() const { return std::any_of(bits_.begin(), bits_.end(), [](auto b) { return b != 0; }); }
    std::size_t count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

    bool operator==(const Mask&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct DesignRegion {
    std::vector<Farads> grid_cstar;
    std::vector<Amperes> grid_istar;
    Mask mask_c1, mask_c2, mask_c3, feasible;
    int n_bits = 0;

    bool empty() const { return !feasible.any(); }
};

struct ConstraintOptions {
    double jitter_margin_fraction = 0.4;
    double epsilon = 1.0;  // excess jitter margin; divides the jitter budget
};

/// Jitter budget per the third constraint: 3 sigma of the slowest cell against
/// fraction * C_S / I*_f (divided by epsilon).
inline bool jitter_constraint_met(const CellDesign& slowest, Amperes i_fastest, const JitterFit& fit,
                                  const ConstraintOptions& opt) {
    const auto b = jitter::total_jitter(slowest, fit);
    return 3.0 * b.sigma_total <= opt.jitter_margin_fraction * slowest.c_s_eff / i_fastest / opt.epsilon;
}

inline DesignRegion constraint_region(int n, const Grid& grid, const CellDesign& cell_template,
                                      const TechnologyProfile& tech, const JitterFit& fit,
                                      const ConstraintOptions& opt = {}) {
    if (n < 1 || n > 30) throw ValidationError("n_bits", "must be in [1, 30]");
    if (!(opt.epsilon >= 1.0)) throw ValidationError("epsilon", "must be >= 1");
    grid.validate();
    fit.scale();  // throws when uncalibrated

    const std::size_t nc = grid.c_star.size();
    const std::size_t ni = grid.i_fastest.size();
    DesignRegion r{grid.c_star, grid.i_fastest, Mask(nc, ni), Mask(nc, ni), Mask(nc, ni), Mask(nc, ni), n};

    const Farads c_min = cell::init_validity_min_cstar(cell_template, tech);
    for (std::size_t a = 0; a < nc; ++a) {
        const CellDesign sized = cell_template.with_capacitance(grid.c_star[a]);
        const bool c1 = grid.c_star[a] > c_min;
        // the detector constraint is worst at the largest input
        const Volts dv0 = cell::initial_drop(tech.v_dd, sized, tech).dv0;
        for (std::size_t b = 0; b < ni; ++b) {
            const Amperes i_f = grid.i_fastest[b];
            const CellDesign slowest = sized.with_current(std::ldexp(i_f, -n));
            const bool c2 = dv0 < tech.v_dd && cell::td_linearity_margin(slowest, tech, dv0) > 1.0;
            const bool c3 = jitter_constraint_met(slowest, i_f, fit, opt);
            r.mask_c1.set(a, b, c1);
            r.mask_c2.set(a, b, c2);
            r.mask_c3.set(a, b, c3);
            r.feasible.set(a, b, c1 && c2 && c3);
        }
    }
    return r;
}

/// Largest bit width with a non-empty region at excess margin `epsilon`; 0 if none.
/// Regions are nested in n, so the scan stops at the first empty one.
inline int max_bits(double epsilon, const Grid& grid, const CellDesign& cell_template, const TechnologyProfile& tech,
                    const JitterFit& fit, const ConstraintOptions& base = {}, int n_cap = default_max_bits_cap) {
    if (!(epsilon >= 1.0)) throw ValidationError("epsilon", "must be >= 1");
    ConstraintOptions opt = base;
    opt.epsilon = epsilon;
    int best = 0;
    for (int n = 1; n <= n_cap; ++n) {
        if (constraint_region(n, grid, cell_template, tech, fit, opt).empty()) break;
        best = n;
    }
    return best;
}

/// Lowest-latency feasible point: largest I*_f, then smallest C*.
inline std::pair<Farads, Amperes> optimal_point(const DesignRegion& region) {
    const std::size_t nc = region.grid_cstar.size();
    for (std::size_t b = region.grid_istar.size(); b-- > 0;)
        for (std::size_t a = 0; a < nc; ++a)
            if (region.feasible(a, b)) return {region.grid_cstar[a], region.grid_istar[b]};
    throw InfeasibleError("empty feasible region for " + std::to_string(region.n_bits) + " bits");
}

/// Smallest epsilon >= 1 at which max_bits drops to `n` or below (bisection).
inline double bits_crossover(int n, const Grid& grid, const CellDesign& cell_template, const TechnologyProfile& tech,
                             const JitterFit& fit, const ConstraintOptions& base = {}, double rel_tol = 1e-6) {
    const auto at_most = [&](double eps) { return max_bits(eps, grid, cell_template, tech, fit, base) <= n; };
    if (at_most(1.0)) return 1.0;
    double lo = 1.0, hi = 2.0;
    while (!at_most(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw InfeasibleError("max_bits never drops to " + std::to_string(n));
    }
    while (hi / lo - 1.0 > rel_tol) {
        const double mid = std::sqrt(lo * hi);
        (at_most(mid) ? hi : lo) = mid;
    }
    return hi;
}

// ---------------------------------------------------------------------------
// Unit-convention calibration of the fitted jitter constants.

/// Units the fitted formula is assumed to be written in, per axis.
struct UnitConvention {
    double capacitance = 1.0;  // 1 or 1e-15 (fF)
    double current = 1.0;      // 1 or 1e-6 (uA)
    double time = 1.0;         // 1 or 1e-9 (ns)

    std::string label() const {
        std::string s;
        s += capacitance == 1.0 ? "F" : "fF";
        s += current == 1.0 ? "/A" : "/uA";
        s += time == 1.0 ? "/s" : "/ns";
        return s;
    }

    /// SI factor on K*C/I^p evaluated with C, I in these units, result in time^2.
    double sd_factor(double p) const { return std::pow(current, p) * time * time / capacitance; }
    /// SI factor on K2*(C/I)^q.
    double td_factor(double q) const { return std::pow(current / capacitance, q) * time * time; }

    static std::vector<UnitConvention> all() {
        std::vector<UnitConvention> v;
        for (double c : {1.0, 1e-15})
            for (double i : {1.0, 1e-6})
                for (double t : {1.0, 1e-9}) v.push_back({c, i, t});
        return v;
    }
};

struct CalibrationTarget {
    enum class Kind { max_bits_at, feasible, infeasible, optimum_near, bits_crossover };

    Kind kind = Kind::feasible;
    int n = 0;
    double epsilon = 1.0;
    Farads c_star = 0.0;
    Amperes i_fastest = 0.0;
    double rel_tol = 0.0;

    static CalibrationTarget max_bits_at(double eps, int bits) { return {Kind::max_bits_at, bits, eps}; }
    static CalibrationTarget feasible(int bits) { return {Kind::feasible, bits}; }
    static CalibrationTarget infeasible(int bits) { return {Kind::infeasible, bits}; }
    /// Optimum within one grid step of (c, i).
    static CalibrationTarget optimum_near(int bits, Farads c, Amperes i) {
        return {Kind::optimum_near, bits, 1.0, c, i};
    }
    /// max_bits first drops to `bits` at epsilon within eps*(1 +/- tol).
    static CalibrationTarget bits_crossover(int bits, double eps, double tol) {
        return {Kind::bits_crossover, bits, eps, 0.0, 0.0, tol};
    }

    std::string label() const {
        const auto num = [](double v) { return format_double(v); };
        switch (kind) {
            case Kind::max_bits_at: return "max_bits(" + num(epsilon) + ")=" + std::to_string(n);
            case Kind::feasible: return "feasible(" + std::to_string(n) + ")";
            case Kind::infeasible: return "infeasible(" + std::to_string(n) + ")";
            case Kind::optimum_near:
                return "optimum(" + std::to_string(n) + ")~(" + num(c_star) + "," + num(i_fastest) + ")";
            case Kind::bits_crossover:
                return "crossover(" + std::to_string(n) + ")~" + num(epsilon) + "+/-" + num(rel_tol * 100) + "%";
        }
        return "?";
    }
};

/// Headline results the calibrated model must reproduce: 5 bits at unit
/// margin, 6 bits infeasible, 4 bits feasible, design point (2.2 fF, 1 uA),
/// and a single bit left near epsilon = 14.
inline std::vector<CalibrationTarget> default_targets() {
    using T = CalibrationTarget;
    return {T::max_bits_at(1.0, 5), T::infeasible(6),          T::feasible(4),
            T::max_bits_at(14.0, 1), T::optimum_near(5, 2.2e-15, 1e-6), T::bits_crossover(1, 14.0, 0.3)};
}

struct CalibrationResult {
    UnitScale unit_scale;
    UnitConvention sd_convention;
    UnitConvention td_convention;
    double global_scale = 1.0;
    double residual = 0.0;
    std::vector<std::string> target_labels;
    std::vector<bool> targets_met;
};

namespace detail {

struct TargetOutcome {
    bool met = false;
    double residual = 0.0;
};

inline double grid_step(const std::vector<double>& axis) {
    return std::log(axis[1] / axis[0]);
}

inline TargetOutcome evaluate_target(const CalibrationTarget& t, const Grid& grid, const CellDesign& cell,
                                     const TechnologyProfile& tech, const JitterFit& fit,
                                     const ConstraintOptions& base) {
    using K = CalibrationTarget::Kind;
    switch (t.kind) {
        case K::max_bits_at:
            return {max_bits(t.epsilon, grid, cell, tech, fit, base) == t.n, 0.0};
        case K::feasible:
            return {!constraint_region(t.n, grid, cell, tech, fit, base).empty(), 0.0};
        case K::infeasible:
            return {constraint_region(t.n, grid, cell, tech, fit, base).empty(), 0.0};
        case K::optimum_near: {
            const auto region = constraint_region(t.n, grid, cell, tech, fit, base);
            if (region.empty()) return {false, 0.0};
            const auto [c, i] = optimal_point(region);
            const double dc = std::abs(std::log(c / t.c_star)) / grid_step(grid.c_star);
            const double di = std::abs(std::log(i / t.i_fastest)) / grid_step(grid.i_fastest);
            return {dc <= 1.0 && di <= 1.0, dc + di};
        }
        case K::bits_crossover: {
            double eps = 0.0;
            try {
                eps = bits_crossover(t.n, grid, cell, tech, fit, base);
            } catch (const InfeasibleError&) {
                return {false, 0.0};
            }
            return {std::abs(eps / t.epsilon - 1.0) <= t.rel_tol, std::abs(std::log(eps / t.epsilon))};
        }
    }
    return {};
}

}  // namespace detail

struct CalibrationOptions {
    double log10_scale_min = -60.0;
    double log10_scale_max = 60.0;
    int samples_per_window = 33;
};

/// Resolves the unit convention of (k1, k2). Tries every pair of per-constant
/// conventions; for each, the targets whose truth is monotone in the global
/// scale bound a window of scales (bisection), and the remaining targets are
/// scored on samples inside it. The lowest total residual with every target
/// met wins.
inline CalibrationResult calibrate_units(const std::vector<CalibrationTarget>& targets, const JitterFit& fit,
                                         const TechnologyProfile& tech, const CellDesign& cell_template,
                                         const Grid& grid = Grid::standard(), const ConstraintOptions& base = {},
                                         const CalibrationOptions& copt = {}) {
    using K = CalibrationTarget::Kind;
    CalibrationResult best;
    for (const auto& t : targets) best.target_labels.push_back(t.label());
    if (targets.empty()) {
        best.unit_scale = UnitScale{1.0, 1.0};
        return best;
    }

    const auto conventions = UnitConvention::all();
    double best_residual = std::numeric_limits<double>::infinity();
    bool found = false;

    for (const auto& sd_conv : conventions) {
        for (const auto& td_conv : conventions) {
            const double f_sd = sd_conv.sd_factor(fit.p1);
            const double f_td = td_conv.td_factor(fit.q2);
            const auto fit_at = [&](double log10_g) {
                const double g = std::pow(10.0, log10_g);
                return fit.with_scale({f_sd * g, f_td * g});
            };

            // Region(n, eps) is non-empty exactly for log10 g up to a threshold.
            std::map<std::pair<int, double>, double> thresholds;
            const auto threshold = [&](int n, double eps) {
                const auto key = std::pair{n, eps};
                if (auto it = thresholds.find(key); it != thresholds.end()) return it->second;
                ConstraintOptions opt = base;
                opt.epsilon = eps;
                const auto nonempty = [&](double lg) {
                    return !constraint_region(n, grid, cell_template, tech, fit_at(lg), opt).empty();
                };
                double lo = copt.log10_scale_min, hi = copt.log10_scale_max, t;
                if (!nonempty(lo)) {
                    t = -std::numeric_limits<double>::infinity();
                } else if (nonempty(hi)) {
                    t = std::numeric_limits<double>::infinity();
                } else {
                    for (int it = 0; it < 48; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        (nonempty(mid) ? lo : hi) = mid;
                    }
                    t = lo;
                }
                thresholds[key] = t;
                return t;
            };

            double lo = copt.log10_scale_min, hi = copt.log10_scale_max;
            for (const auto& t : targets) {
                switch (t.kind) {
                    case K::feasible: hi = std::min(hi, threshold(t.n, 1.0)); break;
                    case K::infeasible: lo = std::max(lo, threshold(t.n, 1.0)); break;
                    case K::max_bits_at:
                        if (t.n >= 1) hi = std::min(hi, threshold(t.n, t.epsilon));
                        if (t.n < default_max_bits_cap) lo = std::max(lo, threshold(t.n + 1, t.epsilon));
                        break;
                    default: break;
                }
                if (!(lo < hi)) break;
            }
            if (!(lo < hi)) continue;

            for (int k = 0; k < copt.samples_per_window; ++k) {
                const double lg = lo + (hi - lo) * (k + 0.5) / copt.samples_per_window;
                const JitterFit trial = fit_at(lg);
                double residual = 0.0;
                std::vector<bool> met;
                bool all_met = true;
                for (const auto& t : targets) {
                    const auto outcome = detail::evaluate_target(t, grid, cell_template, tech, trial, base);
                    met.push_back(outcome.met);
                    residual += outcome.residual;
                    if (!outcome.met) {
                        all_met = false;
                        break;
                    }
                }
                if (all_met && residual < best_residual) {
                    best_residual = residual;
                    found = true;
                    best.unit_scale = *trial.unit_scale;
                    best.sd_convention = sd_conv;
                    best.td_convention = td_conv;
                    best.global_scale = std::pow(10.0, lg);
                    best.residual = residual;
                    best.targets_met = met;
                }
            }
        }
    }
    if (!found) throw InfeasibleError("no unit convention meets all calibration targets");
    return best;
}

}  // namespace delaymac::design

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "delaymac/model.hpp"
#include "delaymac/units.hpp"

namespace delaymac::jitter {

struct JitterBudget {
    double var_sd = 0.0;  // s^2, steady discharge
    double var_td = 0.0;  // s^2, threshold detector
    Seconds sigma_total = 0.0;
};

inline double thermal_noise_psd(const TechnologyProfile& tech, Siemens g) {
    return 4.0 * constants::boltzmann * tech.temperature * tech.gamma * g;
}

/// Ring-oscillator style jitter of the current source integrating over t_d.
inline double sd_jitter_theory(const CellDesign& cell, const TechnologyProfile& tech, Siemens g_d0, Seconds t_d) {
    return thermal_noise_psd(tech, g_d0) / (2.0 * cell.i_star * cell.i_star) * t_d;
}

/// Same, with t_d expanded as C*(dv_th - dv0)/I*.
inline double sd_jitter_theory(const CellDesign& cell, const TechnologyProfile& tech, Siemens g_d0, Volts dv_th,
                               Volts dv0) {
    return thermal_noise_psd(tech, g_d0) / (2.0 * std::pow(cell.i_star, 3)) * cell.c_star * (dv_th - dv0);
}

/// Variance-proportional detector noise; independent of the discharge rate.
inline double td_variance_theory(const CellDesign& cell, const TechnologyProfile& tech, Siemens g0) {
    return thermal_noise_psd(tech, g0) * cell.c_re * tech.v_thn / tech.i_0;
}

/// Fitted steady-discharge variance, K*C*/I*^p, in s^2.
inline double sd_jitter_fitted(const CellDesign& cell, const JitterFit& fit) {
    return fit.scale().sd * fit.k1 * cell.c_star / std::pow(cell.i_star, fit.p1);
}

/// Fitted detector variance, K2/R^q, in s^2.
inline double td_jitter_fitted(const CellDesign& cell, const JitterFit& fit) {
    return fit.scale().td * fit.k2 / std::pow(cell.discharge_rate(), fit.q2);
}

inline JitterBudget total_jitter(const CellDesign& cell, const JitterFit& fit) {
    JitterBudget b;
    b.var_sd = sd_jitter_fitted(cell, fit);
    b.var_td = td_jitter_fitted(cell, fit);
    b.sigma_total = std::sqrt(b.var_sd + b.var_td);
    return b;
}

/// Zero-mean unit Gaussian stream. mt19937_64 output is fixed by the standard,
/// and the transform below avoids std::normal_distribution, whose algorithm
/// differs between standard libraries.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // Marsaglia polar method
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// One cell traversal: the two sources are drawn independently.
inline Seconds draw_cell_jitter(GaussianStream& gauss, const JitterBudget& b) {
    const double sd = std::sqrt(b.var_sd) * gauss();
    const double td = std::sqrt(b.var_td) * gauss();
    return sd + td;
}

/// `count` jitter realizations of one cell.
inline std::vector<Seconds> sample_cell_jitter(std::uint64_t seed, const CellDesign& cell, const JitterFit& fit,
                                               std::size_t count) {
    if (count < 1) throw ValidationError("count", "must be >= 1");
    const JitterBudget budget = total_jitter(cell, fit);
    GaussianStream gauss(seed);
    std::vector<Seconds> out(count);
    for (auto& x : out) x = draw_cell_jitter(gauss, budget);
    return out;
}

}  // namespace delaymac::jitter

#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "delaymac/delaymac.hpp"

namespace testing_support {

/// Unit scale resolved by calibrating the default fit against the default targets.
inline constexpr delaymac::UnitScale pinned_scale{1.8045040689827645e-11, 0.3283657603693144};

inline delaymac::JitterFit calibrated_fit() { return delaymac::JitterFit{}.with_scale(pinned_scale); }

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

/// Least-squares polynomial coefficients, lowest order first. x is centred and
/// scaled internally; coefficients are returned in the original variable.
inline std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    double lo = x.front(), hi = x.front();
    for (double v : x) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double ys = 0.0;
    for (double v : y) ys = std::max(ys, std::abs(v));
    if (ys == 0.0) ys = 1.0;

    Eigen::MatrixXd a(n, degree + 1);
    Eigen::VectorXd b(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const double u = (x[r] - mid) / half;
        double p = 1.0;
        for (int k = 0; k <= degree; ++k, p *= u) a(r, k) = p;
        b(r) = y[r] / ys;
    }
    const Eigen::VectorXd cu = a.colPivHouseholderQr().solve(b);

    // expand sum c_k ((x - mid)/half)^k into powers of x
    std::vector<double> out(degree + 1, 0.0);
    for (int k = 0; k <= degree; ++k) {
        const double ck = cu(k) * ys / std::pow(half, k);
        double binom = 1.0;
        for (int j = 0; j <= k; ++j) {
            out[j] += ck * binom * std::pow(-mid, k - j);
            binom = binom * (k - j) / (j + 1);
        }
    }
    return out;
}

}  // namespace testing_support

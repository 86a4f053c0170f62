#pragma once

// Airy Ai and Ai' on the positive axis via the standard asymptotic expansion
// in zeta = (2/3) x^{3/2}, summed to its smallest term. Truncation error is
// roughly exp(-2 zeta): ~3e-9 relative at x=6, ~1e-13 at x=8, machine level
// beyond x ~ 9. Only used for x >= 5 (integration boundary data and tails);
// the power-law region never calls this.

#include <cmath>
#include <stdexcept>
#include <utility>

#include "covspec/common.hpp"

namespace covspec {

inline std::pair<double, double> airy_ai_aip(double x) {
    if (!(x >= 5.0)) throw std::invalid_argument("airy_ai_aip: valid for x >= 5 only");
    const double zeta = (2.0 / 3.0) * x * std::sqrt(x);
    double u = 1.0, sum_a = 1.0, sum_ap = 1.0;
    double prev_mag = 1.0;
    double zpow = 1.0;
    for (int k = 1; k <= 60; ++k) {
        u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / (216.0 * k * (2.0 * k - 1.0));
        zpow /= -zeta;
        double term_a = u * zpow;
        if (std::abs(term_a) >= prev_mag) break;  // asymptotic series turned
        prev_mag = std::abs(term_a);
        sum_a += term_a;
        sum_ap += term_a * (6.0 * k + 1.0) / (1.0 - 6.0 * k);
        if (prev_mag < 1e-18) break;
    }
    const double pref = std::exp(-zeta) / (2.0 * std::sqrt(kPi));
    const double x4 = std::pow(x, 0.25);
    return {pref / x4 * sum_a, -pref * x4 * sum_ap};
}

inline double airy_ai(double x) { return airy_ai_aip(x).first; }

}  // namespace covspec

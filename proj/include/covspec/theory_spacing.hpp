#pragma once

// Nearest-neighbour spacing laws and spacing extraction from ensembles.
//
//   wigner_surmise       p(s) = (pi/2) s exp(-pi s^2 / 4)
//   generalized_surmise  p_a(s) = pi s / (2 a^2 G(a+1))
//                                 * int_0^inf dt t^(a+2) exp(-t - pi t^2 s^2/(4 a^2))
// The generalized law has unit norm and unit mean for every alpha (both follow
// in closed form by swapping the s and t integrals) and decays like s^-(a+2).
//
// The t-integral is log-concave with a single interior peak, so it is done in
// log space: locate the peak of psi(t) = (a+2) log t - t - beta t^2, bracket
// where psi drops 60 units below it, and run doubling Gauss-Legendre on
// exp(psi - psi_max). This stays accurate over the whole contract range
// (s up to 1e3, alpha in [0.1, 100]) where a naive Gauss-Laguerre rule or the
// alternating half-integer series each lose digits in some corner.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "covspec/common.hpp"
#include "covspec/ensembles.hpp"
#include "covspec/quadrature.hpp"
#include "covspec/theory_density.hpp"

namespace covspec {

enum class SpacingKind { IndividualK, GlobalUnfolded };

struct SpacingSample {
    std::vector<double> values;  // normalized spacings, unit sample mean
    SpacingKind kind = SpacingKind::IndividualK;
    std::optional<int> k_index;  // gap index, present iff individual
};

inline double wigner_surmise(double s) {
    require(s >= 0.0, "wigner_surmise: s must be nonnegative");
    return 0.5 * kPi * s * std::exp(-0.25 * kPi * s * s);
}

namespace detail {

// log of int_0^inf t^p exp(-t - beta t^2) dt for p > 0, beta >= 0.
inline double log_gamma_gauss_integral(double p, double beta, double rel_tol) {
    // peak of psi(t) = p log t - t - beta t^2
    const double t_star = beta > 0.0 ? (std::sqrt(1.0 + 8.0 * beta * p) - 1.0) / (4.0 * beta) : p;
    const double psi_max = p * std::log(t_star) - t_star - beta * t_star * t_star;
    auto psi = [&](double t) { return p * std::log(t) - t - beta * t * t; };

    // bracket [lo, hi] where psi has fallen 60 below the peak
    const double drop = 60.0;
    double lo = t_star, step = t_star * 0.5;
    while (psi(lo) > psi_max - drop) {
        lo -= step;
        if (lo <= 0.0) {
            lo = 0.0;  // t^p handles the endpoint; integrand -> 0 there for p > 0
            break;
        }
    }
    if (lo > 0.0) {  // bisect to tighten
        double a = lo, b = std::min(lo + step, t_star);
        for (int i = 0; i < 60 && b - a > 1e-12 * t_star; ++i) {
            const double m = 0.5 * (a + b);
            (psi(m) > psi_max - drop ? b : a) = m;
        }
        lo = a;
    }
    double hi = t_star * 2.0;
    while (psi(hi) > psi_max - drop) hi *= 2.0;
    {
        double a = std::max(t_star, hi * 0.5), b = hi;
        for (int i = 0; i < 60 && b - a > 1e-12 * hi; ++i) {
            const double m = 0.5 * (a + b);
            (psi(m) > psi_max - drop ? a : b) = m;
        }
        hi = b;
    }

    auto reduced = [&](double t) { return t > 0.0 ? std::exp(psi(t) - psi_max) : 0.0; };
    const double value = integrate_gl_doubling(reduced, lo, hi, rel_tol, 64, 32768);
    return psi_max + std::log(value);
}

}  // namespace detail

inline double generalized_surmise(double s, double alpha) {
    require(s >= 0.0, "generalized_surmise: s must be nonnegative");
    require(alpha > 0.0, "generalized_surmise: alpha must be positive");
    if (s == 0.0) return 0.0;
    const double beta = kPi * s * s / (4.0 * alpha * alpha);
    double log_int;
    try {
        log_int = detail::log_gamma_gauss_integral(alpha + 2.0, beta, 1e-10);
    } catch (const std::exception& e) {
        throw std::runtime_error("generalized_surmise: quadrature did not converge at s=" +
                                 std::to_string(s) + ", alpha=" + std::to_string(alpha) + ": " +
                                 e.what());
    }
    const double log_pref = std::log(kPi * s / (2.0 * alpha * alpha)) - std::lgamma(alpha + 1.0);
    const double lg = log_pref + log_int;
    return std::isfinite(lg) ? std::exp(lg) : 0.0;
}

// Gap k (1-based, k in 1..N-1) between sorted eigenvalues k-1 and k of each
// member, divided by the ensemble-mean gap, so the sample mean is exactly 1.
inline SpacingSample individual_spacings(const SpectraEnsemble& ens, int k) {
    require(ens.size() >= 2, "individual_spacings: need at least two spectra");
    const int n = ens.n();
    require(k >= 1 && k <= n - 1, "individual_spacings: gap index k must lie in [1, N-1]");
    std::vector<double> gaps;
    gaps.reserve(ens.size());
    double total = 0.0;
    for (const Spectrum& sp : ens.spectra) {
        const double g = sp.lambdas[static_cast<std::size_t>(k)] -
                         sp.lambdas[static_cast<std::size_t>(k - 1)];
        gaps.push_back(g);
        total += g;
    }
    const double mean = total / static_cast<double>(gaps.size());
    if (!(mean > 0.0)) throw std::runtime_error("individual_spacings: degenerate ensemble, zero mean gap");
    for (double& g : gaps) g /= mean;
    SpacingSample out;
    out.values = std::move(gaps);
    out.kind = SpacingKind::IndividualK;
    out.k_index = k;
    return out;
}

inline TheoryCurve tabulate_wigner(double s_max = 5.0, std::size_t points = 400) {
    require(points >= 8 && s_max > 0.0, "tabulate_wigner: bad grid");
    TheoryCurve curve;
    curve.kind = CurveKind::WdSpacing;
    for (std::size_t i = 0; i <= points; ++i) {
        const double s = s_max * static_cast<double>(i) / static_cast<double>(points);
        curve.xs.push_back(s);
        curve.ys.push_back(wigner_surmise(s));
    }
    return curve;
}

inline TheoryCurve tabulate_generalized_surmise(double alpha, double s_max = 5.0,
                                                std::size_t points = 400) {
    require(points >= 8 && s_max > 0.0, "tabulate_generalized_surmise: bad grid");
    TheoryCurve curve;
    curve.kind = CurveKind::GenSpacing;
    curve.params = {{"alpha", alpha}};
    for (std::size_t i = 0; i <= points; ++i) {
        const double s = s_max * static_cast<double>(i) / static_cast<double>(points);
        curve.xs.push_back(s);
        curve.ys.push_back(generalized_surmise(s, alpha));
    }
    return curve;
}

}  // namespace covspec

#pragma once

// Spectral densities for the two matrix ensembles.
//
//   mp_density          bulk density with hard edges at c*X_-, c*X_+,
//                       X_pm = (c^{-1/2} pm 1)^2
//   generalized_density power-law partner:
//       rho_a(x) = (2 pi c a G(a+1))^-1 (ca/x)^(a+2)
//                  * int_{X_-}^{X_+} dt t^a exp(-ca t/x) sqrt((t-X_-)(X_+-t))
// which decays like x^-(a+2) and collapses back to mp_density as a -> inf.
//
// The integral is evaluated after t = M + R cos(theta), which absorbs the
// square-root endpoint factors into sin^2(theta); Gauss-Legendre in theta
// then converges geometrically, with order doubling to a relative 1e-9.
// Everything is assembled in log space with the integrand's peak factored
// out, so extreme (x, alpha) corners neither overflow nor lose the tail.

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "covspec/common.hpp"
#include "covspec/quadrature.hpp"

namespace covspec {

enum class CurveKind { MpDensity, GenDensity, WdSpacing, GenSpacing, TwCdf, TwPdf };

inline std::string to_string(CurveKind k) {
    switch (k) {
        case CurveKind::MpDensity: return "mp-density";
        case CurveKind::GenDensity: return "gen-density";
        case CurveKind::WdSpacing: return "wd-spacing";
        case CurveKind::GenSpacing: return "gen-spacing";
        case CurveKind::TwCdf: return "tw-cdf";
        case CurveKind::TwPdf: return "tw-pdf";
    }
    return "unknown";
}

struct TheoryCurve {
    std::vector<double> xs;
    std::vector<double> ys;
    CurveKind kind = CurveKind::MpDensity;
    std::map<std::string, double> params;
};

inline std::pair<double, double> mp_support(double c) {
    require(c > 0.0 && c <= 1.0, "mp_support: c must lie in (0, 1]");
    const double r = 1.0 / std::sqrt(c);
    const double x_minus = (r - 1.0) * (r - 1.0);
    const double x_plus = (r + 1.0) * (r + 1.0);
    return {c * x_minus, c * x_plus};
}

inline double mp_density(double x, double c) {
    auto [lo, hi] = mp_support(c);
    if (x <= lo || x >= hi) return 0.0;
    return std::sqrt((x - lo) * (hi - x)) / (2.0 * kPi * c * x);
}

namespace detail {

// log of int_{X_-}^{X_+} dt t^alpha exp(-b t) sqrt((t-X_-)(X_+-t)), with the
// peak value of phi(t) = alpha*log(t) - b*t factored out before quadrature.
inline double log_edge_weighted_integral(double x_minus, double x_plus, double alpha, double b,
                                         double rel_tol) {
    const double mid = 0.5 * (x_plus + x_minus);
    const double rad = 0.5 * (x_plus - x_minus);
    double t_star = alpha / b;  // unconstrained maximum of phi
    t_star = std::min(std::max(t_star, x_minus), x_plus);
    const double phi_max = alpha * std::log(t_star) - b * t_star;

    auto reduced = [&](double theta) {
        const double t = mid + rad * std::cos(theta);
        const double s = std::sin(theta);
        const double phi = alpha * std::log(t) - b * t;
        return rad * rad * s * s * std::exp(phi - phi_max);
    };
    const double value = integrate_gl_doubling(reduced, 0.0, kPi, rel_tol, 32, 32768);
    if (!(value > 0.0)) return -std::numeric_limits<double>::infinity();
    return phi_max + std::log(value);
}

}  // namespace detail

inline double log_generalized_density(double x, double c, double alpha) {
    require(x > 0.0, "generalized_density: x must be positive");
    require(alpha > 0.0, "generalized_density: alpha must be positive");
    require(c > 0.0 && c <= 1.0, "generalized_density: c must lie in (0, 1]");
    const double r = 1.0 / std::sqrt(c);
    const double x_minus = (r - 1.0) * (r - 1.0);
    const double x_plus = (r + 1.0) * (r + 1.0);
    const double b = c * alpha / x;
    double log_int;
    try {
        log_int = detail::log_edge_weighted_integral(x_minus, x_plus, alpha, b, 1e-11);
    } catch (const std::exception& e) {
        throw std::runtime_error("generalized_density: quadrature did not converge at x=" +
                                 std::to_string(x) + ", alpha=" + std::to_string(alpha) + ": " +
                                 e.what());
    }
    const double log_pref = -std::log(2.0 * kPi * c * alpha) - std::lgamma(alpha + 1.0) +
                            (alpha + 2.0) * std::log(b);
    return log_pref + log_int;
}

inline double generalized_density(double x, double c, double alpha) {
    const double lg = log_generalized_density(x, c, alpha);
    return std::isfinite(lg) ? std::exp(lg) : 0.0;
}

// Cumulative distributions, for KS-style comparisons.
inline double mp_cdf(double x, double c) {
    auto [lo, hi] = mp_support(c);
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    const double mid = 0.5 * (hi + lo);
    const double rad = 0.5 * (hi - lo);
    // theta runs from theta_x (at t = x) to pi (at t = lo)
    const double theta_x = std::acos(std::min(1.0, std::max(-1.0, (x - mid) / rad)));
    auto f = [&](double theta) {
        const double t = mid + rad * std::cos(theta);
        const double s = std::sin(theta);
        return rad * rad * s * s / (2.0 * kPi * c * t);
    };
    return integrate_gl_doubling(f, theta_x, kPi, 1e-11, 64, 8192);
}

// Tabulation: linear across the bulk window, log-spaced tail points.
inline TheoryCurve tabulate_mp(double c, std::size_t bulk_points = 400) {
    require(bulk_points >= 8, "tabulate_mp: too few points");
    auto [lo, hi] = mp_support(c);
    TheoryCurve curve;
    curve.kind = CurveKind::MpDensity;
    curve.params = {{"c", c}};
    const double span = hi - lo;
    if (lo <= 0.0) {
        // square-root singularity at the origin when c = 1: cluster the first
        // points geometrically so a trapezoid over the table still sums to ~1
        for (int k = -26; k <= -7; ++k) curve.xs.push_back(lo + span * std::pow(2.0, k));
    }
    const double bulk_start = lo <= 0.0 ? lo + span * std::pow(2.0, -7) : lo;
    for (std::size_t i = 0; i <= bulk_points; ++i)
        curve.xs.push_back(bulk_start + (hi - bulk_start) * static_cast<double>(i) /
                                            static_cast<double>(bulk_points));
    for (double x : curve.xs) curve.ys.push_back(mp_density(x, c));
    return curve;
}

inline TheoryCurve tabulate_generalized(double c, double alpha, std::size_t bulk_points = 400,
                                        std::size_t tail_points = 120, double x_max = 1e3) {
    require(bulk_points >= 8 && tail_points >= 2, "tabulate_generalized: too few points");
    auto [lo, hi] = mp_support(c);
    require(x_max > hi, "tabulate_generalized: x_max must exceed the bulk edge");
    TheoryCurve curve;
    curve.kind = CurveKind::GenDensity;
    curve.params = {{"c", c}, {"alpha", alpha}};
    const double x0 = lo > 0.0 ? lo * 0.25 : (hi - lo) * 1e-4;
    for (std::size_t i = 0; i < bulk_points; ++i)
        curve.xs.push_back(x0 + (hi - x0) * static_cast<double>(i) / static_cast<double>(bulk_points));
    const double ratio = std::log(x_max / hi);
    for (std::size_t i = 0; i <= tail_points; ++i)
        curve.xs.push_back(hi * std::exp(ratio * static_cast<double>(i) / static_cast<double>(tail_points)));
    for (double x : curve.xs) curve.ys.push_back(generalized_density(x, c, alpha));
    return curve;
}

}  // namespace covspec

#pragma once

// Least-squares fitting of the tail exponent alpha against either the
// spectral density or the nearest-neighbour spacing distribution, plus the
// Kolmogorov-Smirnov distances used to report goodness of fit.
//
// The objective is deliberately plain: histogram the sample, evaluate the
// candidate curve at bin centers, sum squared differences (empty bins count —
// they penalise curves that put weight where the data has none). The alpha
// scan runs on a fixed log grid and is polished by golden-section search in
// log(alpha); hitting either end of the grid sets a flag instead of refining,
// since the family degenerates there (alpha -> infinity is the Gaussian
// ensemble) and the minimum is not interior.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "covspec/common.hpp"
#include "covspec/spectra.hpp"
#include "covspec/theory_density.hpp"
#include "covspec/theory_spacing.hpp"

namespace covspec {

// One-sample KS statistic against a CDF callable; both one-sided gaps are
// taken, so a sample of n mid-quantiles scores exactly 1/(2n).
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf&& cdf) {
    require(!sample.empty(), "ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, (static_cast<double>(i) + 1.0) / n - f);
        d = std::max(d, f - static_cast<double>(i) / n);
    }
    return d;
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// Piecewise-linear CDF built by trapezoidal accumulation of a tabulated
// curve. Returns 0 below the table and the accumulated total above it; the
// total is close to 1 for a well-tabulated density but is not forced to it.
struct CurveCdf {
    std::vector<double> xs;
    std::vector<double> cum;

    double operator()(double x) const {
        if (x <= xs.front()) return 0.0;
        if (x >= xs.back()) return cum.back();
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
        const std::size_t lo = hi - 1;
        const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
        return cum[lo] + w * (cum[hi] - cum[lo]);
    }
};

inline CurveCdf curve_cdf(const TheoryCurve& curve) {
    require(curve.xs.size() == curve.ys.size() && curve.xs.size() >= 2,
            "curve_cdf: need a tabulated curve with at least two points");
    CurveCdf out;
    out.xs = curve.xs;
    out.cum.resize(curve.xs.size());
    out.cum[0] = 0.0;
    for (std::size_t i = 1; i < curve.xs.size(); ++i) {
        require(curve.xs[i] > curve.xs[i - 1], "curve_cdf: x values must be strictly ascending");
        out.cum[i] = out.cum[i - 1] +
                     0.5 * (curve.ys[i] + curve.ys[i - 1]) * (curve.xs[i] - curve.xs[i - 1]);
    }
    return out;
}

struct FitReport {
    double alpha_hat = 0.0;
    double objective = 0.0;  // sum of squared histogram-vs-curve differences
    double ks = 0.0;         // empirical sample vs fitted CDF
    bool boundary_hit = false;
    std::vector<double> grid_alphas;
    std::vector<double> grid_objectives;
    DensityHistogram histogram;
    std::size_t n_samples = 0;
    CurveKind fitted_kind = CurveKind::GenDensity;
    // Spacing fits also report how the alpha-free Wigner surmise does on the
    // same histogram, as the natural null to beat.
    double ws_objective = std::numeric_limits<double>::quiet_NaN();
    double ws_ks = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline std::size_t default_bins(std::size_t n) {
    const auto b = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    return std::min<std::size_t>(std::max<std::size_t>(b, 4), 60);
}

template <class Objective>
void scan_and_polish(FitReport& rep, Objective&& objective) {
    constexpr double kAlphaLo = 0.1;
    constexpr double kAlphaHi = 100.0;
    constexpr std::size_t kGrid = 60;
    rep.grid_alphas.resize(kGrid);
    rep.grid_objectives.resize(kGrid);
    const double log_lo = std::log(kAlphaLo);
    const double log_hi = std::log(kAlphaHi);
    std::size_t best = 0;
    for (std::size_t i = 0; i < kGrid; ++i) {
        const double a = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                               static_cast<double>(kGrid - 1));
        rep.grid_alphas[i] = a;
        rep.grid_objectives[i] = objective(a);
        if (rep.grid_objectives[i] < rep.grid_objectives[best]) best = i;
    }
    rep.alpha_hat = rep.grid_alphas[best];
    rep.objective = rep.grid_objectives[best];
    if (best == 0 || best == kGrid - 1) {
        rep.boundary_hit = true;
        return;
    }
    // Golden-section in log(alpha) between the grid neighbours of the best
    // point, down to 1e-3 relative width.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::log(rep.grid_alphas[best - 1]);
    double hi = std::log(rep.grid_alphas[best + 1]);
    double m1 = hi - inv_phi * (hi - lo);
    double m2 = lo + inv_phi * (hi - lo);
    double f1 = objective(std::exp(m1));
    double f2 = objective(std::exp(m2));
    while (hi - lo > 1e-3) {  // log width == relative width
        if (f1 <= f2) {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - inv_phi * (hi - lo);
            f1 = objective(std::exp(m1));
        } else {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + inv_phi * (hi - lo);
            f2 = objective(std::exp(m2));
        }
    }
    const double log_a = f1 <= f2 ? m1 : m2;
    const double f_best = std::min(f1, f2);
    if (f_best < rep.objective) {
        rep.alpha_hat = std::exp(log_a);
        rep.objective = f_best;
    }
}

inline double histogram_sse(const DensityHistogram& h, const std::vector<double>& curve_at_centers) {
    double sse = 0.0;
    for (std::size_t b = 0; b < h.bins(); ++b) {
        const double d = h.heights[b] - curve_at_centers[b];
        sse += d * d;
    }
    return sse;
}

inline double upper_quantile(const std::vector<double>& values, double q) {
    std::vector<double> s(values);
    std::sort(s.begin(), s.end());
    auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(s.size())));
    if (idx == 0) idx = 1;
    return s[std::min(s.size() - 1, idx - 1)];
}

// Histogram capped at the 99% sample quantile. For algebraic tails the sample
// maximum grows without bound with the sample size, so a max-ranged histogram
// loses bulk resolution as data accumulate and the fit degrades. Heights are
// rescaled by the in-range fraction so they still estimate the unconditional
// density that the theory curves describe.
inline DensityHistogram capped_histogram(const std::vector<double>& values, std::size_t bins,
                                         double lo) {
    const double cap = upper_quantile(values, 0.99);
    if (!(cap > lo)) return histogram_density(values, bins);
    DensityHistogram h = histogram_density(values, bins, std::pair<double, double>{lo, cap});
    const double frac =
        static_cast<double>(h.total_count) / static_cast<double>(values.size());
    for (double& height : h.heights) height *= frac;
    return h;
}

}  // namespace detail

// Fits alpha to pooled eigenvalues that have already been rescaled to unit
// mean (the theory curves are normalized that way); c is the known aspect
// ratio n/t of the matrices the eigenvalues came from.
inline FitReport fit_alpha_density(const std::vector<double>& unit_mean_values, double c,
                                   std::size_t bins = 0) {
    require(unit_mean_values.size() >= 16, "fit_alpha_density: need at least 16 values");
    require(c > 0.0 && c <= 1.0, "fit_alpha_density: c must lie in (0, 1]");
    if (bins == 0) bins = detail::default_bins(unit_mean_values.size());
    FitReport rep;
    rep.fitted_kind = CurveKind::GenDensity;
    rep.n_samples = unit_mean_values.size();
    const double data_min = *std::min_element(unit_mean_values.begin(), unit_mean_values.end());
    rep.histogram = detail::capped_histogram(unit_mean_values, bins, data_min);
    std::vector<double> centers(bins);
    for (std::size_t b = 0; b < bins; ++b)
        centers[b] = 0.5 * (rep.histogram.bin_edges[b] + rep.histogram.bin_edges[b + 1]);
    std::vector<double> curve(bins);
    detail::scan_and_polish(rep, [&](double alpha) {
        for (std::size_t b = 0; b < bins; ++b) curve[b] = generalized_density(centers[b], c, alpha);
        return detail::histogram_sse(rep.histogram, curve);
    });
    const double data_max = *std::max_element(unit_mean_values.begin(), unit_mean_values.end());
    const double hi_edge = mp_support(c).second;
    const double x_max = std::max(data_max * 1.05, hi_edge * 4.0);
    rep.ks = ks_distance(unit_mean_values,
                         curve_cdf(tabulate_generalized(c, rep.alpha_hat, 2000, 400, x_max)));
    return rep;
}

// Fits alpha to a unit-mean spacing sample (individual-k or unfolded). The
// histogram runs from zero so that missing weight near the origin counts.
inline FitReport fit_alpha_spacing(const SpacingSample& sample, std::size_t bins = 0) {
    require(sample.values.size() >= 16, "fit_alpha_spacing: need at least 16 spacings");
    if (bins == 0) bins = detail::default_bins(sample.values.size());
    FitReport rep;
    rep.fitted_kind = CurveKind::GenSpacing;
    rep.n_samples = sample.values.size();
    const double data_max = *std::max_element(sample.values.begin(), sample.values.end());
    rep.histogram = detail::capped_histogram(sample.values, bins, 0.0);
    std::vector<double> centers(bins);
    for (std::size_t b = 0; b < bins; ++b)
        centers[b] = 0.5 * (rep.histogram.bin_edges[b] + rep.histogram.bin_edges[b + 1]);
    std::vector<double> curve(bins);
    detail::scan_and_polish(rep, [&](double alpha) {
        for (std::size_t b = 0; b < bins; ++b) curve[b] = generalized_surmise(centers[b], alpha);
        return detail::histogram_sse(rep.histogram, curve);
    });
    const double s_max = std::max(data_max * 1.05, 6.0);
    rep.ks = ks_distance(sample.values,
                         curve_cdf(tabulate_generalized_surmise(rep.alpha_hat, s_max, 2000)));
    for (std::size_t b = 0; b < bins; ++b) curve[b] = wigner_surmise(centers[b]);
    rep.ws_objective = detail::histogram_sse(rep.histogram, curve);
    rep.ws_ks = ks_distance(sample.values, [](double s) {
        return 1.0 - std::exp(-kPi * s * s / 4.0);  // closed-form Wigner CDF
    });
    return rep;
}

}  // namespace covspec

#pragma once

// Polynomial unfolding of eigenvalue spectra. The empirical cumulative count
// P(y) = #{lambda <= y}/m is tabulated on a regular grid over [0, max lambda],
// a least-squares polynomial p_d is fitted to it, and each eigenvalue is
// mapped through p_d; nearest-neighbour differences of the mapped values
// within each sample then have unit mean density by construction, making
// spacing statistics comparable across spectra.
//
// The fit runs in the scaled variable u = y/y_max, so unfolding commutes with
// a common rescaling of all eigenvalues. Polynomial wiggle at the support
// edges can produce negative mapped spacings; those are dropped and counted,
// never clamped (a clamp would pile a spurious spike at s = 0). The pooled
// sample is normalized to unit mean at the end; the pre-normalization mean is
// kept as a diagnostic (it sits within O(1/N) of 1 for a good fit).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covspec/common.hpp"
#include "covspec/ensembles.hpp"
#include "covspec/theory_spacing.hpp"

namespace covspec {

struct UnfoldConfig {
    std::size_t grid_points = 200;
    int poly_degree = 5;
    std::size_t bins = 30;

    void validate() const {
        require(poly_degree >= 1, "UnfoldConfig: poly_degree must be >= 1");
        require(grid_points >= static_cast<std::size_t>(poly_degree) + 2,
                "UnfoldConfig: need grid_points >= poly_degree + 2");
    }
};

struct CumulativePoly {
    std::vector<double> coeffs;  // in u = y/y_max, ascending powers
    double y_max = 1.0;
    int degree_used = 0;
    std::vector<std::string> warnings;

    double eval(double y) const {
        const double u = y / y_max;
        double acc = 0.0;
        for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * u + coeffs[j];
        return acc;
    }
};

// Empirical cumulative count on an arbitrary ascending grid: for each grid
// point, the number of eigenvalues <= y across all members, divided by the
// member count.
inline std::vector<double> cumulative_counts(const SpectraEnsemble& ens,
                                             const std::vector<double>& grid) {
    require(!ens.spectra.empty(), "cumulative_counts: empty ensemble");
    require(!grid.empty(), "cumulative_counts: empty grid");
    std::vector<double> pooled = pooled_eigenvalues(ens);
    std::sort(pooled.begin(), pooled.end());
    std::vector<double> out;
    out.reserve(grid.size());
    const double m = static_cast<double>(ens.size());
    for (double y : grid) {
        const auto it = std::upper_bound(pooled.begin(), pooled.end(), y);
        out.push_back(static_cast<double>(it - pooled.begin()) / m);
    }
    return out;
}

inline CumulativePoly estimate_cumulative(const SpectraEnsemble& ens, const UnfoldConfig& cfg = {}) {
    cfg.validate();
    require(!ens.spectra.empty(), "estimate_cumulative: empty ensemble");
    double y_max = 0.0;
    for (const Spectrum& s : ens.spectra) y_max = std::max(y_max, s.max());
    require(y_max > 0.0, "estimate_cumulative: all eigenvalues are zero");

    const std::size_t k = cfg.grid_points;
    std::vector<double> grid(k);
    for (std::size_t r = 0; r < k; ++r)
        grid[r] = y_max * static_cast<double>(r) / static_cast<double>(k - 1);
    const std::vector<double> p_tilde = cumulative_counts(ens, grid);

    CumulativePoly poly;
    poly.y_max = y_max;
    Eigen::VectorXd b(static_cast<Eigen::Index>(k));
    for (std::size_t r = 0; r < k; ++r) b(static_cast<Eigen::Index>(r)) = p_tilde[r];
    for (int d = cfg.poly_degree; d >= 1; --d) {
        Eigen::MatrixXd a(static_cast<Eigen::Index>(k), d + 1);
        for (std::size_t r = 0; r < k; ++r) {
            const double u = grid[r] / y_max;
            double pw = 1.0;
            for (int j = 0; j <= d; ++j) {
                a(static_cast<Eigen::Index>(r), j) = pw;
                pw *= u;
            }
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        if (qr.rank() < d + 1) {
            poly.warnings.push_back("degree " + std::to_string(d) +
                                    " fit is rank-deficient; reducing degree");
            continue;
        }
        Eigen::VectorXd x = qr.solve(b);
        poly.coeffs.assign(x.data(), x.data() + x.size());
        poly.degree_used = d;
        return poly;
    }
    throw std::runtime_error("estimate_cumulative: no polynomial degree gave a full-rank fit");
}

struct UnfoldResult {
    SpacingSample sample;             // normalized, unit mean
    CumulativePoly poly;
    std::size_t dropped_negative = 0; // spacings removed where the fit wiggled
    double raw_mean = 0.0;            // pooled mean before normalization
};

inline UnfoldResult unfold_spacings(const SpectraEnsemble& ens, const UnfoldConfig& cfg = {}) {
    UnfoldResult res;
    res.poly = estimate_cumulative(ens, cfg);
    std::vector<double> pooled;
    for (const Spectrum& sp : ens.spectra) {
        for (std::size_t j = 1; j < sp.lambdas.size(); ++j) {
            const double d = res.poly.eval(sp.lambdas[j]) - res.poly.eval(sp.lambdas[j - 1]);
            if (d < 0.0)
                ++res.dropped_negative;
            else
                pooled.push_back(d);
        }
    }
    require(!pooled.empty(), "unfold_spacings: every spacing was dropped (fit is non-monotone)");
    double mean = 0.0;
    for (double v : pooled) mean += v;
    mean /= static_cast<double>(pooled.size());
    require(mean > 0.0, "unfold_spacings: nonpositive mean spacing");
    res.raw_mean = mean;
    for (double& v : pooled) v /= mean;
    res.sample.values = std::move(pooled);
    res.sample.kind = SpacingKind::GlobalUnfolded;
    res.sample.k_index.reset();
    return res;
}

}  // namespace covspec

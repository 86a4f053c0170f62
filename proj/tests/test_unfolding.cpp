#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "covspec/ensembles.hpp"
#include "covspec/fitting.hpp"
#include "covspec/unfolding.hpp"

using namespace covspec;
using Catch::Matchers::WithinAbs;

TEST_CASE("unfold configuration validation") {
    UnfoldConfig cfg;
    REQUIRE_NOTHROW(cfg.validate());
    cfg.poly_degree = 0;
    REQUIRE_THROWS(cfg.validate());
    cfg.poly_degree = 5;
    cfg.grid_points = 6;  // needs degree + 2
    REQUIRE_THROWS(cfg.validate());
}

TEST_CASE("cumulative counts on a hand ensemble") {
    SpectraEnsemble ens;
    Spectrum a, b;
    a.lambdas = {1.0, 2.0, 3.0};
    b.lambdas = {2.0, 3.0, 4.0};
    a.n_assets = b.n_assets = 3;
    ens.spectra = {a, b};
    const std::vector<double> counts = cumulative_counts(ens, {0.0, 1.0, 2.5, 4.0});
    REQUIRE(counts.size() == 4);
    REQUIRE(counts[0] == 0.0);
    REQUIRE(counts[1] == 0.5);  // one eigenvalue <= 1 across two members
    REQUIRE(counts[2] == 1.5);
    REQUIRE(counts[3] == 3.0);

    REQUIRE_THROWS(cumulative_counts(SpectraEnsemble{}, {1.0}));
    REQUIRE_THROWS(cumulative_counts(ens, {}));
}

TEST_CASE("polynomial evaluation is Horner in the scaled variable") {
    CumulativePoly p;
    p.coeffs = {1.0, 2.0, 3.0};
    p.y_max = 2.0;
    REQUIRE_THAT(p.eval(0.0), WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(p.eval(2.0), WithinAbs(6.0, 1e-15));        // u = 1
    REQUIRE_THAT(p.eval(1.0), WithinAbs(2.75, 1e-15));       // u = 0.5
}

TEST_CASE("fitted cumulative spans the member eigenvalue count") {
    SpectraEnsemble wl = sample_wishart(WLParams{20, 48}, 300, 7);
    CumulativePoly poly = estimate_cumulative(wl);
    REQUIRE(poly.degree_used == 5);
    REQUIRE(poly.y_max > 0.0);
    // the fitted count rises from ~0 to ~N across the support; edge wiggle is
    // expected, large excursions are not
    REQUIRE(poly.eval(poly.y_max) > 18.5);
    REQUIRE(poly.eval(poly.y_max) < 21.5);
    REQUIRE(std::abs(poly.eval(0.0)) < 2.0);
    REQUIRE(poly.warnings.empty());

    REQUIRE_THROWS(estimate_cumulative(SpectraEnsemble{}));
}

TEST_CASE("unfolded spacings are unit-mean and near the reference law") {
    SpectraEnsemble wl = sample_wishart(WLParams{20, 48}, 300, 7);
    UnfoldResult un = unfold_spacings(wl);
    REQUIRE(un.sample.kind == SpacingKind::GlobalUnfolded);
    REQUIRE_FALSE(un.sample.k_index.has_value());

    double m = 0.0;
    for (double v : un.sample.values) m += v;
    m /= un.sample.values.size();
    REQUIRE_THAT(m, WithinAbs(1.0, 1e-12));  // normalized exactly

    // Perfect unfolding of m members with n eigenvalues each gives a
    // pre-normalization mean of n/(n+1), not 1: each member's n-1 gaps span
    // the cumulative count between its own extreme order statistics, and
    // E[span] = n(n-1)/(n+1). Measured 0.9622 here against 20/21 = 0.95238.
    REQUIRE_THAT(un.raw_mean, WithinAbs(20.0 / 21.0, 0.03));

    // fit wiggle may drop a few spacings at the support edges; more than 1%
    // would mean the fit is failing
    const std::size_t total = un.sample.values.size() + un.dropped_negative;
    REQUIRE(un.dropped_negative * 100 < total);
    REQUIRE(total == 300 * 19);

    const double ks = ks_distance(un.sample.values, [](double s) {
        return 1.0 - std::exp(-0.25 * kPi * s * s);
    });
    REQUIRE(ks < 0.05);  // measured 0.017 at 300 members

    // same input, same output
    UnfoldResult again = unfold_spacings(wl);
    REQUIRE(again.sample.values == un.sample.values);
}

TEST_CASE("degenerate spectra cannot be unfolded") {
    Spectrum flat;
    flat.lambdas = {1.0, 1.0, 1.0};
    flat.n_assets = 3;
    SpectraEnsemble ens;
    ens.spectra = {flat, flat};
    // every mapped spacing is zero, so the mean-spacing normalization fails
    REQUIRE_THROWS(unfold_spacings(ens));
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "covspec/quadrature.hpp"
#include "covspec/theory_spacing.hpp"

using namespace covspec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("wigner surmise closed form") {
    REQUIRE(wigner_surmise(0.0) == 0.0);
    REQUIRE_THAT(wigner_surmise(1.0), WithinAbs(0.7161859363405692, 1e-15));  // (pi/2) e^{-pi/4}
    REQUIRE_THAT(wigner_surmise(2.0), WithinAbs(0.13576052815029668, 1e-15));  // pi e^{-pi}
    REQUIRE_THROWS(wigner_surmise(-0.1));

    // unit norm and unit mean; the e^{-pi s^2/4} tail is dead beyond s = 15
    const double norm =
        integrate_gl_doubling([](double s) { return wigner_surmise(s); }, 0.0, 15.0, 1e-12);
    const double mean =
        integrate_gl_doubling([](double s) { return s * wigner_surmise(s); }, 0.0, 15.0, 1e-12);
    REQUIRE_THAT(norm, WithinAbs(1.0, 1e-10));
    REQUIRE_THAT(mean, WithinAbs(1.0, 1e-10));
}

TEST_CASE("power-law surmise matches 50-digit reference values") {
    // independent mpmath evaluation of the t-integral; worst deviation
    // measured at 2e-13 relative
    struct Ref {
        double s, alpha, p;
    };
    const Ref refs[] = {
        {0.5, 0.5, 0.708164368275514335},
        {1.0, 0.5, 0.227073600652590853},
        {2.0, 0.5, 0.0553645884349756619},
        {5.0, 0.5, 0.00685065257542923773},
        {0.5, 3.0, 0.851157667655980782},
        {1.0, 3.0, 0.495175855086511906},
        {2.0, 3.0, 0.11231794046935962},
        {5.0, 3.0, 0.0047939962081847356},
        {0.5, 8.0, 0.757249155854683429},
        {1.0, 8.0, 0.612138577927693122},
        {2.0, 8.0, 0.130809053736243501},
        {5.0, 8.0, 0.00122267394397365431},
        // corners of the supported range
        {0.001, 0.1, 0.36249217762352105},
        {1000.0, 0.1, 4.24757424490299812e-8},
        {1.0, 100.0, 0.707130986639084858},
        {5.0, 100.0, 1.25033123822896502e-6},
    };
    for (const Ref& r : refs) REQUIRE_THAT(generalized_surmise(r.s, r.alpha), WithinRel(r.p, 1e-9));
}

TEST_CASE("power-law surmise has unit norm and unit mean") {
    for (double alpha : {0.5, 1.0, 3.0, 10.0}) {
        auto f = [&](double s) { return generalized_surmise(s, alpha); };
        auto sf = [&](double s) { return s * generalized_surmise(s, alpha); };
        // bulk to s=50, then the algebraic tail through s = 50/w^4
        auto with_tail = [&](const std::function<double(double)>& g) {
            const double bulk = integrate_gl_doubling(g, 0.0, 50.0, 1e-9, 64, 16384);
            auto tf = [&](double w) {
                const double v = w * w * w * w;
                return g(50.0 / v) * 50.0 / (v * v) * 4.0 * w * w * w;
            };
            return bulk + integrate_gl_doubling(tf, 0.0, 1.0, 1e-9, 64, 16384);
        };
        REQUIRE_THAT(with_tail(f), WithinAbs(1.0, 1e-6));
        REQUIRE_THAT(with_tail(sf), WithinAbs(1.0, 1e-6));
    }
}

TEST_CASE("power-law surmise edge cases") {
    REQUIRE(generalized_surmise(0.0, 3.0) == 0.0);
    REQUIRE_THROWS(generalized_surmise(-0.5, 3.0));
    REQUIRE_THROWS(generalized_surmise(1.0, 0.0));
    REQUIRE_THROWS(generalized_surmise(1.0, -1.0));

    // collapses onto the Gaussian surmise as alpha grows
    for (double s : {0.5, 1.0, 2.0})
        REQUIRE_THAT(generalized_surmise(s, 5000.0), WithinAbs(wigner_surmise(s), 1e-3));
}

TEST_CASE("spacing tail decays with exponent alpha + 2") {
    for (double alpha : {1.0, 3.0}) {
        std::vector<double> lx, ly;
        for (int i = 0; i <= 8; ++i) {
            const double s = 100.0 * std::pow(10.0, i / 8.0);
            lx.push_back(std::log(s));
            ly.push_back(std::log(generalized_surmise(s, alpha)));
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = lx.size();
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        REQUIRE_THAT(slope, WithinRel(-(alpha + 2.0), 0.02));
    }
}

TEST_CASE("individual spacings are mean-normalized per gap index") {
    SpectraEnsemble ens;
    Spectrum a, b;
    a.lambdas = {1.0, 2.0, 4.0};
    b.lambdas = {1.0, 3.0, 6.0};
    a.n_assets = b.n_assets = 3;
    ens.spectra = {a, b};

    SpacingSample s1 = individual_spacings(ens, 1);
    REQUIRE(s1.kind == SpacingKind::IndividualK);
    REQUIRE(s1.k_index.has_value());
    REQUIRE(*s1.k_index == 1);
    REQUIRE_THAT(s1.values[0], WithinAbs(2.0 / 3.0, 1e-15));  // gaps {1,2}, mean 1.5
    REQUIRE_THAT(s1.values[1], WithinAbs(4.0 / 3.0, 1e-15));

    SpacingSample s2 = individual_spacings(ens, 2);
    REQUIRE_THAT(s2.values[0], WithinAbs(0.8, 1e-15));  // gaps {2,3}, mean 2.5
    REQUIRE_THAT(s2.values[1], WithinAbs(1.2, 1e-15));

    REQUIRE_THROWS(individual_spacings(ens, 0));
    REQUIRE_THROWS(individual_spacings(ens, 3));  // only N-1 gaps exist

    SpectraEnsemble single;
    single.spectra = {a};
    REQUIRE_THROWS(individual_spacings(single, 1));

    // all members identical and degenerate: zero mean gap
    Spectrum flat;
    flat.lambdas = {2.0, 2.0, 2.0};
    flat.n_assets = 3;
    SpectraEnsemble degen;
    degen.spectra = {flat, flat};
    REQUIRE_THROWS(individual_spacings(degen, 1));
}

TEST_CASE("surmise tabulation") {
    TheoryCurve w = tabulate_wigner(5.0, 100);
    REQUIRE(w.kind == CurveKind::WdSpacing);
    REQUIRE(w.xs.size() == 101);
    REQUIRE(w.xs.front() == 0.0);
    REQUIRE(w.ys.front() == 0.0);
    REQUIRE_THAT(w.xs.back(), WithinAbs(5.0, 1e-12));

    TheoryCurve g = tabulate_generalized_surmise(3.0, 6.0, 50);
    REQUIRE(g.kind == CurveKind::GenSpacing);
    REQUIRE(g.params.at("alpha") == 3.0);
    REQUIRE(g.xs.size() == 51);

    REQUIRE_THROWS(tabulate_wigner(0.0, 100));
    REQUIRE_THROWS(tabulate_wigner(5.0, 4));
    REQUIRE_THROWS(tabulate_generalized_surmise(3.0, -1.0, 50));
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "covspec/chopping.hpp"
#include "covspec/rng.hpp"
#include "covspec/spectra.hpp"

using namespace covspec;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

// iid standard-normal return panel with one independent stream per column, so
// column count changes never reshuffle the other columns
ReturnPanel normal_panel(int rows, int cols, std::uint64_t seed) {
    ReturnPanel rp;
    rp.X.resize(rows, cols);
    rp.asset_ids.reserve(static_cast<std::size_t>(cols));
    for (int j = 0; j < cols; ++j) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(j));
        for (int i = 0; i < rows; ++i) rp.X(i, j) = rng.normal();
        rp.asset_ids.push_back("col" + std::to_string(j));
    }
    return rp;
}

}  // namespace

TEST_CASE("chop counts, shapes and provenance") {
    ReturnPanel rp = normal_panel(970, 401, 1);
    ChopConfig cfg;
    cfg.t_window = 48;
    cfg.n_block = 20;

    SpectraEnsemble m2 = chop_method2(rp, cfg);
    REQUIRE(m2.size() == 400);  // floor(970/48)=20 windows x floor(401/20)=20 blocks
    REQUIRE(m2.provenance == Provenance::ChoppedMethod2);
    for (const Spectrum& s : m2.spectra) {
        REQUIRE(s.n_assets == 20);
        REQUIRE(s.t_window == 48);
        REQUIRE_THAT(s.c_ratio, WithinAbs(20.0 / 48.0, 1e-15));
    }

    ChopConfig cfg10 = cfg;
    cfg10.n_block = 10;
    REQUIRE(chop_method2(rp, cfg10).size() == 800);

    SpectraEnsemble m1 = chop_method1(rp, cfg);
    REQUIRE(m1.size() == 20);  // one spectrum per window, all assets kept
    REQUIRE(m1.provenance == Provenance::ChoppedMethod1);
    REQUIRE(m1.spectra.front().n_assets == 401);
}

TEST_CASE("per-window renormalization yields correlation spectra") {
    ReturnPanel rp = normal_panel(200, 60, 3);
    ChopConfig cfg;
    cfg.t_window = 50;
    cfg.n_block = 15;

    SpectraEnsemble on = chop_method2(rp, cfg);
    for (const Spectrum& s : on.spectra) {
        double tr = 0.0;
        for (double v : s.lambdas) tr += v;
        REQUIRE_THAT(tr, WithinAbs(15.0, 1e-8));  // unit diagonal -> trace n
    }

    cfg.renormalize_per_window = false;
    SpectraEnsemble off = chop_method2(rp, cfg);
    REQUIRE(off.size() == on.size());
    bool any_off_trace = false;
    for (const Spectrum& s : off.spectra) {
        double tr = 0.0;
        for (double v : s.lambdas) tr += v;
        if (std::abs(tr - 15.0) > 1e-3) any_off_trace = true;
    }
    REQUIRE(any_off_trace);  // raw windows carry their sampled variances
}

TEST_CASE("chop ordering is window-major") {
    ReturnPanel rp = normal_panel(40, 10, 6);
    ChopConfig cfg;
    cfg.t_window = 20;
    cfg.n_block = 5;
    SpectraEnsemble ens = chop_method2(rp, cfg);
    REQUIRE(ens.size() == 4);  // 2 windows x 2 blocks

    // index 1 must be window 0, block 1 — rebuild that block by hand
    Eigen::MatrixXd sub = rp.X.block(0, 5, 20, 5);
    const auto rows = static_cast<double>(sub.rows());
    for (Eigen::Index j = 0; j < sub.cols(); ++j) {
        const double mean = sub.col(j).mean();
        sub.col(j).array() -= mean;
        const double var = sub.col(j).squaredNorm() / rows;
        sub.col(j) /= std::sqrt(var);
    }
    Spectrum manual = eigenvalues_sym(covariance_of(sub));
    REQUIRE(ens.spectra[1].lambdas == manual.lambdas);

    // and the work partition must not change the numbers
    SpectraEnsemble threaded = chop_method2(rp, cfg, 3);
    for (std::size_t i = 0; i < ens.size(); ++i)
        REQUIRE(threaded.spectra[i].lambdas == ens.spectra[i].lambdas);
}

TEST_CASE("chop input validation") {
    ReturnPanel rp = normal_panel(100, 12, 2);
    ChopConfig cfg;

    ChopConfig bad_t = cfg;
    bad_t.t_window = 1;
    REQUIRE_THROWS_AS(chop_method1(rp, bad_t), std::invalid_argument);
    ChopConfig bad_n = cfg;
    bad_n.n_block = 0;
    REQUIRE_THROWS_AS(chop_method2(rp, bad_n), std::invalid_argument);

    ChopConfig long_w = cfg;
    long_w.t_window = 500;
    REQUIRE_THROWS_WITH(chop_method1(rp, long_w), ContainsSubstring("fewer than one window"));

    ChopConfig wide = cfg;
    wide.t_window = 48;
    wide.n_block = 20;  // > 12 assets
    REQUIRE_THROWS_WITH(chop_method2(rp, wide), ContainsSubstring("fewer assets"));
}

TEST_CASE("constant asset column is rejected only when renormalizing") {
    ReturnPanel rp = normal_panel(60, 10, 4);
    rp.X.col(7).setConstant(0.25);
    ChopConfig cfg;
    cfg.t_window = 30;
    cfg.n_block = 5;
    // column 7 sits at index 2 of block 1
    REQUIRE_THROWS_WITH(chop_method2(rp, cfg),
                        ContainsSubstring("column 2 is constant within window 0, block 1"));
    cfg.renormalize_per_window = false;
    REQUIRE_NOTHROW(chop_method2(rp, cfg));
}

TEST_CASE("aspect-ratio warnings") {
    ChopConfig cfg;
    cfg.t_window = 48;
    cfg.n_block = 20;  // ratio 2.4
    {
        auto w = chop_warnings(cfg);
        REQUIRE(w.size() == 1);
        REQUIRE_THAT(w.front(), ContainsSubstring("far from the well-conditioned regime"));
    }
    cfg.n_block = 5;  // ratio 9.6 — fine
    REQUIRE(chop_warnings(cfg).empty());
    cfg.t_window = 20;
    cfg.n_block = 48;  // wider than the window
    REQUIRE_THAT(chop_warnings(cfg).front(), ContainsSubstring("singular"));
    cfg.t_window = 400;
    cfg.n_block = 10;  // ratio 40
    REQUIRE_THAT(chop_warnings(cfg).front(),
                 ContainsSubstring("far from the well-conditioned regime"));
}

TEST_CASE("permuted choppings and the consistency report") {
    ReturnPanel rp = normal_panel(100, 30, 7);
    ChopConfig cfg;
    cfg.t_window = 20;
    cfg.n_block = 10;

    PermutedChoppings pc = permuted_choppings(rp, cfg, 3, 9);
    REQUIRE(pc.ensembles.size() == 3);
    for (const SpectraEnsemble& e : pc.ensembles) REQUIRE(e.size() == 15);

    // deterministic in the seed
    PermutedChoppings again = permuted_choppings(rp, cfg, 3, 9);
    for (std::size_t e = 0; e < 3; ++e)
        for (std::size_t i = 0; i < 15; ++i)
            REQUIRE(again.ensembles[e].spectra[i].lambdas == pc.ensembles[e].spectra[i].lambdas);

    REQUIRE(pc.report.size() == 4);
    REQUIRE(pc.report[0].stat == "smallest");
    REQUIRE(pc.report[1].stat == "second-smallest");
    REQUIRE(pc.report[2].stat == "largest");
    REQUIRE(pc.report[3].stat == "second-largest");
    for (const StatConsistency& sc : pc.report) {
        REQUIRE(sc.pairwise_ks.size() == 3);
        double max_seen = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            REQUIRE(sc.pairwise_ks[i][i] == 0.0);
            for (std::size_t j = 0; j < 3; ++j) {
                REQUIRE(sc.pairwise_ks[i][j] == sc.pairwise_ks[j][i]);
                REQUIRE(sc.pairwise_ks[i][j] >= 0.0);
                REQUIRE(sc.pairwise_ks[i][j] <= 1.0);
                max_seen = std::max(max_seen, sc.pairwise_ks[i][j]);
            }
        }
        REQUIRE(sc.max_ks == max_seen);
    }

    // identity slot reproduces the unpermuted chopping bit for bit
    PermutedChoppings with_id = permuted_choppings(rp, cfg, 2, 9, true);
    SpectraEnsemble plain = chop_method2(rp, cfg);
    for (std::size_t i = 0; i < plain.size(); ++i)
        REQUIRE(with_id.ensembles[0].spectra[i].lambdas == plain.spectra[i].lambdas);

    REQUIRE_THROWS(permuted_choppings(rp, cfg, 0, 9));
    ChopConfig narrow = cfg;
    narrow.n_block = 1;
    REQUIRE_THROWS_WITH(permuted_choppings(rp, narrow, 2, 9), ContainsSubstring("n_block >= 2"));
}

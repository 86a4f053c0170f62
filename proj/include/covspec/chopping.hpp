#pragma once

// Covariance-ensemble construction from a single return panel by chopping.
//
// Method 1 slices the T rows into floor(T/t) disjoint consecutive windows and
// builds one N x N covariance per window. Method 2 additionally cuts the
// columns into floor(N/n) contiguous blocks, giving floor(T/t)*floor(N/n)
// small n x n covariances — trading resolution in one long sample for an
// ensemble of many short ones. Remainder rows/columns are discarded.
//
// Each sub-panel is renormalized in place by default (per-asset mean 0,
// variance 1 within the window), so every chopped covariance is a bona fide
// correlation matrix: unit diagonal, trace equal to the block width. The
// permutation protocol reshuffles the asset order before block cutting and
// compares extreme-eigenvalue histograms across reshuffles; for exchangeable
// columns the block partition carries no information, so the pairwise KS
// distances stay at sampling-noise level.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covspec/common.hpp"
#include "covspec/ensembles.hpp"
#include "covspec/fitting.hpp"
#include "covspec/panel.hpp"
#include "covspec/rng.hpp"
#include "covspec/spectra.hpp"

namespace covspec {

struct ChopConfig {
    int t_window = 48;
    int n_block = 20;
    std::uint64_t seed = 1;  // default permutation seed for the CLI
    bool renormalize_per_window = true;

    void validate() const {
        require(t_window >= 2, "ChopConfig: t_window must be >= 2");
        require(n_block >= 1, "ChopConfig: n_block must be >= 1");
    }
};

// Advisory only: spectra are cleanest when the window/block aspect ratio t/n
// sits around 10; far outside [3, 30) the bulk is either nearly degenerate
// (c -> 1) or nearly trivial (c -> 0).
inline std::vector<std::string> chop_warnings(const ChopConfig& cfg) {
    std::vector<std::string> w;
    if (cfg.n_block >= cfg.t_window) {
        w.push_back("block width n=" + std::to_string(cfg.n_block) +
                    " is not below window length t=" + std::to_string(cfg.t_window) +
                    "; covariances will be singular or near-singular");
    } else {
        const double ratio = static_cast<double>(cfg.t_window) / cfg.n_block;
        if (ratio < 3.0 || ratio >= 30.0)
            w.push_back("window/block ratio t/n = " + std::to_string(ratio) +
                        " is far from the well-conditioned regime (order 10)");
    }
    return w;
}

namespace detail {

inline void renormalize_window(Eigen::MatrixXd& w, std::size_t window, std::size_t block) {
    const auto rows = static_cast<double>(w.rows());
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        const double mean = w.col(j).mean();
        w.col(j).array() -= mean;
        const double var = w.col(j).squaredNorm() / rows;
        require(var > 0.0, "chop: asset column " + std::to_string(j) + " is constant within window " +
                               std::to_string(window) + ", block " + std::to_string(block) +
                               "; cannot renormalize");
        w.col(j) /= std::sqrt(var);
    }
}

inline SpectraEnsemble chop_grid(const ReturnPanel& rp, const ChopConfig& cfg, int n_cols,
                                 Provenance tag, int threads) {
    cfg.validate();
    const auto t_total = static_cast<int>(rp.X.rows());
    const auto n_total = static_cast<int>(rp.X.cols());
    const int windows = t_total / cfg.t_window;
    const int blocks = n_total / n_cols;
    require(windows >= 1, "chop: panel has " + std::to_string(t_total) +
                              " rows, fewer than one window of t=" + std::to_string(cfg.t_window));
    require(blocks >= 1, "chop: panel has " + std::to_string(n_total) +
                             " assets, fewer than one block of n=" + std::to_string(n_cols));
    SpectraEnsemble ens;
    ens.provenance = tag;
    ens.seed = 0;
    ens.spectra.resize(static_cast<std::size_t>(windows) * static_cast<std::size_t>(blocks));
    parallel_for(ens.spectra.size(), static_cast<unsigned>(threads), [&](std::size_t i) {
        const std::size_t w = i / static_cast<std::size_t>(blocks);  // window-major ordering
        const std::size_t b = i % static_cast<std::size_t>(blocks);
        Eigen::MatrixXd sub = rp.X.block(static_cast<Eigen::Index>(w) * cfg.t_window,
                                         static_cast<Eigen::Index>(b) * n_cols, cfg.t_window, n_cols);
        if (cfg.renormalize_per_window) renormalize_window(sub, w, b);
        ens.spectra[i] = eigenvalues_sym(covariance_of(sub));
    });
    return ens;
}

}  // namespace detail

// floor(T/t) windows over all N assets; spectra of shape (N, t).
inline SpectraEnsemble chop_method1(const ReturnPanel& rp, const ChopConfig& cfg, int threads = 1) {
    return detail::chop_grid(rp, cfg, static_cast<int>(rp.X.cols()), Provenance::ChoppedMethod1,
                             threads);
}

// floor(T/t) windows x floor(N/n) contiguous asset blocks; spectra of shape
// (n, t), ordered window-major then block.
inline SpectraEnsemble chop_method2(const ReturnPanel& rp, const ChopConfig& cfg, int threads = 1) {
    require(static_cast<int>(rp.X.cols()) >= cfg.n_block,
            "chop_method2: panel has fewer assets than one block");
    return detail::chop_grid(rp, cfg, cfg.n_block, Provenance::ChoppedMethod2, threads);
}

struct StatConsistency {
    std::string stat;                             // which extreme eigenvalue
    std::vector<std::vector<double>> pairwise_ks; // symmetric, zero diagonal
    double max_ks = 0.0;
};

struct PermutedChoppings {
    std::vector<SpectraEnsemble> ensembles;
    std::vector<StatConsistency> report;
};

// Repeats Method 2 under uniformly random permutations of the asset order.
// With include_identity, ensemble 0 uses the original order and reproduces
// chop_method2 exactly. The report compares, across ensembles, the samples of
// the smallest, second smallest, largest and second largest eigenvalue.
inline PermutedChoppings permuted_choppings(const ReturnPanel& rp, const ChopConfig& cfg,
                                            std::size_t n_ensembles, std::uint64_t seed,
                                            bool include_identity = false, int threads = 1) {
    cfg.validate();
    require(n_ensembles >= 1, "permuted_choppings: need at least one ensemble");
    require(cfg.n_block >= 2, "permuted_choppings: consistency report needs n_block >= 2");
    const auto n_total = static_cast<Eigen::Index>(rp.X.cols());

    PermutedChoppings out;
    out.ensembles.reserve(n_ensembles);
    for (std::size_t e = 0; e < n_ensembles; ++e) {
        std::vector<std::size_t> perm(static_cast<std::size_t>(n_total));
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        if (!(include_identity && e == 0)) {
            Rng rng = Rng::substream(seed, e);
            rng.shuffle(perm);
        }
        ReturnPanel shuffled;
        shuffled.X.resize(rp.X.rows(), n_total);
        shuffled.asset_ids.reserve(perm.size());
        for (Eigen::Index j = 0; j < n_total; ++j) {
            shuffled.X.col(j) = rp.X.col(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)]));
            shuffled.asset_ids.push_back(
                rp.asset_ids.empty() ? "col" + std::to_string(perm[static_cast<std::size_t>(j)])
                                     : rp.asset_ids[perm[static_cast<std::size_t>(j)]]);
        }
        SpectraEnsemble ens = chop_method2(shuffled, cfg, threads);
        ens.seed = seed;
        out.ensembles.push_back(std::move(ens));
    }

    const struct {
        const char* name;
        double (*pick)(const Spectrum&);
    } stats[] = {
        {"smallest", [](const Spectrum& s) { return s.lambdas.front(); }},
        {"second-smallest", [](const Spectrum& s) { return s.lambdas[1]; }},
        {"largest", [](const Spectrum& s) { return s.lambdas.back(); }},
        {"second-largest", [](const Spectrum& s) { return s.lambdas[s.lambdas.size() - 2]; }},
    };
    for (const auto& st : stats) {
        StatConsistency sc;
        sc.stat = st.name;
        std::vector<std::vector<double>> samples;
        samples.reserve(n_ensembles);
        for (const SpectraEnsemble& ens : out.ensembles) {
            std::vector<double> v;
            v.reserve(ens.size());
            for (const Spectrum& s : ens.spectra) v.push_back(st.pick(s));
            samples.push_back(std::move(v));
        }
        sc.pairwise_ks.assign(n_ensembles, std::vector<double>(n_ensembles, 0.0));
        for (std::size_t i = 0; i < n_ensembles; ++i)
            for (std::size_t j = i + 1; j < n_ensembles; ++j) {
                const double d = ks_two_sample(samples[i], samples[j]);
                sc.pairwise_ks[i][j] = sc.pairwise_ks[j][i] = d;
                sc.max_ks = std::max(sc.max_ks, d);
            }
        out.report.push_back(std::move(sc));
    }
    return out;
}

}  // namespace covspec

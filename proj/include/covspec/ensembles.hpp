#pragma once

// Monte Carlo ensembles of covariance spectra.
//
// Two samplers: the Gaussian case with density exp[-sigma^2 Tr X^T X], and a
// rotation-invariant power-law generalization with density
// (1 + Tr(X^T X)/nu)^{-nu}, nu = alpha + NT/2 + 1. The latter is drawn by a
// scale mixture: g ~ Gamma(alpha+1, 1), xi = g/nu, entries Gaussian with
// variance 1/(2 xi). Integrating out g gives
//   integral dg g^alpha e^-g (g/nu)^{NT/2} exp(-(g/nu) u) / Gamma(alpha+1)
//   ~ (1 + u/nu)^-(alpha + NT/2 + 1),
// i.e. the Gaussian normalization contributes NT/2 to the exponent, which is
// why the mixing shape is alpha+1 and not nu. The mixture is exact, not MCMC.
//
// Every ensemble member draws from its own deterministic substream of the
// master seed, so results are reproducible and independent of thread count.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covspec/common.hpp"
#include "covspec/rng.hpp"
#include "covspec/spectra.hpp"

namespace covspec {

struct WLParams {
    int n = 0;
    int t = 0;
    // Weight exp[-sigma^2 Tr X^T X]: entry variance is 1/(2 sigma^2). The
    // default 1/sqrt(2) makes entries standard normal.
    double sigma = 0.70710678118654752440;

    double entry_sd() const { return 1.0 / (sigma * std::sqrt(2.0)); }
    void validate() const {
        require(n >= 1 && t > n, "WLParams: need T > N >= 1");
        require(sigma > 0.0, "WLParams: sigma must be positive");
    }
};

struct GenParams {
    int n = 0;
    int t = 0;
    double alpha = 1.0;  // tail parameter; spectral density decays like x^-(alpha+2)

    double nu() const { return alpha + 0.5 * static_cast<double>(n) * static_cast<double>(t) + 1.0; }
    void validate() const {
        require(n >= 1 && t > n, "GenParams: need T > N >= 1");
        require(alpha > 0.0, "GenParams: alpha must be positive");
    }
};

enum class Provenance { SampledWL, SampledGeneralized, ChoppedMethod1, ChoppedMethod2 };

inline std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::SampledWL: return "sampled-WL";
        case Provenance::SampledGeneralized: return "sampled-generalised";
        case Provenance::ChoppedMethod1: return "chopped-method1";
        case Provenance::ChoppedMethod2: return "chopped-method2";
    }
    return "unknown";
}

struct SpectraEnsemble {
    std::vector<Spectrum> spectra;  // homogeneous (n, t)
    Provenance provenance = Provenance::SampledWL;
    std::uint64_t seed = 0;

    std::size_t size() const { return spectra.size(); }
    int n() const { return spectra.empty() ? 0 : spectra.front().n_assets; }
    int t() const { return spectra.empty() ? 0 : spectra.front().t_window; }
};

namespace detail {

template <typename FillMatrix>
SpectraEnsemble sample_ensemble(int n, int t, std::size_t count, std::uint64_t seed,
                                Provenance prov, int threads, FillMatrix&& fill) {
    require(count >= 1, "sample ensemble: count must be >= 1");
    SpectraEnsemble ens;
    ens.provenance = prov;
    ens.seed = seed;
    ens.spectra.resize(count);
    parallel_for(count, threads, [&](std::size_t i) {
        Rng rng = Rng::substream(seed, i);
        Eigen::MatrixXd x(t, n);
        fill(x, rng);
        ens.spectra[i] = eigenvalues_sym(covariance_of(x));
    });
    return ens;
}

}  // namespace detail

inline SpectraEnsemble sample_wishart(const WLParams& p, std::size_t count, std::uint64_t seed,
                                      int threads = 1) {
    p.validate();
    const double sd = p.entry_sd();
    return detail::sample_ensemble(p.n, p.t, count, seed, Provenance::SampledWL, threads,
                                   [sd](Eigen::MatrixXd& x, Rng& rng) {
                                       for (Eigen::Index j = 0; j < x.cols(); ++j)
                                           for (Eigen::Index i = 0; i < x.rows(); ++i)
                                               x(i, j) = sd * rng.normal();
                                   });
}

inline SpectraEnsemble sample_generalized(const GenParams& p, std::size_t count, std::uint64_t seed,
                                          int threads = 1) {
    p.validate();
    const double nu = p.nu();
    const double shape = p.alpha + 1.0;
    return detail::sample_ensemble(p.n, p.t, count, seed, Provenance::SampledGeneralized, threads,
                                   [nu, shape](Eigen::MatrixXd& x, Rng& rng) {
                                       const double xi = rng.gamma(shape) / nu;
                                       const double sd = 1.0 / std::sqrt(2.0 * xi);
                                       for (Eigen::Index j = 0; j < x.cols(); ++j)
                                           for (Eigen::Index i = 0; i < x.rows(); ++i)
                                               x(i, j) = sd * rng.normal();
                                   });
}

// Pooling helpers shared by fits, histograms, and the CLI.
inline std::vector<double> pooled_eigenvalues(const SpectraEnsemble& ens, bool rescale_each = false) {
    std::vector<double> out;
    out.reserve(ens.size() * static_cast<std::size_t>(ens.n()));
    for (const Spectrum& s : ens.spectra) {
        if (rescale_each) {
            const double m = s.mean();
            require(m > 0.0, "pooled_eigenvalues: spectrum with nonpositive mean");
            for (double v : s.lambdas) out.push_back(v / m);
        } else {
            out.insert(out.end(), s.lambdas.begin(), s.lambdas.end());
        }
    }
    return out;
}

inline std::vector<double> largest_eigenvalues(const SpectraEnsemble& ens) {
    std::vector<double> out;
    out.reserve(ens.size());
    for (const Spectrum& s : ens.spectra) out.push_back(s.max());
    return out;
}

inline std::vector<double> smallest_eigenvalues(const SpectraEnsemble& ens) {
    std::vector<double> out;
    out.reserve(ens.size());
    for (const Spectrum& s : ens.spectra) out.push_back(s.min());
    return out;
}

}  // namespace covspec

#pragma once

// Covariance construction, dense symmetric eigendecomposition, unit-mean
// rescaling, and density histograms. The eigensolver is the one deliberately
// thin wrapper over Eigen in this library; everything downstream consumes the
// Spectrum type, not Eigen objects.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "covspec/common.hpp"
#include "covspec/panel.hpp"

namespace covspec {

struct CovarianceMatrix {
    Eigen::MatrixXd C;      // N x N symmetric
    int t_used = 0;         // window length in the (1/T) X^T X divisor
};

struct Spectrum {
    std::vector<double> lambdas;   // ascending, tiny negatives clamped to 0
    int n_assets = 0;
    int t_window = 0;
    double c_ratio = 0.0;          // N/T
    double min_raw_lambda = 0.0;   // most negative eigenvalue before clamping

    double min() const { return lambdas.front(); }
    double max() const { return lambdas.back(); }
    double mean() const {
        double s = 0.0;
        for (double v : lambdas) s += v;
        return s / static_cast<double>(lambdas.size());
    }
};

struct DensityHistogram {
    std::vector<double> bin_edges;  // K+1 ascending
    std::vector<double> heights;    // K, count/(total*width)
    std::size_t total_count = 0;

    std::size_t bins() const { return heights.size(); }
    double width() const { return bin_edges[1] - bin_edges[0]; }
};

inline CovarianceMatrix covariance_from_panel(const ReturnPanel& rp) {
    require(rp.X.rows() >= 2, "covariance_from_panel: need T >= 2 rows");
    CovarianceMatrix cov;
    cov.t_used = static_cast<int>(rp.X.rows());
    cov.C = (rp.X.transpose() * rp.X) / static_cast<double>(cov.t_used);
    cov.C = ((cov.C + cov.C.transpose()) * 0.5).eval();  // kill round-off asymmetry
    return cov;
}

// Same product for raw data windows (chopped sub-panels, sampled matrices).
inline CovarianceMatrix covariance_of(const Eigen::MatrixXd& x) {
    require(x.rows() >= 1 && x.cols() >= 1, "covariance_of: empty matrix");
    CovarianceMatrix cov;
    cov.t_used = static_cast<int>(x.rows());
    cov.C = (x.transpose() * x) / static_cast<double>(cov.t_used);
    cov.C = ((cov.C + cov.C.transpose()) * 0.5).eval();
    return cov;
}

inline Spectrum eigenvalues_sym(const CovarianceMatrix& cov) {
    const Eigen::Index n = cov.C.rows();
    require(n >= 1 && cov.C.cols() == n, "eigenvalues_sym: matrix must be square");
    const double scale = std::max(1.0, cov.C.cwiseAbs().maxCoeff());
    const double asym = (cov.C - cov.C.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9 * scale)
        throw std::runtime_error("eigenvalues_sym: input not symmetric (max deviation " +
                                 std::to_string(asym) + ")");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov.C, Eigen::EigenvaluesOnly);
    require(solver.info() == Eigen::Success, "eigenvalues_sym: eigensolver failed to converge");

    Spectrum s;
    s.n_assets = static_cast<int>(n);
    s.t_window = cov.t_used;
    s.c_ratio = cov.t_used > 0 ? static_cast<double>(n) / cov.t_used : 0.0;
    s.lambdas.resize(static_cast<std::size_t>(n));
    s.min_raw_lambda = solver.eigenvalues().minCoeff();
    const double clamp_tol = 1e-10 * static_cast<double>(n) * scale;
    for (Eigen::Index i = 0; i < n; ++i) {
        double v = solver.eigenvalues()(i);
        if (v < 0.0 && v > -clamp_tol) v = 0.0;
        s.lambdas[static_cast<std::size_t>(i)] = v;
    }
    std::sort(s.lambdas.begin(), s.lambdas.end());
    return s;
}

// Eigenvector-carrying variant used to validate reconstruction residuals.
inline std::pair<Spectrum, Eigen::MatrixXd> eigensystem_sym(const CovarianceMatrix& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov.C);
    require(solver.info() == Eigen::Success, "eigensystem_sym: eigensolver failed to converge");
    Spectrum s = eigenvalues_sym(cov);
    return {std::move(s), solver.eigenvectors()};
}

inline Spectrum rescale_unit_mean(const Spectrum& in) {
    const double mean = in.mean();
    if (!(mean > 0.0)) throw std::runtime_error("rescale_unit_mean: spectrum mean must be positive");
    Spectrum out = in;
    for (double& v : out.lambdas) v /= mean;
    out.min_raw_lambda /= mean;
    return out;
}

inline DensityHistogram histogram_density(const std::vector<double>& values, std::size_t bins,
                                          std::optional<std::pair<double, double>> range = {}) {
    require(!values.empty(), "histogram_density: empty input");
    require(bins >= 1, "histogram_density: need at least one bin");
    double lo, hi;
    if (range) {
        lo = range->first;
        hi = range->second;
    } else {
        auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        lo = *mn;
        hi = *mx;
    }
    if (!(hi > lo)) throw std::runtime_error("histogram_density: zero-width range");

    DensityHistogram h;
    const double width = (hi - lo) / static_cast<double>(bins);
    h.bin_edges.resize(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k)
        h.bin_edges[k] = lo + width * static_cast<double>(k);
    h.bin_edges.back() = hi;

    std::vector<std::size_t> counts(bins, 0);
    for (double v : values) {
        if (v < lo || v > hi) continue;  // out-of-range values are excluded entirely
        auto k = static_cast<std::size_t>((v - lo) / width);
        if (k >= bins) k = bins - 1;     // hi itself lands in the last (closed) bin
        ++counts[k];
        ++h.total_count;
    }
    require(h.total_count > 0, "histogram_density: no values inside range");
    h.heights.resize(bins);
    for (std::size_t k = 0; k < bins; ++k)
        h.heights[k] = static_cast<double>(counts[k]) / (static_cast<double>(h.total_count) * width);
    return h;
}

}  // namespace covspec

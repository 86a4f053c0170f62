#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "covspec/common.hpp"

namespace covspec {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// Gauss-Legendre on [-1,1]: Newton iteration on P_n with the usual
// cos-based initial guesses; exploits root symmetry about 0.
inline QuadratureRule build_gauss_legendre(int n) {
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.nodes[i] = -x;
        r.weights[i] = w;
        r.nodes[n - 1 - i] = x;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

}  // namespace detail

// Shared cache: rules are pure functions of the order.
inline const QuadratureRule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, detail::build_gauss_legendre(n)).first;
    return it->second;
}

// Generalized Gauss-Laguerre for weight t^a e^{-t} on [0, inf), via the
// Golub-Welsch eigenproblem of the Jacobi matrix (diag 2k+a+1, offdiag sqrt(k(k+a))).
// Weights carry the full weight function and sum to Gamma(a+1... +?); here mu0 = Gamma(a+1).
inline QuadratureRule gauss_laguerre(double a, int n) {
    if (!(a > -1.0)) throw std::invalid_argument("gauss_laguerre: need a > -1");
    if (n < 1) throw std::invalid_argument("gauss_laguerre: order must be >= 1");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        J(k, k) = 2.0 * k + a + 1.0;
        if (k + 1 < n) {
            double b = std::sqrt((k + 1.0) * (k + 1.0 + a));
            J(k, k + 1) = b;
            J(k + 1, k) = b;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("gauss_laguerre: Jacobi eigensolve failed");
    const double mu0 = std::exp(std::lgamma(a + 1.0));
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        r.weights[i] = mu0 * v0 * v0;
    }
    return r;
}

// integral of f over [lo, hi] with a fixed-order Gauss-Legendre rule.
template <typename F>
double integrate_gl(F&& f, double lo, double hi, int order) {
    const QuadratureRule& r = gauss_legendre(order);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
        acc += r.weights[i] * f(mid + half * r.nodes[i]);
    return acc * half;
}

// Order-doubling Gauss-Legendre until successive estimates agree to rel_tol.
template <typename F>
double integrate_gl_doubling(F&& f, double lo, double hi, double rel_tol,
                             int start_order = 32, int max_order = 16384) {
    double prev = integrate_gl(f, lo, hi, start_order);
    for (int n = 2 * start_order; n <= max_order; n *= 2) {
        double cur = integrate_gl(f, lo, hi, n);
        double scale = std::max(std::abs(cur), std::abs(prev));
        if (std::abs(cur - prev) <= rel_tol * std::max(scale, 1e-300)) return cur;
        prev = cur;
    }
    throw std::runtime_error("integrate_gl_doubling: no convergence at max order");
}

// Semi-infinite tail integral sum_k of f over geometrically growing log-spaced
// panels starting at `lo`, stopping when a panel contributes < rel_cut of the
// accumulated total (and at least min_panels have been taken).
template <typename F>
double integrate_log_tail(F&& f, double lo, double rel_cut = 1e-12, int order = 16,
                          double growth = 2.0, int max_panels = 200) {
    if (!(lo > 0.0)) throw std::invalid_argument("integrate_log_tail: lo must be > 0");
    double acc = 0.0;
    double a = lo;
    for (int p = 0; p < max_panels; ++p) {
        double b = a * growth;
        double piece = integrate_gl(f, a, b, order);
        acc += piece;
        if (p > 2 && std::abs(piece) < rel_cut * std::max(std::abs(acc), 1e-300)) return acc;
        a = b;
    }
    throw std::runtime_error("integrate_log_tail: tail did not decay");
}

}  // namespace covspec

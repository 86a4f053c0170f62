#pragma once

// Tracy-Widom F1 via the Hastings-McLeod solution of Painleve II, plus the
// square-root edge constants that map extreme covariance eigenvalues onto it.
//
//   q'' = s q + 2 q^3,   q(s) ~ Ai(s)  as s -> +inf
//   F1(x) = exp[ -1/2 ( int_x^inf q(s) ds + int_x^inf (s-x) q(s)^2 ds ) ]
//
// The solver integrates backward from Airy initial data at s_start with a
// fixed-step RK4 on the augmented state (q, q', int q, int q^2, int s q^2),
// halving the step until the self-consistency estimate meets tol. Backward is
// the stable direction for Hastings-McLeod; forward integration departs from
// the separatrix exponentially fast, which is exactly the blow-up this solver
// watches for. The Airy tail beyond s_start enters through three constant
// integrals, so cdf() is a pure table lookup with cubic Hermite interpolation.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "covspec/airy.hpp"
#include "covspec/common.hpp"
#include "covspec/ensembles.hpp"
#include "covspec/quadrature.hpp"
#include "covspec/theory_density.hpp"

namespace covspec {

struct PainleveSolution {
    std::vector<double> grid;     // descending, uniform step, grid[0] = s_start
    std::vector<double> q;
    std::vector<double> q_prime;
    std::vector<double> int_q;    // J1(s) = int_s^{s_start} q(u) du
    std::vector<double> int_q2;   // J2(s) = int_s^{s_start} q(u)^2 du
    std::vector<double> int_sq2;  // J3(s) = int_s^{s_start} u q(u)^2 du
    double s_start = 0.0;
    double s_end = 0.0;
    double step = 0.0;
    double tol = 0.0;
    double est_error = 0.0;       // |q_h(0) - q_{h/2}(0)| from step halving
    double est_error_max = 0.0;   // worst whole-grid |q_h - q_{h/2}|
};

namespace detail {

struct PiiState {
    double q, qp, j1, j2, j3;
};

inline PiiState pii_rhs(double s, const PiiState& y) {
    return {y.qp, s * y.q + 2.0 * y.q * y.q * y.q, -y.q, -y.q * y.q, -s * y.q * y.q};
}

inline PiiState pii_axpy(const PiiState& y, double a, const PiiState& d) {
    return {y.q + a * d.q, y.qp + a * d.qp, y.j1 + a * d.j1, y.j2 + a * d.j2, y.j3 + a * d.j3};
}

inline void pii_integrate(double s_start, double s_end, double h, PainleveSolution& out) {
    const auto steps = static_cast<std::size_t>(std::llround((s_start - s_end) / h));
    out.grid.assign(steps + 1, 0.0);
    out.q.assign(steps + 1, 0.0);
    out.q_prime.assign(steps + 1, 0.0);
    out.int_q.assign(steps + 1, 0.0);
    out.int_q2.assign(steps + 1, 0.0);
    out.int_sq2.assign(steps + 1, 0.0);

    auto [ai, aip] = airy_ai_aip(s_start);
    PiiState y{ai, aip, 0.0, 0.0, 0.0};
    const double hs = -h;  // backward
    for (std::size_t i = 0; i <= steps; ++i) {
        const double s = s_start - h * static_cast<double>(i);
        out.grid[i] = s;
        out.q[i] = y.q;
        out.q_prime[i] = y.qp;
        out.int_q[i] = y.j1;
        out.int_q2[i] = y.j2;
        out.int_sq2[i] = y.j3;
        if (!(std::abs(y.q) < 1e6) || !std::isfinite(y.q))
            throw std::runtime_error("solve_pii: solution diverged near s = " + std::to_string(s) +
                                     " (backward integration left the bounded branch)");
        if (i == steps) break;
        const PiiState k1 = pii_rhs(s, y);
        const PiiState k2 = pii_rhs(s + 0.5 * hs, pii_axpy(y, 0.5 * hs, k1));
        const PiiState k3 = pii_rhs(s + 0.5 * hs, pii_axpy(y, 0.5 * hs, k2));
        const PiiState k4 = pii_rhs(s + hs, pii_axpy(y, hs, k3));
        y.q += hs / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
        y.qp += hs / 6.0 * (k1.qp + 2.0 * k2.qp + 2.0 * k3.qp + k4.qp);
        y.j1 += hs / 6.0 * (k1.j1 + 2.0 * k2.j1 + 2.0 * k3.j1 + k4.j1);
        y.j2 += hs / 6.0 * (k1.j2 + 2.0 * k2.j2 + 2.0 * k3.j2 + k4.j2);
        y.j3 += hs / 6.0 * (k1.j3 + 2.0 * k2.j3 + 2.0 * k3.j3 + k4.j3);
    }
}

// The Hastings-McLeod branch is a separatrix: perturbations grow like
// exp((2 sqrt2 / 3)|s|^{3/2}) once q rides the sqrt(-s/2) plateau, so
// round-off amplification caps how far a double-precision backward sweep can
// go (around s = -12) and can flip the tail end negative even before that. A
// sweep is structurally sound when q stays positive and lands on the plateau
// at s_end; sign flips show up here rather than as |q| blow-up.
inline bool pii_sweep_sound(const PainleveSolution& sol) {
    for (double v : sol.q)
        if (!(v > 0.0)) return false;
    const double plateau = std::sqrt(-0.5 * sol.s_end);
    return std::abs(sol.q.back() / plateau - 1.0) < 0.02;
}

}  // namespace detail

// F1(-10) = 8e-19, hence -10 is the stock endpoint. The tol gate compares
// successive sweeps at s = 0, where the growing mode has died off; the worst
// whole-grid deviation (dominated by the amplified noise near s_end) is kept
// as separate metadata. Structurally unsound sweeps trigger refinement too,
// since a finer step injects less noise into the growing mode.
inline PainleveSolution solve_pii(double s_start = 8.0, double s_end = -10.0, double tol = 1e-10) {
    require(s_start >= 6.0, "solve_pii: s_start must be >= 6 (Airy initial data regime)");
    require(s_end <= -10.0, "solve_pii: s_end must be <= -10");
    require(tol >= 1e-12, "solve_pii: tol must be >= 1e-12");

    double h = 1e-3;
    PainleveSolution coarse, fine;
    coarse.s_start = fine.s_start = s_start;
    coarse.s_end = fine.s_end = s_end;
    detail::pii_integrate(s_start, s_end, h, coarse);
    bool coarse_sound = detail::pii_sweep_sound(coarse);
    for (int round = 0; round < 8; ++round) {
        detail::pii_integrate(s_start, s_end, h / 2.0, fine);
        const bool fine_sound = detail::pii_sweep_sound(fine);
        const std::size_t mid_c = static_cast<std::size_t>(std::llround(s_start / h));
        const double err = std::abs(coarse.q[std::min(mid_c, coarse.q.size() - 1)] -
                                    fine.q[std::min(2 * mid_c, fine.q.size() - 1)]);
        if (coarse_sound && fine_sound && err <= tol) {
            fine.step = h / 2.0;
            fine.tol = tol;
            fine.est_error = err;
            double worst = 0.0;
            for (std::size_t i = 0; i < coarse.q.size(); ++i)
                worst = std::max(worst, std::abs(coarse.q[i] - fine.q[2 * i]));
            fine.est_error_max = worst;
            return fine;
        }
        coarse = std::move(fine);
        coarse_sound = fine_sound;
        fine = PainleveSolution{};
        fine.s_start = s_start;
        fine.s_end = s_end;
        h /= 2.0;
    }
    throw std::runtime_error("solve_pii: no step met both tol and the plateau soundness check");
}

class TracyWidomF1 {
  public:
    explicit TracyWidomF1(PainleveSolution sol) : sol_(std::move(sol)) {
        // Airy tail constants: int_{s_start}^inf of Ai, Ai^2, and u Ai(u)^2.
        const double a = sol_.s_start;
        tail_q_ = integrate_gl_doubling([](double u) { return airy_ai(u); }, a, a + 24.0, 1e-12);
        tail_q2_ = integrate_gl_doubling([](double u) { const double v = airy_ai(u); return v * v; },
                                         a, a + 24.0, 1e-12);
        tail_sq2_ = integrate_gl_doubling(
            [](double u) { const double v = airy_ai(u); return u * v * v; }, a, a + 24.0, 1e-12);
        compute_moments();
    }

    double s_min() const { return sol_.s_end; }
    double s_max() const { return sol_.s_start; }
    const PainleveSolution& solution() const { return sol_; }

    double cdf(double x) const {
        if (x < sol_.s_end || x > sol_.s_start)
            throw std::runtime_error("tw_cdf: x = " + std::to_string(x) + " outside solved range [" +
                                     std::to_string(sol_.s_end) + ", " + std::to_string(sol_.s_start) + "]");
        const double j1 = interp(sol_.int_q, IntQ, x);
        const double j2 = interp(sol_.int_q2, IntQ2, x);
        const double j3 = interp(sol_.int_sq2, IntSq2, x);
        const double arg = (j1 + tail_q_) + (j3 + tail_sq2_) - x * (j2 + tail_q2_);
        return std::exp(-0.5 * arg);
    }

    // Centered finite difference of the cdf; the stencil is pulled inside the
    // solved range at the boundaries.
    double pdf(double x) const {
        const double h = 1e-4;
        double lo = std::max(x - h, sol_.s_end);
        double hi = std::min(x + h, sol_.s_start);
        if (!(hi > lo)) throw std::runtime_error("tw_pdf: x outside solved range");
        return (cdf(hi) - cdf(lo)) / (hi - lo);
    }

    double q_at(double x) const { return interp(sol_.q, Q, x); }
    double mean() const { return mean_; }
    double variance() const { return var_; }
    double skewness() const { return skew_; }

  private:
    enum Field { Q, IntQ, IntQ2, IntSq2 };

    // cubic Hermite on the uniform descending grid; every stored field has an
    // exact derivative available from the ODE right-hand side
    double interp(const std::vector<double>& f, Field field, double x) const {
        const double h = sol_.step;
        auto i = static_cast<std::size_t>(std::floor((sol_.s_start - x) / h));
        if (i >= f.size() - 1) i = f.size() - 2;
        const double s_i = sol_.grid[i];
        const double u = (s_i - x) / h;  // 0 at node i, 1 at node i+1
        const double f0 = f[i], f1 = f[i + 1];
        const double g0 = -h * deriv(field, i), g1 = -h * deriv(field, i + 1);
        const double u2 = u * u, u3 = u2 * u;
        return (2.0 * u3 - 3.0 * u2 + 1.0) * f0 + (u3 - 2.0 * u2 + u) * g0 +
               (-2.0 * u3 + 3.0 * u2) * f1 + (u3 - u2) * g1;
    }

    double deriv(Field field, std::size_t i) const {
        switch (field) {
            case Q: return sol_.q_prime[i];
            case IntQ: return -sol_.q[i];
            case IntQ2: return -sol_.q[i] * sol_.q[i];
            case IntSq2: return -sol_.grid[i] * sol_.q[i] * sol_.q[i];
        }
        return 0.0;
    }

    void compute_moments() {
        const double lo = sol_.s_end, hi = sol_.s_start;
        auto f = [&](double x) { return pdf(x); };
        const double norm = integrate_gl_doubling(f, lo, hi, 1e-10, 256, 8192);
        mean_ = integrate_gl_doubling([&](double x) { return x * pdf(x); }, lo, hi, 1e-10, 256, 8192) / norm;
        var_ = integrate_gl_doubling([&](double x) { const double d = x - mean_; return d * d * pdf(x); },
                                     lo, hi, 1e-10, 256, 8192) / norm;
        skew_ = integrate_gl_doubling([&](double x) { const double d = x - mean_; return d * d * d * pdf(x); },
                                      lo, hi, 1e-10, 256, 8192) / (norm * std::pow(var_, 1.5));
    }

    PainleveSolution sol_;
    double tail_q_ = 0.0, tail_q2_ = 0.0, tail_sq2_ = 0.0;
    double mean_ = 0.0, var_ = 0.0, skew_ = 0.0;
};

// Square-root edge constants in the W = (1/T) X^T X normalization. The
// largest-edge pair is the classical one; the smallest edge uses half-integer
// shifts, which converge noticeably faster at the soft lower edge (the
// unshifted variant visibly misses the Monte Carlo χ_min distribution at
// N = 80, T = 320).
struct TWScalings {
    double a_small = 0.0, b_small = 0.0;
    double a_large = 0.0, b_large = 0.0;
};

inline TWScalings wl_scaling_constants(int n, int t) {
    require(t > n && n >= 1, "wl_scaling_constants: need T > N >= 1");
    const double td = t, nd = n;
    TWScalings w;
    {
        const double mu = std::sqrt(td - 1.0) + std::sqrt(nd);
        w.a_large = mu * mu / td;
        w.b_large = mu * std::cbrt(1.0 / std::sqrt(td - 1.0) + 1.0 / std::sqrt(nd)) / td;
    }
    {
        const double mu = std::sqrt(td - 0.5) - std::sqrt(nd - 0.5);
        w.a_small = mu * mu / td;
        w.b_small = mu * std::cbrt(1.0 / std::sqrt(nd - 0.5) - 1.0 / std::sqrt(td - 0.5)) / td;
    }
    require(w.b_small > 0.0 && w.b_large > 0.0, "wl_scaling_constants: nonpositive scale");
    return w;
}

enum class Extreme { Smallest, Largest };

struct RescaledExtremes {
    std::vector<double> chi;
    double a = 0.0, b = 0.0;
    bool moment_matched = false;
    Extreme which = Extreme::Largest;
};

// chi_max = (lambda_max - a_L)/b_L, chi_min = (a_S - lambda_min)/b_S. The
// smallest edge flips orientation so its heavier lower tail lands on the upper
// TW tail. Without explicit scalings (empirical ensembles), (a, b) are fitted
// by matching the sample mean and variance to the reference distribution.
inline RescaledExtremes rescale_extremes(const SpectraEnsemble& ens, Extreme which,
                                         std::optional<TWScalings> scalings = {},
                                         const TracyWidomF1* tw = nullptr) {
    require(!ens.spectra.empty(), "rescale_extremes: empty ensemble");
    std::vector<double> lam = which == Extreme::Largest ? largest_eigenvalues(ens)
                                                        : smallest_eigenvalues(ens);
    RescaledExtremes out;
    out.which = which;
    if (scalings) {
        out.a = which == Extreme::Largest ? scalings->a_large : scalings->a_small;
        out.b = which == Extreme::Largest ? scalings->b_large : scalings->b_small;
    } else {
        require(tw != nullptr, "rescale_extremes: moment matching needs the reference distribution");
        require(lam.size() >= 2, "rescale_extremes: moment matching needs >= 2 members");
        double m = 0.0;
        for (double v : lam) m += v;
        m /= static_cast<double>(lam.size());
        double s2 = 0.0;
        for (double v : lam) s2 += (v - m) * (v - m);
        s2 /= static_cast<double>(lam.size() - 1);
        require(s2 > 0.0, "rescale_extremes: degenerate sample, zero variance");
        out.b = std::sqrt(s2 / tw->variance());
        out.a = which == Extreme::Largest ? m - out.b * tw->mean() : m + out.b * tw->mean();
        out.moment_matched = true;
    }
    out.chi.reserve(lam.size());
    for (double v : lam)
        out.chi.push_back(which == Extreme::Largest ? (v - out.a) / out.b : (out.a - v) / out.b);
    return out;
}

inline TheoryCurve tabulate_tw(const TracyWidomF1& tw, CurveKind kind, double from, double to,
                               double step) {
    require(kind == CurveKind::TwCdf || kind == CurveKind::TwPdf, "tabulate_tw: kind must be tw-cdf or tw-pdf");
    require(step > 0.0 && to > from, "tabulate_tw: bad grid");
    TheoryCurve curve;
    curve.kind = kind;
    for (double x = from; x <= to + 0.5 * step; x += step) {
        const double xi = std::min(x, to);
        curve.xs.push_back(xi);
        curve.ys.push_back(kind == CurveKind::TwCdf ? tw.cdf(xi) : tw.pdf(xi));
    }
    return curve;
}

}  // namespace covspec

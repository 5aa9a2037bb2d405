#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <cstdio>
#include <vector>

#include "levyou/common.hpp"

namespace levyou {

// Default quadrature tolerances used throughout: symbols feed the Fourier
// oracle, so the jump integrals are held to abs 1e-10 / rel 1e-8.
struct QuadTol {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
};

namespace detail {

template <class F>
double gk_adaptive(const F& f, double a, double b, const QuadTol& tol, double* err_out) {
    double err = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 14, tol.rel_tol * 0.1, &err);
    if (err_out) *err_out = err;
    return v;
}

}  // namespace detail

// Adaptive Gauss-Kronrod on a finite interval; throws a numeric error carrying
// the residual estimate when the requested tolerance is not met.
template <class F>
inline ValueWithError integrate(const F& f, double a, double b, QuadTol tol = {}) {
    double err = 0.0;
    double v = detail::gk_adaptive(f, a, b, tol, &err);
    if (!(std::isfinite(v)))
        fail(ErrorKind::numeric, "quadrature returned non-finite value");
    if (err > tol.abs_tol && err > tol.rel_tol * std::abs(v))
        fail(ErrorKind::numeric,
             "quadrature residual " + std::to_string(err) + " exceeds tolerance");
    return {v, err};
}

// tanh-sinh for integrands with an endpoint singularity (e.g. |z|^{1-alpha}).
template <class F>
inline ValueWithError integrate_singular(const F& f, double a, double b, QuadTol tol = {}) {
    boost::math::quadrature::tanh_sinh<double> ts;
    double err = 0.0, l1 = 0.0;
    double v = ts.integrate(f, a, b, tol.rel_tol * 0.1, &err, &l1);
    if (!std::isfinite(v))
        fail(ErrorKind::numeric, "singular quadrature returned non-finite value");
    // err is the absolute difference of the last two level estimates, a
    // conservative bound on the true error; accept with a decade of slack
    if (err > 10.0 * tol.abs_tol && err > 10.0 * tol.rel_tol * std::max(std::abs(v), l1)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "singular quadrature residual %.3e exceeds tolerance (value %.6e, L1 %.3e)",
                      err, v, l1);
        fail(ErrorKind::numeric, buf);
    }
    return {v, err};
}

// Adaptive quadrature that never throws: returns the achieved error. Meant
// for integrands with interior kinks (absolute differences) where certified
// tolerances are unattainable but the error estimate is still honest.
template <class F>
inline ValueWithError integrate_lenient(const F& f, double a, double b, QuadTol tol = {}) {
    double err = 0.0;
    double v = detail::gk_adaptive(f, a, b, tol, &err);
    if (!std::isfinite(v)) fail(ErrorKind::numeric, "quadrature returned non-finite value");
    return {v, err};
}

// Integral over (0, b] with an integrable singularity at 0. The domain is
// floored at 1e-30: below that, power-law Levy densities overflow double
// range while their oscillation damping underflows, so the integrand is not
// machine-representable (the neglected mass is far below tolerance for
// singularity orders away from the z^{-3} boundary).
template <class F>
inline ValueWithError integrate_from_zero(const F& f, double b, QuadTol tol = {}) {
    if (b <= 0) return {0.0, 0.0};
    double lo = std::min(1e-30, b * 1e-12);
    auto guarded = [&f](double z) {
        double v = f(z);
        return std::isfinite(v) ? v : 0.0;
    };
    return integrate_singular(guarded, lo, b, tol);
}

// Fixed 15-point Gauss-Legendre, for per-cell integrals where adaptivity is
// wasted (smooth integrand, tiny interval).
template <class F>
inline double gauss15(const F& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 15>::integrate(f, a, b);
}

// Integral over [a, infinity) of a decaying integrand, summed over dyadic
// panels [a 2^k, a 2^{k+1}] until the running total stabilizes. Handles the
// oscillatory envelopes (1 - cos u), sin u with fixed period that defeat a
// single adaptive pass over an infinite range.
template <class F>
inline ValueWithError integrate_dyadic_tail(const F& f, double a, QuadTol tol = {},
                                            int max_panels = 200) {
    if (!(a > 0)) fail(ErrorKind::invalid_input, "dyadic tail needs a > 0");
    KahanSum total;
    double err_sum = 0.0;
    double lo = a;
    int quiet = 0;
    for (int k = 0; k < max_panels; ++k) {
        double hi = lo * 2.0;
        double err = 0.0;
        double piece = detail::gk_adaptive(f, lo, hi, tol, &err);
        total.add(piece);
        err_sum += err;
        double scale = std::max(std::abs(total.value()), tol.abs_tol);
        if (std::abs(piece) < tol.rel_tol * 1e-2 * scale) {
            if (++quiet >= 2) return {total.value(), err_sum + std::abs(piece)};
        } else {
            quiet = 0;
        }
        lo = hi;
    }
    fail(ErrorKind::numeric, "dyadic tail did not converge; residual ~" +
                                 std::to_string(std::abs(total.value())));
}

// Alternating-tail summation for oscillatory integrals with decreasing
// envelope: integrate over half-period chunks of length `chunk` starting at a,
// stop when increments fall below tolerance.
template <class F>
inline ValueWithError integrate_oscillatory_tail(const F& f, double a, double chunk,
                                                 QuadTol tol = {}, long max_chunks = 2000000) {
    KahanSum total;
    double lo = a;
    int quiet = 0;
    for (long k = 0; k < max_chunks; ++k) {
        double hi = lo + chunk;
        double piece = gauss15(f, lo, hi);
        total.add(piece);
        double scale = std::max(std::abs(total.value()), 1.0);
        if (std::abs(piece) < tol.abs_tol + tol.rel_tol * 1e-2 * scale) {
            if (++quiet >= 3) return {total.value(), 2 * std::abs(piece)};
        } else {
            quiet = 0;
        }
        lo = hi;
    }
    fail(ErrorKind::numeric, "oscillatory tail did not settle within chunk budget");
}

// Outcome of a dyadic-shell summation. `finite` is the decision; when finite,
// `value` includes a geometric extrapolation of the untouched tail.
struct ShellSum {
    bool finite = false;
    double value = 0.0;
    double last_ratio = 0.0;
    int shells_used = 0;
};

// Decides convergence of sum_k s_k for shell contributions s_k >= 0 over
// dyadic shells. Divergence rule: contributions fail to decay geometrically
// (ratio >= ratio_threshold) over `consecutive` shells in a row.
template <class ShellFn>
inline ShellSum sum_shells(const ShellFn& shell, int k_max = 64, double ratio_threshold = 0.95,
                           int consecutive = 8, double floor_rel = 1e-13) {
    ShellSum out;
    KahanSum acc;
    double prev = -1.0;
    int bad_run = 0;
    int quiet = 0;
    std::vector<double> ratios;
    for (int k = 0; k < k_max; ++k) {
        double s = shell(k);
        if (!(s >= 0) || !std::isfinite(s)) fail(ErrorKind::numeric, "shell integral invalid");
        acc.add(s);
        out.shells_used = k + 1;
        if (prev > 0 && s > 0) {
            double r = s / prev;
            out.last_ratio = r;
            ratios.push_back(r);
            bad_run = (r >= ratio_threshold) ? bad_run + 1 : 0;
            if (bad_run >= consecutive) {
                out.finite = false;
                out.value = acc.value();
                return out;
            }
        }
        if (s <= floor_rel * std::max(acc.value(), 1e-300)) {
            if (++quiet >= 2) {
                out.finite = true;
                out.value = acc.value();
                return out;
            }
        } else {
            quiet = 0;
        }
        prev = s;
    }
    // Shell budget exhausted: decide by the trailing ratios.
    double worst = 0.0;
    int n_tail = std::min<std::size_t>(8, ratios.size());
    for (std::size_t i = ratios.size() - n_tail; i < ratios.size(); ++i)
        worst = std::max(worst, ratios[i]);
    out.finite = n_tail > 0 && worst < ratio_threshold;
    double tail = 0.0;
    if (out.finite && prev > 0 && worst > 0 && worst < 1.0)
        tail = prev * worst / (1.0 - worst);
    out.value = acc.value() + tail;
    return out;
}

}  // namespace levyou

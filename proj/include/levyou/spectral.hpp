#pragma once

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <vector>

#include "levyou/common.hpp"
#include "levyou/model.hpp"

namespace levyou {

// Deterministic law computations: the accumulated symbol
// psi_t(xi) = int_0^t Phi(exp(s A^T) xi) ds, the phi_t functional with its
// inverse, Fourier density inversion (d <= 2) and total-variation oracles.

// psi_t evaluated by composite Gauss-Legendre in s with the flow matrices
// exp(s_i A^T) prebuilt; symbol lookups go through the cached fast path.
class AccumulatedSymbol {
public:
    AccumulatedSymbol(const OUModel& model, double t, int nodes_per_panel = 16)
        : model_(&model), t_(t) {
        if (t < 0) fail(ErrorKind::invalid_input, "accumulated symbol needs t >= 0");
        if (t == 0) return;
        const auto& xs = boost::math::quadrature::gauss<double, 16>::abscissa();
        const auto& ws = boost::math::quadrature::gauss<double, 16>::weights();
        (void)nodes_per_panel;
        // geometric panels: the integrand decays like the envelope, so panel
        // lengths may double, capped when the flow rotates
        double max_im = 0.0;
        for (int i = 0; i < model.spectral.eigenvalues.size(); ++i)
            max_im = std::max(max_im, std::abs(model.spectral.eigenvalues(i).imag()));
        const double len_cap = std::max(1.0, 8.0 / (1.0 + 4.0 * max_im));
        std::vector<std::pair<double, double>> panels;  // (center, half-length)
        {
            double lo = 0.0, len = std::min(1.0, t);
            while (lo < t) {
                double hi = std::min(t, lo + len);
                panels.push_back({0.5 * (lo + hi), 0.5 * (hi - lo)});
                lo = hi;
                len = std::min(len * 2.0, len_cap);
            }
        }
        for (auto [c, r] : panels) {
            auto add_node = [&](double s, double w) {
                mats_.push_back(matrix_exponential(model.A.transpose(), s));
                wts_.push_back(w * r);
            };
            // boost lists nonnegative abscissae only; even orders have no zero
            if (xs[0] == 0.0) {
                add_node(c, ws[0]);
            } else {
                add_node(c + r * xs[0], ws[0]);
                add_node(c - r * xs[0], ws[0]);
            }
            for (std::size_t k = 1; k < xs.size(); ++k) {
                add_node(c + r * xs[k], ws[k]);
                add_node(c - r * xs[k], ws[k]);
            }
        }
    }

    double t() const { return t_; }
    const OUModel& model() const { return *model_; }

    Cplx eval(const Vec& xi) const {
        Cplx acc = 0.0;
        for (std::size_t i = 0; i < mats_.size(); ++i)
            acc += wts_[i] * symbol_fast(model_->triplet, mats_[i] * xi);
        return acc;
    }

    double re(const Vec& xi) const { return eval(xi).real(); }

    // warms the measure's symbol cache for grid evaluations over |xi| in [lo, hi]
    void warm(double lo, double hi) const {
        double c = std::max(model_->spectral.envelope_c, 1.0);
        detail::warm_symbol_cache(model_->triplet.nu, std::max(1e-8, lo / (2.0 * c)),
                                  hi * 2.0 * c);
    }

private:
    const OUModel* model_;
    double t_;
    std::vector<Mat> mats_;
    std::vector<double> wts_;
};

inline Cplx accumulated_symbol(const OUModel& model, double t, const Vec& xi) {
    return AccumulatedSymbol(model, t).eval(xi);
}

namespace detail {

inline std::vector<Vec> sup_directions(int d) {
    std::vector<Vec> dirs;
    if (d == 1) {
        dirs.push_back(Vec::Constant(1, 1.0));
        dirs.push_back(Vec::Constant(1, -1.0));
    } else if (d == 2) {
        for (int i = 0; i < 32; ++i) {
            double th = 2.0 * std::numbers::pi * i / 32;
            Vec v(2);
            v << std::cos(th), std::sin(th);
            dirs.push_back(v);
        }
    } else {
        for (int i = 0; i < d; ++i) {
            Vec v = Vec::Zero(d);
            v(i) = 1.0;
            dirs.push_back(v);
            dirs.push_back(-v);
        }
        dirs.push_back(Vec::Ones(d).normalized());
    }
    return dirs;
}

}  // namespace detail

// phi_t(rho) = sup_{|xi| <= rho} Re psi_t(xi), maximized over the sphere and a
// coarse interior lattice (the sup can be interior for anisotropic A).
class PhiFunctional {
public:
    PhiFunctional(const OUModel& model, double t)
        : acc_(model, t), dirs_(detail::sup_directions(model.dim())) {
        acc_.warm(1e-6, 1e6);
    }

    double operator()(double rho) const {
        if (!(rho > 0)) fail(ErrorKind::invalid_input, "phi_t needs rho > 0");
        double best = 0.0;
        for (const auto& dir : dirs_)
            for (int k = 8; k >= 1; --k) best = std::max(best, acc_.re((rho * k / 8.0) * dir));
        return best;
    }

    // monotone bisection for phi_t^{-1}(y); domain error when phi_t is bounded
    // above by y (e.g. compound Poisson symbols).
    double inverse(double y) const {
        if (!(y > 0)) fail(ErrorKind::invalid_input, "phi_t inverse needs y > 0");
        double lo = 0.0, hi = 1.0;
        double phi_hi = (*this)(hi);
        int stall = 0;
        while (phi_hi < y) {
            double next = (*this)(2.0 * hi);
            if (next - phi_hi <= 1e-12 * std::max(1.0, next)) {
                if (++stall >= 3)
                    fail(ErrorKind::domain,
                         "phi_t is bounded near " + std::to_string(next) +
                             ", inverse undefined at y = " + std::to_string(y));
            } else {
                stall = 0;
            }
            lo = hi;
            hi *= 2.0;
            phi_hi = next;
            if (hi > 1e60) fail(ErrorKind::domain, "phi_t inverse bracket exceeded range");
        }
        while (hi - lo > 1e-10 * hi) {
            double mid = 0.5 * (lo + hi);
            ((*this)(mid) >= y ? hi : lo) = mid;
        }
        return hi;
    }

    const AccumulatedSymbol& accumulator() const { return acc_; }

private:
    AccumulatedSymbol acc_;
    std::vector<Vec> dirs_;
};

inline double phi_t(const OUModel& model, double t, double rho) {
    return PhiFunctional(model, t)(rho);
}

inline double phi_t_inverse(const OUModel& model, double t, double y) {
    return PhiFunctional(model, t).inverse(y);
}

// ---------------------------------------------------------------------------
// Fourier inversion
// ---------------------------------------------------------------------------

struct FftOptions {
    int min_log2n = 10;
    int max_log2n = 22;      // 1-d cap
    int max_log2n_2d = 9;    // per-axis cap in 2-d
    int oversample = 8;      // spatial refinement beyond the Nyquist of xi_cut
    double cf_cutoff = 1e-10;
    double mass_tol = 1e-4;
    double extent_factor = 8.0;
};

// Density values on a regular grid plus an honest error budget: clipped
// ringing, normalization defect and extrapolated tail mass.
struct GriddedDensity {
    int dim = 1;
    Vec origin;            // first sample position
    Vec h;                 // spacing
    std::array<int, 2> n{0, 1};
    std::vector<double> values;  // density at origin + k*h (point values)
    double total = 0.0;          // integral over the grid
    double clipped = 0.0;        // negative ringing mass removed
    double err_bar = 0.0;

    double value_at(std::size_t i) const { return values[i]; }
    Vec position(std::size_t idx) const {
        Vec p(dim);
        if (dim == 1) {
            p(0) = origin(0) + double(idx) * h(0);
        } else {
            p(0) = origin(0) + double(idx / std::size_t(n[1])) * h(0);
            p(1) = origin(1) + double(idx % std::size_t(n[1])) * h(1);
        }
        return p;
    }
};

namespace detail {

// In-place centered inverse DFT: given cf samples at xi_j = (j - N/2) dxi,
// returns f at u_k = (k - N/2) dx with dx = 2 pi / (N dxi). Requires N a
// power of two and a multiple of 4 so the global phase is +1.
inline std::vector<Cplx> centered_inverse_dft(std::vector<Cplx> cf, double dxi) {
    const std::size_t n = cf.size();
    for (std::size_t j = 0; j < n; ++j)
        if (j & 1) cf[j] = -cf[j];
    Eigen::FFT<double> fft;
    std::vector<Cplx> out;
    fft.fwd(out, cf);
    double scale = dxi / (2.0 * std::numbers::pi);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] *= scale;
        if (k & 1) out[k] = -out[k];
    }
    return out;
}

struct CfScan {
    double xi_cut = 0.0;   // |cf| below cutoff beyond this radius
    double scale = 1.0;    // spatial scale proxy (Re psi crosses 1)
};

// Scans Re psi_t along the sup directions for the cutoff radius where the
// characteristic function drops below `cutoff`, and a scale proxy.
inline CfScan scan_cutoff(const AccumulatedSymbol& acc, double cutoff, double floor_value = 0.0) {
    const double target = -std::log(cutoff);
    auto dirs = sup_directions(acc.model().dim());
    auto min_re = [&](double r) {
        double worst = kInf;
        for (const auto& dir : dirs) worst = std::min(worst, acc.re(r * dir) - floor_value);
        return worst;
    };
    CfScan out;
    double lo = 1e-3, hi = 1e-3;
    double v = min_re(hi);
    int stall = 0;
    while (v < target) {
        double next_hi = hi * 2.0;
        double next = min_re(next_hi);
        if (next - v <= 1e-10 * std::max(1.0, target)) {
            if (++stall >= 4)
                fail(ErrorKind::resolution,
                     "characteristic function not integrable at resolution: Re psi plateaus near " +
                         std::to_string(next + floor_value));
        } else {
            stall = 0;
        }
        lo = hi;
        hi = next_hi;
        v = next;
        if (hi > 1e15)
            fail(ErrorKind::resolution, "characteristic function cutoff beyond resolvable range");
    }
    // bisect to ~2% for the cutoff radius
    while (hi - lo > 0.02 * hi) {
        double mid = 0.5 * (lo + hi);
        (min_re(mid) >= target ? hi : lo) = mid;
    }
    out.xi_cut = hi;

    // spatial scale proxy: radius where Re psi crosses 1 (target > 1 so the
    // bracket is guaranteed)
    double slo = 1e-8, shi = out.xi_cut;
    while (shi - slo > 0.02 * shi) {
        double mid = 0.5 * (slo + shi);
        (min_re(mid) >= 1.0 ? shi : slo) = mid;
    }
    out.scale = 1.0 / shi;
    return out;
}

struct Grid1d {
    int n = 0;
    double dxi = 0.0;
    double dx = 0.0;
    double half_extent = 0.0;
};

inline Grid1d choose_grid_1d(double xi_cut, double want_half_extent, const FftOptions& opt) {
    Grid1d g;
    g.dx = std::numbers::pi / (xi_cut * std::max(1, opt.oversample));
    double n_raw = 2.0 * want_half_extent / g.dx;
    int log2n = opt.min_log2n;
    while ((1 << log2n) < n_raw && log2n < opt.max_log2n) ++log2n;
    g.n = 1 << log2n;
    g.dxi = 2.0 * std::numbers::pi / (g.n * g.dx);
    g.half_extent = 0.5 * g.n * g.dx;
    return g;
}

// tail extrapolation from the boundary values (exact for ~u^{-2} tails,
// conservative for lighter ones)
inline double boundary_tail_estimate(const std::vector<double>& f, double half_extent) {
    if (f.size() < 4) return 0.0;
    double edge = 0.5 * (std::abs(f.front()) + std::abs(f[1])) +
                  0.5 * (std::abs(f.back()) + std::abs(f[f.size() - 2]));
    return edge * half_extent;
}

}  // namespace detail

// Inverts the characteristic function exp(i<xi, e^{tA}x> - psi_t(xi)) of
// X_t^x on an adaptive grid. Pre: the symbol grows (integrable cf) or a
// Gaussian component exists; otherwise a resolution error is thrown.
// The start-x dependence is an exact grid translation by e^{tA}x.
inline GriddedDensity density_by_fft(const OUModel& model, double t, const Vec& x,
                                     FftOptions opt = {}) {
    const int d = model.dim();
    if (d > 2) fail(ErrorKind::invalid_input, "Fourier inversion supports d <= 2");
    if (!(t > 0)) fail(ErrorKind::invalid_input, "density inversion needs t > 0");
    AccumulatedSymbol acc(model, t);
    auto scan = detail::scan_cutoff(acc, opt.cf_cutoff);
    acc.warm(1e-6, scan.xi_cut * 1.2);
    Vec center = matrix_exponential(model.A, t) * x;

    if (d == 1) {
        double want = opt.extent_factor * scan.scale;
        for (;;) {
            auto g = detail::choose_grid_1d(scan.xi_cut, want, opt);
            const int n = g.n, m = n / 2;
            std::vector<Cplx> cf(n);
            Vec xi(1);
            const double xi_keep = scan.xi_cut * 1.000001;
            auto cf_at = [&](double v) -> Cplx {
                if (std::abs(v) > xi_keep) return {0.0, 0.0};
                xi(0) = v;
                return std::exp(-acc.eval(xi));
            };
            for (int j = m; j < n; ++j) {
                cf[j] = cf_at((j - m) * g.dxi);
                if (j > m) cf[n - j] = std::conj(cf[j]);
            }
            cf[0] = std::conj(cf_at(m * g.dxi));
            auto fvals = detail::centered_inverse_dft(std::move(cf), g.dxi);
            GriddedDensity out;
            out.dim = 1;
            out.h = Vec::Constant(1, g.dx);
            out.origin = Vec::Constant(1, center(0) - m * g.dx);
            out.n = {n, 1};
            out.values.resize(n);
            double clipped = 0.0, imag_mass = 0.0;
            KahanSum total;
            for (int k = 0; k < n; ++k) {
                double v = fvals[k].real();
                imag_mass += std::abs(fvals[k].imag()) * g.dx;
                if (v < 0) {
                    clipped += -v * g.dx;
                    v = 0.0;
                }
                out.values[k] = v;
                total.add(v * g.dx);
            }
            out.total = total.value();
            out.clipped = clipped;
            // heavy tails alias into the window under periodization, which the
            // total cannot detect; widen until the boundary density is small
            double tail = detail::boundary_tail_estimate(out.values, g.half_extent);
            out.err_bar = clipped + imag_mass + std::abs(1.0 - out.total) + tail;
            bool tail_ok = tail <= 0.2 * opt.mass_tol;
            bool mass_ok = std::abs(1.0 - out.total) <= opt.mass_tol;
            if ((tail_ok && mass_ok) || g.n >= (1 << opt.max_log2n)) return out;
            want *= 4.0;
        }
    }

    // d == 2, tensor grid, full evaluation (n <= 512 per axis keeps this cheap)
    double want = opt.extent_factor * scan.scale;
    FftOptions o2 = opt;
    o2.max_log2n = opt.max_log2n_2d;
    for (;;) {
        auto g = detail::choose_grid_1d(scan.xi_cut, want, o2);
        const int n = g.n, m = n / 2;
        std::vector<std::vector<Cplx>> cf(n, std::vector<Cplx>(n));
        Vec xi(2);
        for (int jx = 0; jx < n; ++jx)
            for (int jy = 0; jy < n; ++jy) {
                xi(0) = (jx - m) * g.dxi;
                xi(1) = (jy - m) * g.dxi;
                cf[jx][jy] = std::exp(-acc.eval(xi));
            }
        // separable centered inversion: rows then columns
        std::vector<std::vector<Cplx>> tmp(n);
        for (int jx = 0; jx < n; ++jx) tmp[jx] = detail::centered_inverse_dft(cf[jx], g.dxi);
        GriddedDensity out;
        out.dim = 2;
        out.h = Vec::Constant(2, g.dx);
        out.origin = Vec(2);
        out.origin << center(0) - m * g.dx, center(1) - m * g.dx;
        out.n = {n, n};
        out.values.assign(std::size_t(n) * n, 0.0);
        std::vector<Cplx> col(n), colf;
        double clipped = 0.0;
        KahanSum total;
        double cell = g.dx * g.dx;
        for (int jy = 0; jy < n; ++jy) {
            for (int jx = 0; jx < n; ++jx) col[jx] = tmp[jx][jy];
            colf = detail::centered_inverse_dft(col, g.dxi);
            for (int kx = 0; kx < n; ++kx) {
                double v = colf[kx].real();
                if (v < 0) {
                    clipped += -v * cell;
                    v = 0.0;
                }
                out.values[std::size_t(kx) * n + jy] = v;
                total.add(v * cell);
            }
        }
        out.total = total.value();
        out.clipped = clipped;
        out.err_bar = clipped + std::abs(1.0 - out.total);
        if (std::abs(1.0 - out.total) <= opt.mass_tol || n >= (1 << o2.max_log2n)) return out;
        want *= 2.0;
    }
}

namespace detail {

// Shared-grid two-phase inversion: L1 distance between the laws with
// characteristic functions phase_a(xi) base(xi) and phase_b(xi) base(xi).
struct TvGridResult {
    double l1 = 0.0;
    double err = 0.0;
};

template <class BaseCf>
inline TvGridResult tv_l1_on_grid_1d(const BaseCf& base_cf, double gap, double xi_cut,
                                     double scale, const FftOptions& opt) {
    double want = opt.extent_factor * scale + std::abs(gap);
    for (;;) {
        auto g = choose_grid_1d(xi_cut, want, opt);
        const int n = g.n, m = n / 2;
        std::vector<Cplx> diff(n);
        Vec xi(1);
        const double xi_keep = xi_cut * 1.000001;
        auto diff_at = [&](double v) -> Cplx {
            if (std::abs(v) > xi_keep) return {0.0, 0.0};
            xi(0) = v;
            double ph = 0.5 * gap * v;
            return (std::exp(Cplx(0, ph)) - std::exp(Cplx(0, -ph))) * base_cf(xi);
        };
        for (int j = m; j < n; ++j) {
            diff[j] = diff_at((j - m) * g.dxi);
            if (j > m) diff[n - j] = std::conj(diff[j]);
        }
        diff[0] = std::conj(diff_at(m * g.dxi));
        auto fd = centered_inverse_dft(std::move(diff), g.dxi);
        KahanSum l1, l1_coarse;
        double imag_mass = 0.0;
        std::vector<double> absvals(n);
        for (int k = 0; k < n; ++k) {
            double av = std::abs(fd[k].real());
            l1.add(av * g.dx);
            if ((k & 1) == 0) l1_coarse.add(av * 2.0 * g.dx);
            imag_mass += std::abs(fd[k].imag()) * g.dx;
            absvals[k] = av;
        }
        double riemann = std::abs(l1.value() - l1_coarse.value()) / 3.0;
        double tail = boundary_tail_estimate(absvals, g.half_extent);
        if (tail <= std::max(0.2 * opt.mass_tol, 0.01 * l1.value()) ||
            g.n >= (1 << opt.max_log2n))
            return {l1.value(), imag_mass + tail + riemann + 2.0 * opt.cf_cutoff};
        want *= 4.0;
    }
}

inline bool is_pure_compound_poisson(const OUModel& model) {
    return model.triplet.Q.cwiseAbs().maxCoeff() == 0.0 &&
           detail::measure_is_finite(model.triplet.nu) &&
           model.triplet.nu.kind != MeasureKind::none;
}

}  // namespace detail

// ||P_t(x,.) - P_t(y,.)||_var by Fourier inversion of the shared stochastic
// part with the two start phases. Depends on (x, y) only through
// g = e^{tA}(x - y), which makes the translation identity exact. For pure
// compound-Poisson models the atom at the no-jump path is handled exactly and
// the absolutely continuous remainder is inverted separately.
inline ValueWithError tv_distance_oracle(const OUModel& model, double t, const Vec& x,
                                         const Vec& y, FftOptions opt = {}) {
    const int d = model.dim();
    if (d > 2) fail(ErrorKind::invalid_input, "tv oracle supports d <= 2");
    if (!(t > 0)) fail(ErrorKind::invalid_input, "tv oracle needs t > 0");
    Vec gap_vec = matrix_exponential(model.A, t) * (x - y);
    double gap = gap_vec.norm();
    if (gap == 0.0) return {0.0, 0.0};
    if (d == 2)
        fail(ErrorKind::invalid_input, "2-d tv oracle: use tv_distance_oracle_2d");

    AccumulatedSymbol acc(model, t);
    double sgap = gap_vec(0);

    if (detail::is_pure_compound_poisson(model)) {
        // atom part: mass exp(-C t) at the deterministic no-jump path
        TruncatedMeasure tr = truncate(model.triplet.nu, 1.0);
        double rate = tr.total_mass;
        double atom_mass = std::exp(-rate * t);
        Vec b_eff = model.triplet.b - tr.unit_ball_mean;
        Vec a0 = drift_convolution(model.A, b_eff, t);
        double atom_tv = 2.0 * atom_mass;
        // AC characteristic function: exp(-psi) - atom_mass exp(i<xi, a0>)
        auto base = [&](const Vec& xi) {
            return std::exp(-acc.eval(xi)) -
                   atom_mass * std::exp(Cplx(0.0, xi.dot(a0)));
        };
        // cutoff where the AC cf falls below the cutoff level
        double xi_cut = 1e-3;
        {
            Vec xi(1);
            xi(0) = xi_cut;
            int stall = 0;
            double prev = std::abs(base(xi));
            while (prev > opt.cf_cutoff) {
                xi_cut *= 2.0;
                xi(0) = xi_cut;
                double cur = std::abs(base(xi));
                stall = (cur > 0.95 * prev) ? stall + 1 : 0;
                if (stall > 60 || xi_cut > 1e9)
                    fail(ErrorKind::resolution,
                         "compound-Poisson AC characteristic function decays too slowly "
                         "to invert at this horizon");
                prev = cur;
            }
        }
        Mat sig = gaussian_convolution_covariance(model.A, Mat::Identity(1, 1), t);
        double scale = std::max(1.0, std::sqrt(sig(0, 0)));
        acc.warm(1e-6, xi_cut * 1.2);
        auto r = detail::tv_l1_on_grid_1d(base, sgap, xi_cut, scale, opt);
        double v = std::min(2.0, atom_tv + r.l1);
        return {v, r.err};
    }

    auto scan = detail::scan_cutoff(acc, opt.cf_cutoff);
    acc.warm(1e-6, scan.xi_cut * 1.2);
    auto base = [&](const Vec& xi) { return std::exp(-acc.eval(xi)); };
    auto r = detail::tv_l1_on_grid_1d(base, sgap, scan.xi_cut, scan.scale, opt);
    return {std::min(2.0, r.l1), r.err};
}

// Accumulator horizon for the stationary law: beyond T the envelope makes the
// remaining symbol contribution negligible.
inline double stationary_horizon(const OUModel& model) {
    if (!model.spectral.strictly_stable)
        fail(ErrorKind::precondition, "stationary law needs a strictly stable drift matrix");
    double lam = model.spectral.envelope_lambda;
    double c = model.spectral.envelope_c;
    double scale = 1.0 + model.tail_mass + std::abs(model.triplet.b.cwiseAbs().sum()) +
                   model.triplet.Q.trace();
    double t = (std::log(c * scale + 1.0) + 40.0) / lam;
    return std::min(t, 500.0 / lam);
}

// Stationary density by inversion of exp(-psi_infinity).
inline GriddedDensity stationary_density_by_fft(const OUModel& model, FftOptions opt = {}) {
    if (!model.log_moment_finite)
        fail(ErrorKind::precondition, "stationary law needs the log-moment condition");
    double T = stationary_horizon(model);
    return density_by_fft(model, T, Vec::Zero(model.dim()), opt);
}

// ||P_t(x,.) - mu||_var via two inversions on a shared grid.
inline ValueWithError tv_vs_invariant_oracle(const OUModel& model, double t, const Vec& x,
                                             FftOptions opt = {}) {
    if (model.dim() != 1)
        fail(ErrorKind::invalid_input, "vs-invariant oracle implemented for d = 1");
    if (!(t > 0)) fail(ErrorKind::invalid_input, "vs-invariant oracle needs t > 0");
    double T = stationary_horizon(model);
    AccumulatedSymbol acc_t(model, t);
    AccumulatedSymbol acc_inf(model, T);
    auto scan = detail::scan_cutoff(acc_t, opt.cf_cutoff);
    // the stationary law is wider; widen the window with its scale proxy
    auto scan_inf = detail::scan_cutoff(acc_inf, opt.cf_cutoff);
    acc_t.warm(1e-6, scan.xi_cut * 1.2);
    acc_inf.warm(1e-6, scan.xi_cut * 1.2);
    double center = (matrix_exponential(model.A, t) * x)(0);

    double want = opt.extent_factor * std::max(scan.scale, scan_inf.scale) + std::abs(center);
    for (;;) {
        auto g = detail::choose_grid_1d(scan.xi_cut, want, opt);
        const int n = g.n, m = n / 2;
        std::vector<Cplx> diff(n);
        Vec xi(1);
        const double xi_keep = scan.xi_cut * 1.000001;
        auto diff_at = [&](double v) -> Cplx {
            if (std::abs(v) > xi_keep) return {0.0, 0.0};
            xi(0) = v;
            return std::exp(Cplx(0.0, center * v) - acc_t.eval(xi)) -
                   std::exp(-acc_inf.eval(xi));
        };
        for (int j = m; j < n; ++j) {
            diff[j] = diff_at((j - m) * g.dxi);
            if (j > m) diff[n - j] = std::conj(diff[j]);
        }
        diff[0] = std::conj(diff_at(m * g.dxi));
        auto fd = detail::centered_inverse_dft(std::move(diff), g.dxi);
        KahanSum l1, l1_coarse;
        double imag_mass = 0.0;
        std::vector<double> absvals(n);
        for (int k = 0; k < n; ++k) {
            double av = std::abs(fd[k].real());
            l1.add(av * g.dx);
            if ((k & 1) == 0) l1_coarse.add(av * 2.0 * g.dx);
            imag_mass += std::abs(fd[k].imag()) * g.dx;
            absvals[k] = av;
        }
        double riemann = std::abs(l1.value() - l1_coarse.value()) / 3.0;
        double tail = detail::boundary_tail_estimate(absvals, g.half_extent);
        if (tail <= std::max(0.2 * opt.mass_tol, 0.01 * l1.value()) ||
            g.n >= (1 << opt.max_log2n))
            return {std::min(2.0, l1.value()), imag_mass + tail + riemann + 2.0 * opt.cf_cutoff};
        want *= 4.0;
    }
}

// Kolmogorov-Smirnov distance between sorted samples and the CDF implied by a
// gridded density (linear interpolation of the cumulative trapezoid).
inline double ks_distance(std::vector<double> samples, const GriddedDensity& density) {
    if (density.dim != 1) fail(ErrorKind::invalid_input, "ks_distance needs a 1-d density");
    std::sort(samples.begin(), samples.end());
    const int n = density.n[0];
    double h = density.h(0);
    std::vector<double> cdf(n, 0.0);
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        acc += density.values[k] * h;
        cdf[k] = acc;
    }
    double norm = acc > 0 ? acc : 1.0;
    auto cdf_at = [&](double u) {
        double pos = (u - density.origin(0)) / h;
        if (pos <= 0) return 0.0;
        if (pos >= n - 1) return 1.0;
        int k = int(pos);
        double f = pos - k;
        return (cdf[k] + density.values[k + 1] * h * f) / norm;
    };
    double worst = 0.0;
    const double m = double(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double c = cdf_at(samples[i]);
        worst = std::max(worst, std::abs(c - double(i) / m));
        worst = std::max(worst, std::abs(c - double(i + 1) / m));
    }
    return worst;
}

}  // namespace levyou

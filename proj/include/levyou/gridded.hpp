#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "levyou/common.hpp"
#include "levyou/levy.hpp"
#include "levyou/quadrature.hpp"
#include "levyou/rng.hpp"

namespace levyou {

// Finite-measure algebra on regular lattices (d <= 2): meet, total variation,
// shift by delta_x convolution and the maximal-coupling draw. All values are
// cell masses; operations require identical grids.

struct GridSpec {
    int dim = 1;
    Vec lo = Vec::Constant(1, -32.0);
    Vec hi = Vec::Constant(1, 32.0);
    std::array<int, 2> cells{8192, 1};
    double max_leak = kInf;  // coverage threshold on unaccounted mass

    static GridSpec make_1d(double lo, double hi, int n, double max_leak = kInf) {
        GridSpec g;
        g.dim = 1;
        g.lo = Vec::Constant(1, lo);
        g.hi = Vec::Constant(1, hi);
        g.cells = {n, 1};
        g.max_leak = max_leak;
        return g;
    }
};

class GriddedMeasure {
public:
    GriddedMeasure() = default;
    GriddedMeasure(int dim, Vec origin, Vec spacing, std::array<int, 2> n)
        : dim_(dim), origin_(std::move(origin)), h_(std::move(spacing)), n_(n),
          w_(std::size_t(n[0]) * std::size_t(dim == 2 ? n[1] : 1), 0.0) {
        if (dim < 1 || dim > 2) fail(ErrorKind::invalid_input, "grid dimension must be 1 or 2");
    }

    int dim() const { return dim_; }
    const Vec& origin() const { return origin_; }
    const Vec& spacing() const { return h_; }
    const std::array<int, 2>& cells() const { return n_; }
    std::size_t size() const { return w_.size(); }
    double& weight(std::size_t i) { return w_[i]; }
    double weight(std::size_t i) const { return w_[i]; }
    const std::vector<double>& weights() const { return w_; }
    std::vector<double>& weights() { return w_; }

    double leak() const { return leak_; }
    void set_leak(double l) { leak_ = l; }

    double total_mass() const {
        KahanSum s;
        for (double v : w_) s.add(v);
        return s.value();
    }

    Vec cell_center(std::size_t idx) const {
        Vec c(dim_);
        if (dim_ == 1) {
            c(0) = origin_(0) + (double(idx) + 0.5) * h_(0);
        } else {
            std::size_t iy = idx % std::size_t(n_[1]);
            std::size_t ix = idx / std::size_t(n_[1]);
            c(0) = origin_(0) + (double(ix) + 0.5) * h_(0);
            c(1) = origin_(1) + (double(iy) + 0.5) * h_(1);
        }
        return c;
    }

    bool same_grid(const GriddedMeasure& o) const {
        if (dim_ != o.dim_ || n_ != o.n_) return false;
        double tol = 1e-12 * (1.0 + h_.cwiseAbs().maxCoeff());
        return (origin_ - o.origin_).cwiseAbs().maxCoeff() <= tol &&
               (h_ - o.h_).cwiseAbs().maxCoeff() <= tol;
    }

    // index of the cell containing z, or npos when outside
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t locate(const Vec& z) const {
        long ix = long(std::floor((z(0) - origin_(0)) / h_(0)));
        if (ix < 0 || ix >= n_[0]) return npos;
        if (dim_ == 1) return std::size_t(ix);
        long iy = long(std::floor((z(1) - origin_(1)) / h_(1)));
        if (iy < 0 || iy >= n_[1]) return npos;
        return std::size_t(ix) * n_[1] + std::size_t(iy);
    }

private:
    int dim_ = 1;
    Vec origin_ = Vec::Zero(1);
    Vec h_ = Vec::Ones(1);
    std::array<int, 2> n_{1, 1};
    std::vector<double> w_;
    double leak_ = 0.0;
};

namespace detail {

inline void check_same_grid(const GriddedMeasure& a, const GriddedMeasure& b) {
    if (!a.same_grid(b)) fail(ErrorKind::invalid_input, "grid mismatch");
}

// density value of the truncated measure at z (0 for atom variants)
inline double restricted_density_value(const LevyMeasure& base, double eff_eps, const Vec& z) {
    double r = z.norm();
    if (r < eff_eps || r == 0.0 || r < base.inner_radius) return 0.0;
    switch (base.kind) {
        case MeasureKind::none:
        case MeasureKind::atoms:
            return 0.0;
        case MeasureKind::stable:
            if (r > base.support_radius) return 0.0;
            return base.stable_scale * std::pow(r, -double(base.dim) - base.alpha0);
        case MeasureKind::density:
            if (r > base.support_radius) return 0.0;
            if (base.dim == 1) return z(0) >= 0 ? base.rho_pos(z(0)) : base.rho_neg(-z(0));
            if (base.isotropic) return base.radial(r);
            return base.rho_general(z);
        case MeasureKind::sum: {
            double acc = 0.0;
            for (const auto& c : base.components)
                acc += restricted_density_value(c, eff_eps, z);
            return acc;
        }
    }
    return 0.0;
}

}  // namespace detail

// Exact cell integrals of nu_eps on the grid; atoms are assigned to their
// containing cell. The recorded leak is the mass unaccounted for by the grid.
inline GriddedMeasure discretize(const TruncatedMeasure& t, const GridSpec& spec) {
    GriddedMeasure g(spec.dim, spec.lo,
                     (spec.hi - spec.lo).cwiseQuotient(
                         Vec::Map(std::array<double, 2>{double(spec.cells[0]),
                                                        double(spec.cells[1])}.data(),
                                  spec.dim)),
                     spec.cells);
    if (spec.dim == 1) {
        double lo = spec.lo(0), h = g.spacing()(0);
        if (t.interval_mass) {
            for (int i = 0; i < spec.cells[0]; ++i) {
                double a = lo + i * h, b = a + h;
                g.weight(i) += t.interval_mass(a, b);
            }
        } else if (t.base.kind != MeasureKind::atoms) {
            for (int i = 0; i < spec.cells[0]; ++i) {
                double a = lo + i * h, b = a + h;
                Vec z(1);
                g.weight(i) += gauss15(
                    [&](double x) {
                        z(0) = x;
                        return detail::restricted_density_value(t.base, t.eff_epsilon, z);
                    },
                    a, b);
            }
        }
    } else {
        // tensor Gauss per cell on the restricted density
        double hx = g.spacing()(0), hy = g.spacing()(1);
        const auto& xs = boost::math::quadrature::gauss<double, 7>::abscissa();
        const auto& ws = boost::math::quadrature::gauss<double, 7>::weights();
        auto nodes = [&](double a, double b, std::vector<std::pair<double, double>>& out) {
            out.clear();
            double c = 0.5 * (a + b), r = 0.5 * (b - a);
            out.push_back({c + r * xs[0], r * ws[0]});
            for (std::size_t k = 1; k < xs.size(); ++k) {
                out.push_back({c + r * xs[k], r * ws[k]});
                out.push_back({c - r * xs[k], r * ws[k]});
            }
        };
        std::vector<std::pair<double, double>> nx, ny;
        Vec z(2);
        for (int ix = 0; ix < spec.cells[0]; ++ix) {
            double ax = spec.lo(0) + ix * hx;
            nodes(ax, ax + hx, nx);
            for (int iy = 0; iy < spec.cells[1]; ++iy) {
                double ay = spec.lo(1) + iy * hy;
                nodes(ay, ay + hy, ny);
                double acc = 0.0;
                for (auto& [x, wx] : nx)
                    for (auto& [y, wy] : ny) {
                        z << x, y;
                        acc += wx * wy *
                               detail::restricted_density_value(t.base, t.eff_epsilon, z);
                    }
                g.weight(std::size_t(ix) * spec.cells[1] + iy) += acc;
            }
        }
    }
    for (const auto& a : t.restricted_atoms) {
        std::size_t idx = g.locate(a.z);
        if (idx != GriddedMeasure::npos) g.weight(idx) += a.mass;
    }
    double leak = std::max(0.0, t.total_mass - g.total_mass());
    g.set_leak(leak);
    if (leak > spec.max_leak)
        fail(ErrorKind::coverage, "grid tail mass " + std::to_string(leak) + " above tolerance");
    return g;
}

// Closed-form density overload (1-d).
inline GriddedMeasure discretize_density_1d(const std::function<double(double)>& rho,
                                            const GridSpec& spec, double mass_hint = -1.0) {
    GriddedMeasure g(1, spec.lo, Vec::Constant(1, (spec.hi(0) - spec.lo(0)) / spec.cells[0]),
                     {spec.cells[0], 1});
    double lo = spec.lo(0), h = g.spacing()(0);
    for (int i = 0; i < spec.cells[0]; ++i)
        g.weight(i) = gauss15(rho, lo + i * h, lo + (i + 1) * h);
    if (mass_hint >= 0) {
        double leak = std::max(0.0, mass_hint - g.total_mass());
        g.set_leak(leak);
        if (leak > spec.max_leak) fail(ErrorKind::coverage, "grid tail mass above tolerance");
    }
    return g;
}

// mu1 - (mu1 - mu2)^+ realized cellwise.
inline GriddedMeasure meet(const GriddedMeasure& a, const GriddedMeasure& b) {
    detail::check_same_grid(a, b);
    GriddedMeasure out = a;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.weight(i) = std::min(a.weight(i), b.weight(i));
    out.set_leak(a.leak() + b.leak());
    return out;
}

inline double tv_norm(const GriddedMeasure& a, const GriddedMeasure& b) {
    detail::check_same_grid(a, b);
    KahanSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(std::abs(a.weight(i) - b.weight(i)));
    return s.value();
}

// delta_x * mu: lattice-aligned shifts permute cells exactly; fractional
// offsets split mass multilinearly across the 2^d neighbouring cells. The
// mass pushed outside the grid accumulates into the leak.
inline GriddedMeasure shift(const GriddedMeasure& m, const Vec& x) {
    if (x.size() != m.dim()) fail(ErrorKind::invalid_input, "shift dimension mismatch");
    GriddedMeasure out = m;
    auto shift_axis = [&](const std::vector<double>& src, std::vector<double>& dst, long stride,
                          long count, long lines, long line_stride, double offset_cells) {
        double kf = std::floor(offset_cells);
        long k = long(kf);
        double f = offset_cells - kf;
        for (long ln = 0; ln < lines; ++ln) {
            const double* s = src.data() + ln * line_stride;
            double* d = dst.data() + ln * line_stride;
            for (long j = 0; j < count; ++j) {
                double acc = 0.0;
                long j0 = j - k;      // contribution with weight (1-f)
                long j1 = j - k - 1;  // contribution with weight f
                if (j0 >= 0 && j0 < count) acc += (1.0 - f) * s[j0 * stride];
                if (j1 >= 0 && j1 < count) acc += f * s[j1 * stride];
                d[j * stride] = acc;
            }
        }
    };

    std::vector<double> tmp(m.size());
    if (m.dim() == 1) {
        shift_axis(m.weights(), tmp, 1, m.cells()[0], 1, 0, x(0) / m.spacing()(0));
        out.weights() = tmp;
    } else {
        long nx = m.cells()[0], ny = m.cells()[1];
        // axis 0 (stride ny), then axis 1 (stride 1)
        std::vector<double> mid(m.size());
        shift_axis(m.weights(), mid, ny, nx, ny, 1, x(0) / m.spacing()(0));
        shift_axis(mid, tmp, 1, ny, nx, ny, x(1) / m.spacing()(1));
        out.weights() = tmp;
    }
    double lost = m.total_mass() - out.total_mass();
    out.set_leak(m.leak() + std::max(0.0, lost));
    return out;
}

// Mass of nu_eps ^ (delta_x * nu_eps).
inline double overlap_mass(const GriddedMeasure& m, const Vec& x) {
    return meet(m, shift(m, x)).total_mass();
}

// CDF sampler over cells; draws return cell centers.
class GriddedSampler {
public:
    explicit GriddedSampler(const GriddedMeasure& m) : m_(&m) {
        cum_.resize(m.size());
        KahanSum acc;
        for (std::size_t i = 0; i < m.size(); ++i) {
            acc.add(m.weight(i));
            cum_[i] = acc.value();
        }
        total_ = acc.value();
        if (!(total_ > 0)) fail(ErrorKind::invalid_input, "cannot sample from zero measure");
    }

    Vec draw(RandomStream& rng) const {
        double u = rng.uniform01() * total_;
        auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
        std::size_t k = std::min<std::size_t>(it - cum_.begin(), cum_.size() - 1);
        return m_->cell_center(k);
    }

private:
    const GriddedMeasure* m_;
    std::vector<double> cum_;
    double total_ = 0.0;
};

struct CouplingDraw {
    Vec u;
    Vec u_shifted;
    bool coupled = false;
};

// Maximal coupling of (mu, delta_x * mu) for a unit-mass gridded measure:
// with probability equal to the overlap mass both draws come from the meet
// (and coincide); otherwise each marginal draws from its normalized residual.
class MaximalCoupler {
public:
    explicit MaximalCoupler(GriddedMeasure mu) : mu_(std::move(mu)) {
        double mass = mu_.total_mass();
        if (std::abs(mass - 1.0) > 1e-6)
            fail(ErrorKind::invalid_input, "maximal coupling needs a unit-mass measure");
    }

    const GriddedMeasure& measure() const { return mu_; }

    CouplingDraw sample(const Vec& x, RandomStream& rng) const {
        GriddedMeasure shifted = shift(mu_, x);
        const auto& a = mu_.weights();
        const auto& b = shifted.weights();
        double p = 0.0;
        {
            KahanSum s;
            for (std::size_t i = 0; i < a.size(); ++i) s.add(std::min(a[i], b[i]));
            p = s.value();
        }
        CouplingDraw out;
        double resid_mass = std::max(0.0, 1.0 - p);
        double shifted_resid = shifted.total_mass() - p;
        if (shifted_resid <= 1e-12 && resid_mass > 1e-9)
            fail(ErrorKind::coverage,
                 "shifted law lost its residual mass outside the grid");
        double u = rng.uniform01();
        if (u < p || resid_mass <= 1e-12) {
            if (u >= p) u = p * 0.5 + 1e-300;  // rounding guard at full overlap
            // walk the meet CDF to the target
            double target = u;
            std::size_t k = pick(
                [&](std::size_t i) { return std::min(a[i], b[i]); }, a.size(), target);
            out.u = mu_.cell_center(k);
            out.u_shifted = out.u;
            out.coupled = true;
            return out;
        }
        double r1 = rng.uniform01() * resid_mass;
        std::size_t k1 = pick(
            [&](std::size_t i) { return a[i] - std::min(a[i], b[i]); }, a.size(), r1);
        double r2 = rng.uniform01() * std::max(shifted_resid, 1e-300);
        std::size_t k2 = pick(
            [&](std::size_t i) { return b[i] - std::min(a[i], b[i]); }, b.size(), r2);
        out.u = mu_.cell_center(k1);
        out.u_shifted = mu_.cell_center(k2);
        out.coupled = false;
        return out;
    }

private:
    template <class WeightFn>
    std::size_t pick(const WeightFn& w, std::size_t n, double target) const {
        KahanSum acc;
        std::size_t last_pos = 0;
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            double wi = w(i);
            if (wi <= 0) continue;
            acc.add(wi);
            last_pos = i;
            any = true;
            if (acc.value() >= target) return i;
        }
        if (!any) fail(ErrorKind::numeric, "empty residual in coupling draw");
        return last_pos;
    }

    GriddedMeasure mu_;
};

inline CouplingDraw maximal_coupling_sample(const GriddedMeasure& unit_mu, const Vec& x,
                                            RandomStream& rng) {
    return MaximalCoupler(unit_mu).sample(x, rng);
}

}  // namespace levyou

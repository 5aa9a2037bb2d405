#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "levyou/common.hpp"
#include "levyou/gridded.hpp"
#include "levyou/model.hpp"
#include "levyou/parallel.hpp"

namespace levyou {

// Simulation of X_t^x = e^{tA} x + int_0^t e^{(t-s)A} dZ_s. The deterministic
// flow, drift integral, Gaussian convolution and big jumps are exact; only
// sub-epsilon jumps are approximated per the scheme. With Gaussian matching
// the matched small-jump part folds into the convolution covariance exactly,
// so no time stepping is needed anywhere.

struct CompoundPoissonPath {
    std::vector<double> times;  // jump times <= t, increasing
    std::vector<Vec> marks;
    int count() const { return int(times.size()); }
};

namespace detail {

// e^{uA} w applied through a cached eigendecomposition (falls back to a fresh
// matrix exponential for defective A).
struct FlowCache {
    Mat a;
    bool diagonalizable = false;
    Eigen::MatrixXcd v, v_inv;
    Eigen::VectorXcd lam;

    explicit FlowCache(const Mat& a_in) : a(a_in) {
        Eigen::EigenSolver<Mat> es(a);
        if (es.info() == Eigen::Success) {
            v = es.eigenvectors();
            Eigen::FullPivLU<Eigen::MatrixXcd> lu(v);
            if (lu.isInvertible()) {
                v_inv = lu.inverse();
                lam = es.eigenvalues();
                double cond = v.cwiseAbs().maxCoeff() * v_inv.cwiseAbs().maxCoeff();
                diagonalizable = cond < 1e8;
            }
        }
    }

    Vec apply(double u, const Vec& w) const {
        if (a.rows() == 1) return std::exp(a(0, 0) * u) * w;
        if (!diagonalizable) return matrix_exponential(a, u) * w;
        Eigen::VectorXcd y = v_inv * w.cast<Cplx>();
        for (int i = 0; i < y.size(); ++i) y(i) *= std::exp(lam(i) * u);
        return (v * y).real();
    }
};

}  // namespace detail

class EndpointSimulator {
public:
    EndpointSimulator(const OUModel& model, SmallJumpScheme scheme = {})
        : model_(&model), scheme_(scheme), flow_(model.A), b_eff_(model.triplet.b),
          q_eff_(model.triplet.Q) {
        if (!(scheme.epsilon > 0))
            fail(ErrorKind::configuration, "small-jump scheme needs epsilon > 0");
        collect(model.triplet.nu);
        for (const auto& t : cp_parts_) {
            b_eff_ -= t.unit_ball_mean;
            if (scheme_.gaussian_match) q_eff_ += t.small_cov;
        }
        has_gauss_ = q_eff_.cwiseAbs().maxCoeff() > 0;
        has_drift_ = b_eff_.cwiseAbs().maxCoeff() > 0;
    }

    // Per-horizon exact pieces, computed once before a Monte Carlo loop.
    struct Prepared {
        double t = 0.0;
        Mat exp_at;
        Vec drift;
        Mat gauss_factor;  // L with L L^T = Sigma_t
        bool has_gauss = false;
        std::vector<double> stable_scales;  // per stable part
    };

    Prepared prepare(double t) const {
        if (!(t >= 0)) fail(ErrorKind::invalid_input, "endpoint horizon must be >= 0");
        guard_horizon(t);
        Prepared p;
        p.t = t;
        p.exp_at = matrix_exponential(model_->A, t);
        p.drift = has_drift_ ? drift_convolution(model_->A, b_eff_, t) : Vec::Zero(dim());
        p.has_gauss = has_gauss_ && t > 0;
        if (p.has_gauss)
            p.gauss_factor = psd_sqrt(gaussian_convolution_covariance(model_->A, q_eff_, t));
        for (const auto& s : stable_parts_) {
            // int_0^t exp(alpha a s) ds with a the (scalar) drift coefficient
            double a = model_->A(0, 0);
            double expint = std::abs(a) < 1e-14
                                ? t
                                : (std::exp(s.alpha * a * t) - 1.0) / (s.alpha * a);
            p.stable_scales.push_back(std::pow(s.unit_re * expint, 1.0 / s.alpha));
        }
        return p;
    }

    Vec draw(const Prepared& p, const Vec& x0, RandomStream& rng,
             CompoundPoissonPath* path_out = nullptr) const {
        if (x0.size() != dim()) fail(ErrorKind::invalid_input, "start dimension mismatch");
        Vec out = p.exp_at * x0 + p.drift;
        if (p.has_gauss) out += p.gauss_factor * rng.normal_vec(dim());
        for (std::size_t i = 0; i < stable_parts_.size(); ++i)
            out(0) += p.stable_scales[i] * rng.stable_symmetric(stable_parts_[i].alpha);
        for (const auto& part : cp_parts_) {
            double s = rng.exponential(part.total_mass);
            while (s <= p.t) {
                Vec u = part.sampler(rng);
                out += flow_.apply(p.t - s, u);
                if (path_out) {
                    path_out->times.push_back(s);
                    path_out->marks.push_back(u);
                }
                s += rng.exponential(part.total_mass);
            }
        }
        return out;
    }

    Vec draw(const Vec& x0, double t, RandomStream& rng) const {
        return draw(prepare(t), x0, rng);
    }

    const Vec& effective_drift() const { return b_eff_; }
    const Mat& effective_gaussian() const { return q_eff_; }
    int dim() const { return model_->dim(); }
    const OUModel& model() const { return *model_; }

private:
    struct StablePart {
        double alpha;
        double unit_re;
    };

    void collect(const LevyMeasure& m) {
        switch (m.kind) {
            case MeasureKind::none:
                return;
            case MeasureKind::sum:
                for (const auto& c : m.components) collect(c);
                return;
            case MeasureKind::stable:
                if (scheme_.exact_stable && m.dim == 1) {
                    stable_parts_.push_back({m.alpha0, detail::stable_unit_symbol(m)});
                    return;
                }
                [[fallthrough]];
            default: {
                TruncatedMeasure t = truncate(m, scheme_.epsilon);
                if (t.total_mass > 0) cp_parts_.push_back(std::move(t));
            }
        }
    }

    void guard_horizon(double t) const {
        if (!model_->spectral.weakly_stable_semisimple && !model_->spectral.strictly_stable) {
            double growth = operator_norm(model_->A) * t;
            if (growth > 50.0)
                fail(ErrorKind::numeric, "unstable drift over a long horizon would overflow");
        }
    }

    const OUModel* model_;
    SmallJumpScheme scheme_;
    detail::FlowCache flow_;
    Vec b_eff_;
    Mat q_eff_;
    bool has_gauss_ = false;
    bool has_drift_ = false;
    std::vector<StablePart> stable_parts_;
    std::vector<TruncatedMeasure> cp_parts_;
};

inline Vec simulate_endpoint(const OUModel& model, const Vec& x, double t,
                             const SmallJumpScheme& scheme, RandomStream& rng) {
    return EndpointSimulator(model, scheme).draw(x, t, rng);
}

inline Vec simulate_convolution(const OUModel& model, double t, const SmallJumpScheme& scheme,
                                RandomStream& rng) {
    return simulate_endpoint(model, Vec::Zero(model.dim()), t, scheme, rng);
}

// ---------------------------------------------------------------------------
// Invariant sampling
// ---------------------------------------------------------------------------

// Horizon T with c e^{-lambda T} * scale <= tail_tol; by time reversal the
// convolution over [0, T] has the law of int_0^T e^{sA} dZ_s.
inline double invariant_horizon(const OUModel& model, double tail_tol) {
    if (!model.spectral.strictly_stable)
        fail(ErrorKind::precondition, "invariant sampling needs a strictly stable drift matrix");
    if (!(tail_tol > 0)) fail(ErrorKind::invalid_input, "tail tolerance must be positive");
    double scale = 1.0 + model.tail_mass + model.triplet.b.cwiseAbs().sum() +
                   model.triplet.Q.trace();
    double t = std::log(model.spectral.envelope_c * scale / tail_tol) /
               model.spectral.envelope_lambda;
    return std::max(t, 1.0);
}

class InvariantSampler {
public:
    InvariantSampler(const OUModel& model, double tail_tol = 1e-4, SmallJumpScheme scheme = {})
        : sim_(model, scheme), horizon_(invariant_horizon(model, tail_tol)) {
        if (!model.log_moment_finite)
            fail(ErrorKind::precondition,
                 "invariant sampling needs the log tail moment to be finite");
        prepared_ = sim_.prepare(horizon_);
    }

    double horizon() const { return horizon_; }

    Vec draw(RandomStream& rng) const {
        return sim_.draw(prepared_, Vec::Zero(sim_.dim()), rng);
    }

private:
    EndpointSimulator sim_;
    double horizon_;
    EndpointSimulator::Prepared prepared_;
};

inline Vec sample_invariant(const OUModel& model, RandomStream& rng, double tail_tol = 1e-4,
                            SmallJumpScheme scheme = {}) {
    return InvariantSampler(model, tail_tol, scheme).draw(rng);
}

// ---------------------------------------------------------------------------
// Explicit coupling
// ---------------------------------------------------------------------------

struct CoupledEndpoint {
    Vec x;
    Vec x_prime;
    bool coupled = false;
    int n_jumps = 0;
    double last_jump_time = 0.0;  // valid iff n_jumps > 0
};

// Two endpoint copies sharing the drift, the Gaussian part, the clocks and
// all marks except the last, which is drawn by a maximal coupling of the
// normalized jump law against its shift along the flow of the start gap.
// On success the linear dynamics cancel the start separation exactly.
struct CouplingOptions {
    int grid_cells = 8192;
    double grid_radius = 0.0;  // 0 = automatic
    bool gaussian_match = true;
};

class CouplingEngine {
public:
    CouplingEngine(const OUModel& model, double epsilon, CouplingOptions opt = {})
        : model_(&model), epsilon_(epsilon), flow_(model.A) {
        if (!model.spectral.weakly_stable_semisimple)
            fail(ErrorKind::precondition,
                 "coupling needs nonpositive spectrum with semisimple imaginary eigenvalues");
        trunc_ = truncate(model.triplet.nu, epsilon);
        if (!(trunc_.total_mass > 0))
            fail(ErrorKind::configuration, "truncated jump intensity is zero");
        b_eff_ = model.triplet.b - trunc_.unit_ball_mean;
        q_eff_ = model.triplet.Q;
        if (opt.gaussian_match) q_eff_ += trunc_.small_cov;
        has_gauss_ = q_eff_.cwiseAbs().maxCoeff() > 0;
        has_drift_ = b_eff_.cwiseAbs().maxCoeff() > 0;

        GridSpec spec;
        double r = opt.grid_radius;
        if (r <= 0) {
            r = std::min(trunc_.sampler_tail_cut, 64.0);
            for (const auto& a : trunc_.restricted_atoms) r = std::max(r, a.z.norm() + 1.0);
            r = std::max(r, 2.0 * epsilon);
        }
        if (model.dim() == 1) {
            spec = GridSpec::make_1d(-r, r, opt.grid_cells);
        } else if (model.dim() == 2) {
            spec.dim = 2;
            spec.lo = Vec::Constant(2, -r);
            spec.hi = Vec::Constant(2, r);
            spec.cells = {256, 256};
        } else {
            fail(ErrorKind::invalid_input, "coupling grid supports d <= 2");
        }
        GriddedMeasure nu_bar = discretize(trunc_, spec);
        double mass = nu_bar.total_mass();
        for (std::size_t i = 0; i < nu_bar.size(); ++i) nu_bar.weight(i) /= mass;
        nu_bar.set_leak(nu_bar.leak() / trunc_.total_mass);
        coupler_.emplace(std::move(nu_bar));
        mark_sampler_.emplace(coupler_->measure());
    }

    double rate() const { return trunc_.total_mass; }
    const GriddedMeasure& mark_law() const { return coupler_->measure(); }

    struct Prepared {
        double t = 0.0;
        Mat exp_at;
        Vec drift;
        Mat gauss_factor;
        bool has_gauss = false;
    };

    Prepared prepare(double t) const {
        Prepared p;
        p.t = t;
        p.exp_at = matrix_exponential(model_->A, t);
        p.drift = has_drift_ ? drift_convolution(model_->A, b_eff_, t) : Vec::Zero(model_->dim());
        p.has_gauss = has_gauss_ && t > 0;
        if (p.has_gauss)
            p.gauss_factor = psd_sqrt(gaussian_convolution_covariance(model_->A, q_eff_, t));
        return p;
    }

    CoupledEndpoint sample_pair(const Prepared& p, const Vec& x, const Vec& y,
                                RandomStream& rng) const {
        const int d = model_->dim();
        if (x.size() != d || y.size() != d)
            fail(ErrorKind::invalid_input, "start dimension mismatch");
        Vec shared = p.drift;
        if (p.has_gauss) shared += p.gauss_factor * rng.normal_vec(d);

        // shared clocks
        std::vector<double> times;
        double s = rng.exponential(trunc_.total_mass);
        while (s <= p.t) {
            times.push_back(s);
            s += rng.exponential(trunc_.total_mass);
        }

        CoupledEndpoint out;
        out.n_jumps = int(times.size());
        if (times.empty()) {
            out.x = p.exp_at * x + shared;
            out.x_prime = p.exp_at * y + shared;
            out.coupled = false;
            return out;
        }
        out.last_jump_time = times.back();

        Vec base = Vec::Zero(d);
        for (std::size_t k = 0; k + 1 < times.size(); ++k)
            base += flow_.apply(p.t - times[k], mark_sampler_->draw(rng));

        double s_last = times.back();
        Vec gap_flow = flow_.apply(s_last, x - y);
        Vec w = -gap_flow;
        auto mc = coupler_->sample(w, rng);
        Vec mark_x = mc.u;
        Vec mark_y = mc.u_shifted + gap_flow;  // equals mark_x + flow(s)(x - y) on success

        Vec tail_flowed = flow_.apply(p.t - s_last, mark_x);
        out.x = p.exp_at * x + shared + base + tail_flowed;
        if (mc.coupled) {
            out.x_prime = out.x;  // exact by the linear cancellation
            out.coupled = true;
        } else {
            out.x_prime = p.exp_at * y + shared + base + flow_.apply(p.t - s_last, mark_y);
            out.coupled = false;
        }
        return out;
    }

    CoupledEndpoint sample_pair(const Vec& x, const Vec& y, double t, RandomStream& rng) const {
        return sample_pair(prepare(t), x, y, rng);
    }

private:
    const OUModel* model_;
    double epsilon_;
    detail::FlowCache flow_;
    TruncatedMeasure trunc_;
    Vec b_eff_;
    Mat q_eff_;
    bool has_gauss_ = false;
    bool has_drift_ = false;
    std::optional<GriddedSampler> mark_sampler_;
    std::optional<MaximalCoupler> coupler_;
};

inline CoupledEndpoint coupled_pair_endpoint(const OUModel& model, const Vec& x, const Vec& y,
                                             double epsilon, double t, RandomStream& rng) {
    return CouplingEngine(model, epsilon).sample_pair(x, y, t, rng);
}

// ---------------------------------------------------------------------------
// Uniform moment check
// ---------------------------------------------------------------------------

struct MomentRow {
    double t;
    double mean;
    double std_error;
};

struct MomentTable {
    double alpha = 1.0;
    std::vector<MomentRow> rows;
    bool plateau = false;
};

// Monte Carlo estimate of E|Y_t|^alpha on a time grid with plateau detection:
// the last three grid values must agree within combined 3-sigma bands.
inline MomentTable uniform_moment_check(const OUModel& model, double alpha,
                                        const std::vector<double>& t_grid, std::size_t n,
                                        RandomStream root, int workers = 1,
                                        SmallJumpScheme scheme = {}) {
    if (!(alpha > 0 && alpha <= 1))
        fail(ErrorKind::invalid_input, "moment exponent must lie in (0, 1]");
    auto mom = moment_integral(model.triplet.nu, MomentKind::power, alpha);
    if (!mom.finite)
        fail(ErrorKind::precondition, "|z|^alpha tail moment is infinite; no uniform bound");
    EndpointSimulator sim(model, scheme);
    MomentTable out;
    out.alpha = alpha;
    std::size_t grid_index = 0;
    for (double t : t_grid) {
        auto prepared = sim.prepare(t);
        struct Acc {
            double s = 0.0, s2 = 0.0;
        };
        auto parts = run_workers<Acc>(
            n, workers, root.split(1000 + grid_index),
            [&](int, RandomStream& rng, std::size_t i0, std::size_t i1) {
                Acc a;
                Vec zero = Vec::Zero(model.dim());
                for (std::size_t i = i0; i < i1; ++i) {
                    double v = std::pow(sim.draw(prepared, zero, rng).norm(), alpha);
                    a.s += v;
                    a.s2 += v * v;
                }
                return a;
            });
        double s = 0.0, s2 = 0.0;
        for (const auto& a : parts) {
            s += a.s;
            s2 += a.s2;
        }
        double mean = s / double(n);
        double var = std::max(0.0, s2 / double(n) - mean * mean);
        out.rows.push_back({t, mean, std::sqrt(var / double(n))});
        ++grid_index;
    }
    if (out.rows.size() >= 3) {
        out.plateau = true;
        std::size_t m = out.rows.size();
        for (std::size_t i = m - 3; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                double gap = std::abs(out.rows[i].mean - out.rows[j].mean);
                if (gap > 3.0 * (out.rows[i].std_error + out.rows[j].std_error))
                    out.plateau = false;
            }
    }
    return out;
}

}  // namespace levyou

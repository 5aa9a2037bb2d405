#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "levyou/common.hpp"
#include "levyou/conditions.hpp"
#include "levyou/ou.hpp"
#include "levyou/spectral.hpp"

namespace levyou {

// End-to-end experiments: total-variation decay curves against the three rate
// regimes, rate fitting, and the aggregated report.

struct DecayRow {
    double t;
    double tv;
    double err;
};

struct DecayTable {
    std::string method;  // "oracle" | "mc-coupling" | "mc-histogram"
    std::vector<DecayRow> rows;
    std::map<std::string, std::string> meta;

    void append(double t, double tv, double err) {
        if (!rows.empty() && !(t > rows.back().t))
            fail(ErrorKind::invalid_input, "decay rows must have strictly increasing t");
        if (!(tv >= 0.0 && tv <= 2.0 + 1e-9)) fail(ErrorKind::invalid_input, "tv outside [0,2]");
        if (!(err >= 0.0)) fail(ErrorKind::invalid_input, "negative error bar");
        rows.push_back({t, std::min(tv, 2.0), err});
    }
};

struct DecaySet {
    std::vector<DecayTable> tables;

    const DecayTable* find(const std::string& method) const {
        for (const auto& t : tables)
            if (t.method == method) return &t;
        return nullptr;
    }
};

enum class TvMethod { oracle, monte_carlo, both };

struct LabOptions {
    std::size_t n = 100000;
    int workers = 1;
    std::uint64_t seed = 20260810;
    double epsilon = 1.0;
    SmallJumpScheme scheme{};
    FftOptions fft{};
    int hist_bins = 256;
    double invariant_tail_tol = 1e-4;
};

namespace detail {

// binomial 3-sigma half-width with a rule-of-three floor at zero counts
inline double binom_3sigma(double p_hat, std::size_t n) {
    double s = std::sqrt(std::max(p_hat * (1.0 - p_hat), 0.0) / double(n));
    double floor3 = 3.0 / double(n);
    return std::max(3.0 * s, p_hat == 0.0 || p_hat == 1.0 ? floor3 : 0.0);
}

struct HistL1 {
    double l1 = 0.0;
    double err = 0.0;
};

inline HistL1 histogram_l1(const std::vector<double>& a, const std::vector<double>& b,
                           int bins) {
    double lo = kInf, hi = -kInf;
    for (double v : a) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : b) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) return {0.0, 0.0};
    double w = (hi - lo) / bins;
    std::vector<double> pa(bins, 0.0), pb(bins, 0.0);
    for (double v : a) pa[std::min(bins - 1, int((v - lo) / w))] += 1.0 / double(a.size());
    for (double v : b) pb[std::min(bins - 1, int((v - lo) / w))] += 1.0 / double(b.size());
    HistL1 out;
    for (int i = 0; i < bins; ++i) out.l1 += std::abs(pa[i] - pb[i]);
    // multinomial noise floor: E|p-q| under equality ~ sqrt(2 p / (pi n)) per bin
    double noise = 0.0;
    for (int i = 0; i < bins; ++i)
        noise += std::sqrt(2.0 * std::max(pa[i] + pb[i], 0.0) / (2.0 * std::numbers::pi *
                                                                 double(a.size())));
    out.err = noise;
    return out;
}

}  // namespace detail

// ||P_t(x,.) - P_t(y,.)|| over a time grid. The oracle path is deterministic;
// the Monte Carlo path reports both the coupling upper bound 2 P(not coupled)
// and the histogram L1 (biased low), each with its own bars.
inline DecaySet tv_decay_two_points(const OUModel& model, const Vec& x, const Vec& y,
                                    const std::vector<double>& t_grid, TvMethod method,
                                    LabOptions opt = {}) {
    DecaySet out;
    bool same_start = (x - y).norm() == 0.0;
    if (method != TvMethod::monte_carlo) {
        DecayTable t;
        t.method = "oracle";
        for (double tt : t_grid) {
            if (same_start) {
                t.append(tt, 0.0, 0.0);
                continue;
            }
            auto v = tv_distance_oracle(model, tt, x, y, opt.fft);
            t.append(tt, v.value, v.error);
        }
        out.tables.push_back(std::move(t));
    }
    if (method != TvMethod::oracle) {
        DecayTable tc, th;
        tc.method = "mc-coupling";
        th.method = "mc-histogram";
        CouplingEngine engine(model, opt.epsilon);
        EndpointSimulator sim(model, opt.scheme);
        RandomStream root(opt.seed);
        std::size_t ti = 0;
        for (double tt : t_grid) {
            auto prep = engine.prepare(tt);
            struct Acc {
                std::size_t not_coupled = 0;
            };
            auto parts = run_workers<Acc>(
                opt.n, opt.workers, root.split(10 + ti),
                [&](int, RandomStream& rng, std::size_t i0, std::size_t i1) {
                    Acc a;
                    for (std::size_t i = i0; i < i1; ++i)
                        if (!engine.sample_pair(prep, x, y, rng).coupled) ++a.not_coupled;
                    return a;
                });
            std::size_t nc = 0;
            for (const auto& a : parts) nc += a.not_coupled;
            double p = double(nc) / double(opt.n);
            tc.append(tt, std::min(2.0, 2.0 * p), 2.0 * detail::binom_3sigma(p, opt.n));

            // histogram estimate from two independent endpoint ensembles
            auto sprep = sim.prepare(tt);
            std::size_t nh = std::min<std::size_t>(opt.n, 20000);
            auto ens = [&](const Vec& start, std::uint64_t salt) {
                std::vector<double> vals(nh);
                auto parts2 = run_workers<int>(
                    nh, opt.workers, root.split(1000 + 2 * ti + salt),
                    [&](int, RandomStream& rng, std::size_t i0, std::size_t i1) {
                        for (std::size_t i = i0; i < i1; ++i)
                            vals[i] = sim.draw(sprep, start, rng)(0);
                        return 0;
                    });
                (void)parts2;
                return vals;
            };
            auto ha = ens(x, 0), hb = ens(y, 1);
            auto hl = detail::histogram_l1(ha, hb, opt.hist_bins);
            th.append(tt, std::min(2.0, hl.l1), hl.err);
            ++ti;
        }
        out.tables.push_back(std::move(tc));
        out.tables.push_back(std::move(th));
    }
    return out;
}

// ||P_t(x,.) - mu|| over a time grid; the Monte Carlo path pools the two-point
// coupling bound over invariant starting draws (the mixture bound).
inline DecaySet tv_decay_vs_invariant(const OUModel& model, const Vec& x,
                                      const std::vector<double>& t_grid, TvMethod method,
                                      LabOptions opt = {}) {
    DecaySet out;
    if (method != TvMethod::monte_carlo) {
        DecayTable t;
        t.method = "oracle";
        for (double tt : t_grid) {
            auto v = tv_vs_invariant_oracle(model, tt, x, opt.fft);
            t.append(tt, v.value, v.error);
        }
        out.tables.push_back(std::move(t));
    }
    if (method != TvMethod::oracle) {
        DecayTable tc, th;
        tc.method = "mc-coupling";
        th.method = "mc-histogram";
        CouplingEngine engine(model, opt.epsilon);
        InvariantSampler inv(model, opt.invariant_tail_tol, opt.scheme);
        EndpointSimulator sim(model, opt.scheme);
        RandomStream root(opt.seed);
        std::size_t ti = 0;
        for (double tt : t_grid) {
            auto prep = engine.prepare(tt);
            struct Acc {
                std::size_t not_coupled = 0;
            };
            auto parts = run_workers<Acc>(
                opt.n, opt.workers, root.split(20 + ti),
                [&](int, RandomStream& rng, std::size_t i0, std::size_t i1) {
                    Acc a;
                    for (std::size_t i = i0; i < i1; ++i) {
                        Vec y = inv.draw(rng);
                        if (!engine.sample_pair(prep, x, y, rng).coupled) ++a.not_coupled;
                    }
                    return a;
                });
            std::size_t nc = 0;
            for (const auto& a : parts) nc += a.not_coupled;
            double p = double(nc) / double(opt.n);
            tc.append(tt, std::min(2.0, 2.0 * p), 2.0 * detail::binom_3sigma(p, opt.n));

            auto sprep = sim.prepare(tt);
            std::size_t nh = std::min<std::size_t>(opt.n, 20000);
            std::vector<double> va(nh), vb(nh);
            run_workers<int>(nh, opt.workers, root.split(2000 + ti),
                             [&](int, RandomStream& rng, std::size_t i0, std::size_t i1) {
                                 for (std::size_t i = i0; i < i1; ++i) {
                                     va[i] = sim.draw(sprep, x, rng)(0);
                                     vb[i] = inv.draw(rng)(0);
                                 }
                                 return 0;
                             });
            auto hl = detail::histogram_l1(va, vb, opt.hist_bins);
            th.append(tt, std::min(2.0, hl.l1), hl.err);
            ++ti;
        }
        out.tables.push_back(std::move(tc));
        out.tables.push_back(std::move(th));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

enum class RateFamily { exponential, algebraic, alpha_exponential };

inline const char* rate_family_name(RateFamily f) {
    switch (f) {
        case RateFamily::exponential: return "exponential";
        case RateFamily::algebraic: return "algebraic";
        case RateFamily::alpha_exponential: return "alpha-exponential";
    }
    return "?";
}

struct RateFit {
    RateFamily family = RateFamily::exponential;
    double prefactor = 0.0;      // C in C e^{-kappa t} or C t^{-p}
    double rate = 0.0;           // kappa (exponential) or p (algebraic)
    double rate_ci_half = 0.0;   // 95% half-width
    double r2 = 0.0;             // on the transformed (log) scale
    int n_used = 0;
    std::vector<std::pair<double, double>> residuals;  // (t, log residual)
};

// Weighted least squares of log tv against t (exponential) or log t
// (algebraic). Rows at or below their noise floor are excluded.
inline RateFit fit_decay(const DecayTable& table, RateFamily family, double floor_mult = 1.0) {
    if (family == RateFamily::alpha_exponential)
        fail(ErrorKind::invalid_input, "alpha-exponential fits go through starting-point scaling");
    std::vector<double> xs, ys, ws, ts;
    for (const auto& r : table.rows) {
        if (!(r.tv > 0.0)) continue;
        if (r.tv <= floor_mult * r.err) continue;  // at the noise floor
        double sigma_log = std::max(r.err / r.tv, 1e-6);
        xs.push_back(family == RateFamily::exponential ? r.t : std::log(r.t));
        ys.push_back(std::log(r.tv));
        ws.push_back(1.0 / (sigma_log * sigma_log));
        ts.push_back(r.t);
    }
    if (xs.size() < 6)
        fail(ErrorKind::fit_degenerate,
             "fewer than 6 usable rows above the noise floor (" + std::to_string(xs.size()) + ")");
    double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        S += ws[i];
        Sx += ws[i] * xs[i];
        Sy += ws[i] * ys[i];
        Sxx += ws[i] * xs[i] * xs[i];
        Sxy += ws[i] * xs[i] * ys[i];
    }
    double delta = S * Sxx - Sx * Sx;
    if (!(delta > 0)) fail(ErrorKind::fit_degenerate, "degenerate design matrix");
    double slope = (S * Sxy - Sx * Sy) / delta;
    double intercept = (Sxx * Sy - Sx * Sxy) / delta;

    double chi2 = 0.0, sst = 0.0;
    double ybar = Sy / S;
    RateFit out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double fitv = intercept + slope * xs[i];
        chi2 += ws[i] * (ys[i] - fitv) * (ys[i] - fitv);
        sst += ws[i] * (ys[i] - ybar) * (ys[i] - ybar);
        out.residuals.push_back({ts[i], ys[i] - fitv});
    }
    double dof = double(xs.size()) - 2.0;
    double inflate = std::sqrt(std::max(1.0, chi2 / dof));
    out.family = family;
    out.prefactor = std::exp(intercept);
    out.rate = -slope;
    out.rate_ci_half = 1.96 * std::sqrt(S / delta) * inflate;
    out.r2 = sst > 0 ? 1.0 - chi2 / sst : 1.0;
    out.n_used = int(xs.size());
    return out;
}

// ---------------------------------------------------------------------------
// Starting-point scaling
// ---------------------------------------------------------------------------

struct ScalingRow {
    double x_norm;
    double tv;
    double err;
    double ratio;  // tv / (1 + |x|^alpha)
};

struct ScalingTable {
    double t = 0.0;
    double alpha = 1.0;
    std::vector<ScalingRow> rows;
    double max_ratio = 0.0;
    double min_ratio = 0.0;
};

inline ScalingTable starting_point_scaling(const OUModel& model, double t_fixed,
                                           const std::vector<double>& x_grid, double alpha,
                                           LabOptions opt = {}) {
    ScalingTable out;
    out.t = t_fixed;
    out.alpha = alpha;
    double mx = 0.0, mn = kInf;
    for (double xv : x_grid) {
        Vec x = Vec::Zero(model.dim());
        x(0) = xv;
        auto v = tv_vs_invariant_oracle(model, t_fixed, x, opt.fft);
        double ratio = v.value / (1.0 + std::pow(std::abs(xv), alpha));
        out.rows.push_back({std::abs(xv), v.value, v.error, ratio});
        mx = std::max(mx, ratio);
        mn = std::min(mn, ratio);
    }
    out.max_ratio = mx;
    out.min_ratio = mn;
    return out;
}

// ---------------------------------------------------------------------------
// Full report
// ---------------------------------------------------------------------------

struct ReportParams {
    std::vector<double> epsilon_sweep{0.5, 1.0, 2.0};
    double rho = 0.5;
    double alpha = 0.5;
    std::vector<double> t_grid{1, 2, 3, 4, 5, 6, 7, 8};
    Vec x0;  // empty = 2 e1
    std::size_t n = 20000;
    int workers = 1;
    std::uint64_t seed = 20260810;
    TvMethod method = TvMethod::oracle;
    LabOptions lab{};
};

struct FullReport {
    ConditionReport conditions;
    std::string expected_family;  // "exponential" | "algebraic" | "none"
    std::optional<DecaySet> decay;
    std::optional<RateFit> fit;
    std::string decay_method_used;
    std::string skipped_reason;
    bool agreement = false;
    std::string agreement_note;
    std::vector<std::pair<std::string, std::string>> meta;
};

// Runs the checkers, picks the theorem-implied rate family, runs the matching
// decay experiment and flags agreement between prediction and fit. Component
// errors are collected; the report is still emitted with statuses.
inline FullReport full_report(const OUModel& model, ReportParams params = {}) {
    FullReport out;
    out.meta.push_back({"seed", std::to_string(params.seed)});
    out.meta.push_back({"workers", std::to_string(params.workers)});
    out.meta.push_back({"alpha", std::to_string(params.alpha)});

    std::vector<ConditionRecord> records;
    records.push_back(check_log_moment(model.triplet.nu));
    records.push_back(check_abs_moment(model.triplet.nu, 1.0));
    if (std::abs(params.alpha - 1.0) > 1e-12)
        records.push_back(check_abs_moment(model.triplet.nu, params.alpha));
    records.push_back(check_small_jump_spread(model.triplet.nu));
    records.push_back(check_symbol_growth(model.triplet));

    // sweep epsilon; keep the most favourable verdict first for each name
    auto better = [](CheckStatus a, CheckStatus b) {
        auto rank = [](CheckStatus s) {
            return s == CheckStatus::pass ? 2 : (s == CheckStatus::inconclusive ? 1 : 0);
        };
        return rank(a) > rank(b);
    };
    ConditionRecord best_overlap, best_ratio;
    bool first = true;
    for (double eps : params.epsilon_sweep) {
        auto o = check_overlap_condition(model.triplet.nu, eps, params.rho);
        auto r = check_tv_ratio_condition(model.triplet.nu, eps);
        if (first || better(o.status, best_overlap.status)) best_overlap = o;
        if (first || better(r.status, best_ratio.status)) best_ratio = r;
        first = false;
    }
    records.push_back(best_overlap);
    records.push_back(best_ratio);

    out.conditions = classify(records, model.spectral, params.alpha);

    switch (out.conditions.classification) {
        case Classification::exp_ergodic:
        case Classification::exp_ergodic_alpha:
            out.expected_family = "exponential";
            break;
        case Classification::algebraic_rate:
            out.expected_family = "algebraic";
            break;
        default:
            out.expected_family = "none";
    }
    if (out.expected_family == "none") {
        out.skipped_reason = "conditions support no rate statement (classification: " +
                             std::string(classification_name(out.conditions.classification)) +
                             ")";
        return out;
    }

    Vec x0 = params.x0.size() == model.dim() ? params.x0 : Vec::Zero(model.dim());
    if (params.x0.size() != model.dim()) x0(0) = 2.0;

    LabOptions lopt = params.lab;
    lopt.n = params.n;
    lopt.workers = params.workers;
    lopt.seed = params.seed;

    // prefer the deterministic oracle; fall back to the coupling bound when
    // the law is not Fourier-invertible (e.g. compound Poisson)
    try {
        auto set = tv_decay_vs_invariant(model, x0, params.t_grid, params.method, lopt);
        out.decay = set;
        const DecayTable* fit_on = set.find("oracle");
        if (!fit_on) fit_on = set.find("mc-coupling");
        out.decay_method_used = fit_on->method;
        RateFamily fam = out.expected_family == "exponential" ? RateFamily::exponential
                                                              : RateFamily::algebraic;
        out.fit = fit_decay(*fit_on, fam);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::resolution || e.kind() == ErrorKind::precondition) {
            try {
                auto set = tv_decay_vs_invariant(model, x0, params.t_grid,
                                                 TvMethod::monte_carlo, lopt);
                out.decay = set;
                out.decay_method_used = "mc-coupling";
                RateFamily fam = out.expected_family == "exponential"
                                     ? RateFamily::exponential
                                     : RateFamily::algebraic;
                out.fit = fit_decay(*set.find("mc-coupling"), fam);
            } catch (const Error& e2) {
                out.skipped_reason = e2.what();
            }
        } else {
            out.skipped_reason = e.what();
        }
    }

    if (out.fit) {
        const auto& f = *out.fit;
        bool rate_positive = f.rate > 0 && f.rate - f.rate_ci_half > 0;
        bool good = f.r2 >= 0.95 && rate_positive;
        out.agreement = good;
        out.agreement_note = good ? "fitted rate confirms the predicted family"
                                  : "fit does not confirm the predicted family";
    } else if (out.skipped_reason.empty()) {
        out.skipped_reason = "fit unavailable";
    }
    return out;
}

}  // namespace levyou

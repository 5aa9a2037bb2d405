#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "levyou/common.hpp"
#include "levyou/gridded.hpp"
#include "levyou/model.hpp"

namespace levyou {

// Numeric checkers for the hypotheses the ergodicity statements impose on the
// jump measure, the symbol and the drift spectrum, plus the final
// classification. Asymptotic conditions are decided on the last decades of a
// log grid with explicit margins; statuses come with error bars so that
// doubling every bar can only soften a verdict to inconclusive, never flip it.

enum class CheckStatus { pass, fail, inconclusive };

inline const char* check_status_name(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

struct ConditionRecord {
    std::string name;
    CheckStatus status = CheckStatus::inconclusive;
    double value = 0.0;
    double error_bar = 0.0;
    std::vector<std::pair<std::string, double>> params;
    std::string note;
};

enum class Classification {
    none,
    invariant_measure_exists,
    ergodic,
    algebraic_rate,
    exp_ergodic,
    exp_ergodic_alpha,
};

inline const char* classification_name(Classification c) {
    switch (c) {
        case Classification::none: return "none";
        case Classification::invariant_measure_exists: return "invariant-measure-exists";
        case Classification::ergodic: return "ergodic";
        case Classification::algebraic_rate: return "algebraic-rate";
        case Classification::exp_ergodic: return "exp-ergodic";
        case Classification::exp_ergodic_alpha: return "exp-ergodic-alpha";
    }
    return "?";
}

struct ConditionReport {
    std::vector<ConditionRecord> records;
    Classification classification = Classification::none;
    std::string justification;
};

struct CheckOptions {
    double bar_scale = 1.0;   // robustness knob: scales every error bar
    int grid_cells = 16384;   // 1-d lattice resolution for measure algebra
    double grid_radius = 0.0; // 0 = automatic
    double margin = 1e-3;     // positive margin for liminf-type conditions
    double xi_max = 1e4;
    int n_dirs = 8;           // directions for d >= 2
    int n_radii = 8;          // radii per overlap sweep
};

namespace detail {

// pass iff value - bar > threshold, fail iff value + bar < threshold;
// doubling the bar can only turn a verdict inconclusive.
inline CheckStatus decide_above(double value, double bar, double threshold) {
    if (value - bar > threshold) return CheckStatus::pass;
    if (value + bar < threshold) return CheckStatus::fail;
    return CheckStatus::inconclusive;
}

inline GridSpec condition_grid(const TruncatedMeasure& trunc, const CheckOptions& opt, int dim) {
    double r = opt.grid_radius;
    if (r <= 0) {
        r = std::min(trunc.sampler_tail_cut, 64.0);
        for (const auto& a : trunc.restricted_atoms) r = std::max(r, a.z.norm() + 1.0);
        r = std::max(r, 4.0);
    }
    if (dim == 1) return GridSpec::make_1d(-r, r, opt.grid_cells);
    GridSpec g;
    g.dim = 2;
    g.lo = Vec::Constant(2, -std::min(r, 16.0));
    g.hi = Vec::Constant(2, std::min(r, 16.0));
    g.cells = {512, 512};
    return g;
}

inline std::vector<Vec> shift_directions(int d, int n_dirs) {
    std::vector<Vec> dirs;
    if (d == 1) {
        dirs.push_back(Vec::Constant(1, 1.0));
        dirs.push_back(Vec::Constant(1, -1.0));
    } else {
        for (int i = 0; i < n_dirs; ++i) {
            double th = 2.0 * std::numbers::pi * i / n_dirs;
            Vec v(2);
            v << std::cos(th), std::sin(th);
            dirs.push_back(v);
        }
    }
    return dirs;
}

// Growth-based verdict for "bounded, non-diverging" ratio sequences: compares
// the last sample against the first of the trailing window.
inline CheckStatus bounded_growth_verdict(const std::vector<double>& r,
                                          const std::vector<double>& bars, double& growth_out) {
    if (r.size() < 2) return CheckStatus::inconclusive;
    std::size_t w = std::min<std::size_t>(4, r.size());
    std::size_t i0 = r.size() - w;
    double first = r[i0], last = r.back();
    double b0 = bars[i0], b1 = bars.back();
    if (first <= 0 && last <= 0) {
        growth_out = 1.0;
        return CheckStatus::pass;  // identically zero sequence is trivially bounded
    }
    double lo = std::max(first - b0, 1e-300);
    double hi = first + b0;
    double growth_hi = (last + b1) / lo;
    double growth_lo = (last - b1) / hi;
    growth_out = last / std::max(first, 1e-300);
    if (growth_hi < 1.5) return CheckStatus::pass;
    if (growth_lo > 3.0) return CheckStatus::fail;
    return CheckStatus::inconclusive;
}

}  // namespace detail

// --- tail moment checkers ---------------------------------------------------

inline ConditionRecord check_log_moment(const LevyMeasure& nu, CheckOptions opt = {}) {
    ConditionRecord rec;
    rec.name = "log-moment";
    try {
        auto m = moment_integral(nu, MomentKind::log1p);
        rec.status = m.finite ? CheckStatus::pass : CheckStatus::fail;
        rec.value = m.finite ? m.value : kInf;
        rec.params.push_back({"shells", double(m.evidence.shells_used)});
        rec.params.push_back({"last_shell_ratio", m.evidence.last_ratio});
    } catch (const Error& e) {
        rec.status = CheckStatus::inconclusive;
        rec.note = e.what();
    }
    (void)opt;
    return rec;
}

inline ConditionRecord check_abs_moment(const LevyMeasure& nu, double alpha,
                                        CheckOptions opt = {}) {
    ConditionRecord rec;
    rec.name = "abs-moment";
    rec.params.push_back({"alpha", alpha});
    try {
        auto m = moment_integral(nu, MomentKind::power, alpha);
        rec.status = m.finite ? CheckStatus::pass : CheckStatus::fail;
        rec.value = m.finite ? m.value : kInf;
        rec.params.push_back({"shells", double(m.evidence.shells_used)});
        rec.params.push_back({"last_shell_ratio", m.evidence.last_ratio});
    } catch (const Error& e) {
        rec.status = CheckStatus::inconclusive;
        rec.note = e.what();
    }
    (void)opt;
    return rec;
}

// --- overlap condition: inf_{|x| <= rho} (nu_eps ^ delta_x * nu_eps)(R^d) > 0

inline ConditionRecord check_overlap_condition(const LevyMeasure& nu, double eps, double rho,
                                               CheckOptions opt = {}) {
    ConditionRecord rec;
    rec.name = "overlap-condition";
    rec.params.push_back({"epsilon", eps});
    rec.params.push_back({"rho", rho});
    if (!(eps > 0 && rho > 0)) fail(ErrorKind::invalid_input, "overlap check needs eps, rho > 0");
    try {
        TruncatedMeasure trunc = truncate(nu, eps);
        GridSpec spec = detail::condition_grid(trunc, opt, nu.dim);
        GriddedMeasure g = discretize(trunc, spec);
        double h = g.spacing().maxCoeff();
        auto dirs = detail::shift_directions(nu.dim, opt.n_dirs);
        double min_overlap = kInf;
        int evaluated = 0;
        for (int k = 1; k <= opt.n_radii; ++k) {
            double r = rho * k / opt.n_radii;
            if (r < 2.0 * h) continue;  // below lattice resolution
            for (const auto& dir : dirs) {
                min_overlap = std::min(min_overlap, overlap_mass(g, r * dir));
                ++evaluated;
            }
        }
        rec.params.push_back({"radii_evaluated", double(evaluated)});
        rec.params.push_back({"grid_leak", g.leak()});
        rec.params.push_back({"grid_h", h});
        if (evaluated == 0) {
            rec.status = CheckStatus::inconclusive;
            rec.note = "no shift radius resolvable on the lattice";
            return rec;
        }
        double bar = opt.bar_scale * (2.0 * g.leak() + 1e-12 * trunc.total_mass);
        rec.value = min_overlap;
        rec.error_bar = bar;
        rec.status = detail::decide_above(min_overlap, bar, 0.0);
        // an exactly-zero overlap is a fail even with bars
        if (min_overlap <= 1e-14 * trunc.total_mass) rec.status = CheckStatus::fail;
    } catch (const Error& e) {
        rec.status = CheckStatus::inconclusive;
        rec.note = e.what();
    }
    return rec;
}

// --- total-variation ratio condition ----------------------------------------

namespace detail {

struct TvRatioEvidence {
    std::vector<double> rho;
    std::vector<double> ratio;
    std::vector<double> bars;
    CheckStatus status = CheckStatus::inconclusive;
    double growth = 0.0;
    double limit_estimate = 0.0;
};

inline TvRatioEvidence tv_ratio_on_grid(const GriddedMeasure& g, double total_mass, int dim,
                                        const CheckOptions& opt) {
    TvRatioEvidence ev;
    double h = g.spacing().maxCoeff();
    auto dirs = shift_directions(dim, opt.n_dirs);
    for (int k = 2; k <= 40; ++k) {
        double r = std::pow(2.0, -double(k));
        if (r < 4.0 * h) break;
        double worst = 0.0;
        for (const auto& dir : dirs) worst = std::max(worst, tv_norm(g, shift(g, r * dir)));
        ev.rho.push_back(r);
        ev.ratio.push_back(worst / r);
        ev.bars.push_back(opt.bar_scale * (2.0 * g.leak() / r + 1e-12 * total_mass / r));
    }
    if (ev.ratio.size() < 2) {
        ev.status = CheckStatus::inconclusive;
        return ev;
    }
    ev.status = bounded_growth_verdict(ev.ratio, ev.bars, ev.growth);
    ev.limit_estimate = ev.ratio.back();
    return ev;
}

}  // namespace detail

inline ConditionRecord check_tv_ratio_condition(const LevyMeasure& nu, double eps,
                                                CheckOptions opt = {}) {
    ConditionRecord rec;
    rec.name = "tv-ratio-condition";
    rec.params.push_back({"epsilon", eps});
    if (!(eps > 0)) fail(ErrorKind::invalid_input, "tv-ratio check needs eps > 0");
    try {
        TruncatedMeasure trunc = truncate(nu, eps);
        GridSpec spec = detail::condition_grid(trunc, opt, nu.dim);
        GriddedMeasure g = discretize(trunc, spec);
        auto ev = detail::tv_ratio_on_grid(g, trunc.total_mass, nu.dim, opt);
        rec.status = ev.status;
        rec.value = ev.limit_estimate;
        if (!ev.bars.empty()) rec.error_bar = ev.bars.back();
        rec.params.push_back({"growth", ev.growth});
        rec.params.push_back({"n_scales", double(ev.ratio.size())});
        rec.params.push_back({"smallest_rho", ev.rho.empty() ? 0.0 : ev.rho.back()});
        rec.params.push_back({"grid_leak", g.leak()});
        if (ev.ratio.size() < 2) rec.note = "grid resolution insufficient for the requested scales";
    } catch (const Error& e) {
        rec.status = CheckStatus::inconclusive;
        rec.note = e.what();
    }
    return rec;
}

// --- small-jump spread (quadratic mass vs log) -------------------------------

namespace detail {

// Decision rule shared by the liminf-type checkers: the ratio sequence over
// the final decades must clear a positive margin AND must not be decaying
// toward zero (trend of the last decade against the previous one).
inline CheckStatus liminf_verdict(double min_last_two, double trend_last, double trend_prev,
                                  double bar, double margin) {
    double trend_lo = (trend_last - bar) / std::max(trend_prev + bar, 1e-300);
    double trend_hi = (trend_last + bar) / std::max(trend_prev - bar, 1e-300);
    CheckStatus level = decide_above(min_last_two, bar, margin);
    if (level == CheckStatus::fail) return CheckStatus::fail;
    if (trend_hi < 0.9) return CheckStatus::fail;        // decaying beyond bars
    if (level == CheckStatus::pass && trend_lo >= 0.9) return CheckStatus::pass;
    return CheckStatus::inconclusive;
}

}  // namespace detail

inline ConditionRecord check_small_jump_spread(const LevyMeasure& nu, double xi_max = 1e4,
                                               int n_dirs = 8, CheckOptions opt = {}) {
    ConditionRecord rec;
    rec.name = "small-jump-spread";
    rec.params.push_back({"xi_max", xi_max});
    if (!(xi_max >= 1e3)) fail(ErrorKind::invalid_input, "spread check needs xi_max >= 1e3");
    try {
        auto dirs = detail::shift_directions(nu.dim, n_dirs);
        if (nu.dim == 1) dirs.resize(1);  // the quadratic form is even in xi
        double min_last_two = kInf;
        double trend_last = 0.0, trend_prev = 0.0;
        const int per_decade = 4;
        int decades = int(std::ceil(std::log10(xi_max / 10.0)));
        double last_two_cut = xi_max / 100.0;
        for (int i = 0; i <= decades * per_decade; ++i) {
            double r = 10.0 * std::pow(10.0, double(i) / per_decade);
            if (r > xi_max * 1.0001) break;
            double worst = kInf;
            for (const auto& dir : dirs) {
                double num = small_ball_quadratic(nu, r * dir);
                worst = std::min(worst, num / std::log1p(r));
            }
            if (r >= last_two_cut) min_last_two = std::min(min_last_two, worst);
            if (std::abs(r - xi_max / 10.0) < 1e-6 * xi_max) trend_prev = worst;
            if (std::abs(r - xi_max) < 1e-3 * xi_max) trend_last = worst;
        }
        rec.value = min_last_two;
        rec.error_bar = opt.bar_scale * 1e-9 * std::max(1.0, min_last_two);
        rec.status = detail::liminf_verdict(min_last_two, trend_last, trend_prev,
                                            rec.error_bar, opt.margin);
        rec.params.push_back({"margin", opt.margin});
        rec.params.push_back({"trend", trend_last / std::max(trend_prev, 1e-300)});
    } catch (const Error& e) {
        rec.status = CheckStatus::inconclusive;
        rec.note = e.what();
    }
    return rec;
}

// --- symbol growth (Re Phi vs log) -------------------------------------------

inline ConditionRecord check_symbol_growth(const LevyTriplet& triplet, double xi_max = 1e4,
                                           int n_dirs = 8, CheckOptions opt = {}) {
    ConditionRecord rec;
    rec.name = "symbol-growth";
    rec.params.push_back({"xi_max", xi_max});
    try {
        auto dirs = detail::shift_directions(triplet.nu.dim, n_dirs);
        if (triplet.nu.dim == 1) dirs.resize(2);
        double min_last_two = kInf;
        double err_acc = 0.0;
        double trend_last = 0.0, trend_prev = 0.0;
        const int per_decade = 4;
        int decades = int(std::ceil(std::log10(xi_max / 10.0)));
        double last_two_cut = xi_max / 100.0;
        for (int i = 0; i <= decades * per_decade; ++i) {
            double r = 10.0 * std::pow(10.0, double(i) / per_decade);
            if (r > xi_max * 1.0001) break;
            double worst = kInf;
            for (const auto& dir : dirs) {
                double err = 0.0;
                double re = symbol(triplet, r * dir, &err).real();
                worst = std::min(worst, re / std::log1p(r));
                if (r >= last_two_cut) err_acc = std::max(err_acc, err / std::log1p(r));
            }
            if (r >= last_two_cut) min_last_two = std::min(min_last_two, worst);
            if (std::abs(r - xi_max / 10.0) < 1e-6 * xi_max) trend_prev = worst;
            if (std::abs(r - xi_max) < 1e-3 * xi_max) trend_last = worst;
        }
        rec.value = min_last_two;
        rec.error_bar = opt.bar_scale * (err_acc + 1e-9 * std::max(1.0, min_last_two));
        rec.status = detail::liminf_verdict(min_last_two, trend_last, trend_prev,
                                            rec.error_bar, opt.margin);
        rec.params.push_back({"margin", opt.margin});
        rec.params.push_back({"trend", trend_last / std::max(trend_prev, 1e-300)});
        if (rec.status == CheckStatus::pass) {
            // time horizon used by the large-time oracle argument
            rec.params.push_back(
                {"t0_estimate", (2.0 * triplet.nu.dim + 2.0) / std::max(min_last_two, 1e-300)});
        }
    } catch (const Error& e) {
        rec.status = CheckStatus::inconclusive;
        rec.note = e.what();
    }
    return rec;
}

// --- density sufficient criteria ---------------------------------------------

struct DensitySufficientResult {
    ConditionRecord reciprocal_integrable;  // supports the overlap condition
    ConditionRecord shift_l1_ratio;         // supports the tv-ratio condition
};

// For a lower-bound density rho with nu(dz) >= rho(z) dz: (a) integrability of
// 1/rho near z0 and (b) boundedness of sup_{|x|<=r} int |rho(z) - rho(x+z)| / r.
inline DensitySufficientResult check_density_sufficient(
    const std::function<double(const Vec&)>& rho, int dim, const Vec& z0, double eps,
    CheckOptions opt = {}) {
    DensitySufficientResult out;
    auto& a = out.reciprocal_integrable;
    a.name = "density-reciprocal-integrable";
    a.params.push_back({"epsilon", eps});
    try {
        // dyadic shells toward z0 of 1/rho
        auto shell = [&](int k) {
            double hi = eps * std::pow(2.0, -double(k));
            double lo = hi / 2.0;
            double acc = 0.0;
            auto dirs = detail::shift_directions(dim, opt.n_dirs);
            if (dim == 1) {
                for (double sgn : {1.0, -1.0}) {
                    acc += integrate(
                               [&](double r) {
                                   Vec z = z0 + Vec::Constant(1, sgn * r);
                                   double v = rho(z);
                                   return v > 0 ? 1.0 / v : kInf;
                               },
                               lo, hi)
                               .value;
                }
            } else {
                for (const auto& dir : dirs)
                    acc += integrate(
                               [&](double r) {
                                   double v = rho(Vec(z0 + r * dir));
                                   return (v > 0 ? 1.0 / v : kInf) * r * 2.0 *
                                          std::numbers::pi / double(opt.n_dirs);
                               },
                               lo, hi)
                               .value;
            }
            if (!std::isfinite(acc)) fail(ErrorKind::numeric, "reciprocal density not evaluable");
            return acc;
        };
        auto s = sum_shells(shell, 48);
        a.status = s.finite ? CheckStatus::pass : CheckStatus::fail;
        a.value = s.finite ? s.value : kInf;
        a.params.push_back({"shells", double(s.shells_used)});
    } catch (const Error& e) {
        // a vanishing density makes 1/rho non-integrable
        a.status = CheckStatus::fail;
        a.note = e.what();
    }

    auto& b = out.shift_l1_ratio;
    b.name = "density-shift-l1-ratio";
    b.params.push_back({"epsilon", eps});
    try {
        std::vector<double> ratios, bars;
        auto dirs = detail::shift_directions(dim, opt.n_dirs);
        for (int k = 2; k <= 10; ++k) {
            double r = std::pow(2.0, -double(k));
            double worst = 0.0;
            for (const auto& dir : dirs) {
                Vec x = r * dir;
                double l1 = 0.0;
                if (dim == 1) {
                    l1 = integrate_lenient(
                             [&](double u) {
                                 Vec z = z0 + Vec::Constant(1, u);
                                 return std::abs(rho(z) - rho(Vec(z + x)));
                             },
                             -eps, eps)
                             .value;
                } else {
                    for (const auto& adir : dirs)
                        l1 += integrate_lenient(
                                  [&](double rr) {
                                      Vec z = z0 + rr * adir;
                                      return std::abs(rho(z) - rho(Vec(z + x))) * rr * 2.0 *
                                             std::numbers::pi / double(opt.n_dirs);
                                  },
                                  0.0, eps)
                                  .value;
                }
                worst = std::max(worst, l1 / r);
            }
            ratios.push_back(worst);
            bars.push_back(opt.bar_scale * 1e-6 * std::max(1.0, worst));
        }
        double growth = 0.0;
        b.status = detail::bounded_growth_verdict(ratios, bars, growth);
        b.value = ratios.back();
        b.error_bar = bars.back();
        b.params.push_back({"growth", growth});
    } catch (const Error& e) {
        b.status = CheckStatus::inconclusive;
        b.note = e.what();
    }
    return out;
}

// --- minorant criterion --------------------------------------------------------

// Verifies nu >= mu cellwise on mu's grid, then runs the tv-ratio machinery on
// the minorant itself.
inline ConditionRecord check_minorant(const LevyMeasure& nu, const GriddedMeasure& minorant,
                                      CheckOptions opt = {}) {
    ConditionRecord rec;
    rec.name = "minorant";
    try {
        // discretize nu on the same grid; the origin cell of an infinite
        // measure dominates any finite mass automatically
        double h = minorant.spacing().minCoeff();
        bool nu_infinite = !detail::measure_is_finite(nu);
        TruncatedMeasure trunc = truncate(nu, nu_infinite ? h / 4.0 : 1.0);
        GridSpec spec;
        spec.dim = minorant.dim();
        spec.lo = minorant.origin();
        spec.hi = minorant.origin() +
                  minorant.spacing().cwiseProduct(
                      Vec::Map(std::array<double, 2>{double(minorant.cells()[0]),
                                                     double(minorant.cells()[1])}.data(),
                               minorant.dim()));
        spec.cells = minorant.cells();
        GriddedMeasure nu_grid = discretize(trunc, spec);
        Vec origin_pt = Vec::Zero(minorant.dim());
        std::size_t origin_cell = nu_grid.locate(origin_pt);
        double worst_violation = 0.0;
        std::size_t worst_cell = GriddedMeasure::npos;
        for (std::size_t i = 0; i < nu_grid.size(); ++i) {
            if (nu_infinite && i == origin_cell) continue;
            double tol = 1e-9 * (1.0 + minorant.weight(i)) * opt.bar_scale + 1e-14;
            double gap = minorant.weight(i) - nu_grid.weight(i);
            if (gap > tol && gap > worst_violation) {
                worst_violation = gap;
                worst_cell = i;
            }
        }
        if (worst_cell != GriddedMeasure::npos) {
            rec.status = CheckStatus::fail;
            rec.value = worst_violation;
            Vec c = nu_grid.cell_center(worst_cell);
            rec.note = "domination fails near z = " + std::to_string(c(0)) +
                       (minorant.dim() == 2 ? "," + std::to_string(c(1)) : "");
            return rec;
        }
        auto ev = detail::tv_ratio_on_grid(minorant, minorant.total_mass(), minorant.dim(), opt);
        rec.status = ev.status;
        rec.value = ev.limit_estimate;
        if (!ev.bars.empty()) rec.error_bar = ev.bars.back();
        rec.params.push_back({"growth", ev.growth});
    } catch (const Error& e) {
        rec.status = CheckStatus::inconclusive;
        rec.note = e.what();
    }
    return rec;
}

// --- classification -------------------------------------------------------------

namespace detail {

inline const ConditionRecord* find_record(const std::vector<ConditionRecord>& recs,
                                          const std::string& name,
                                          std::optional<double> alpha = std::nullopt) {
    for (const auto& r : recs) {
        if (r.name != name) continue;
        if (alpha) {
            bool match = false;
            for (const auto& [k, v] : r.params)
                if (k == "alpha" && std::abs(v - *alpha) < 1e-12) match = true;
            if (!match) continue;
        }
        return &r;
    }
    return nullptr;
}

inline bool passed(const ConditionRecord* r) { return r && r->status == CheckStatus::pass; }

}  // namespace detail

// Strongest classification supported by the per-condition verdicts. The
// tv-ratio condition forces the overlap condition (a bounded shift ratio makes
// the shifted measure overlap at small radii); contradictory evidence there is
// an internal-consistency error.
inline ConditionReport classify(std::vector<ConditionRecord> records,
                                const SpectralProfile& spectral, double alpha) {
    ConditionReport out;
    const auto* log_m = detail::find_record(records, "log-moment");
    const auto* overlap = detail::find_record(records, "overlap-condition");
    const auto* tv_ratio = detail::find_record(records, "tv-ratio-condition");
    const auto* minorant = detail::find_record(records, "minorant");
    const auto* abs1 = detail::find_record(records, "abs-moment", 1.0);
    const auto* abs_a = detail::find_record(records, "abs-moment", alpha);
    const auto* spread = detail::find_record(records, "small-jump-spread");
    const auto* growth = detail::find_record(records, "symbol-growth");

    bool shift_route = detail::passed(tv_ratio) || detail::passed(minorant);
    if (shift_route && overlap) {
        if (overlap->status == CheckStatus::fail && overlap->value - overlap->error_bar > 0.0)
            fail(ErrorKind::internal_consistency,
                 "tv-ratio passes but the overlap condition fails beyond error bars");
        if (overlap->status == CheckStatus::fail) {
            // contradiction within bars: soften rather than flip
            for (auto& r : records)
                if (r.name == "overlap-condition") {
                    r.status = CheckStatus::inconclusive;
                    r.note = "softened: implied by the passing tv-ratio condition";
                }
        }
    }
    bool overlap_ok = detail::passed(overlap);
    if (!overlap_ok && shift_route) {
        overlap_ok = true;  // implication from the bounded shift ratio
        if (!overlap) {
            ConditionRecord implied;
            implied.name = "overlap-condition";
            implied.status = CheckStatus::pass;
            implied.note = "implied by the tv-ratio condition";
            records.push_back(implied);
        }
    }

    Classification cls = Classification::none;
    std::string why = "drift spectrum not strictly stable or log-moment fails";
    if (spectral.strictly_stable && detail::passed(log_m)) {
        cls = Classification::invariant_measure_exists;
        why = "stable drift spectrum + finite log tail moment";
        if (overlap_ok) {
            cls = Classification::ergodic;
            why = "overlap of the truncated measure under small shifts";
            if (detail::passed(abs1)) {
                cls = Classification::algebraic_rate;
                why = "overlap condition + finite |z| tail moment";
            }
        }
        if (shift_route && detail::passed(abs1)) {
            cls = Classification::exp_ergodic;
            why = detail::passed(tv_ratio)
                      ? "bounded shift tv-ratio + finite |z| tail moment"
                      : "minorant with bounded shift tv-ratio + finite |z| tail moment";
        }
        if ((detail::passed(spread) || detail::passed(growth)) && detail::passed(abs_a)) {
            cls = Classification::exp_ergodic_alpha;
            why = (detail::passed(spread) ? std::string("small-jump spread")
                                          : std::string("symbol growth")) +
                  " + finite |z|^alpha tail moment (alpha = " + std::to_string(alpha) + ")";
        }
    }
    out.records = std::move(records);
    out.classification = cls;
    out.justification = why;
    return out;
}

}  // namespace levyou

// Command-line front end: model configuration parsing, experiment
// orchestration, deterministic seeding, CSV/JSON emission.
//
// Exit codes: 0 success, 1 error, 2 condition/classification failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "levyou/levyou.hpp"

namespace {

using namespace levyou;

struct CommonArgs {
    std::string config_path;
    std::int64_t seed_override = -1;
    int workers_override = 0;
};

int default_workers() {
    if (const char* env = std::getenv("LEVYOU_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return w;
    }
    return 1;
}

Vec parse_vec_arg(const std::string& s, int dim, const std::string& name) {
    Vec v(dim);
    std::stringstream ss(s);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
        if (i >= dim) fail(ErrorKind::configuration, name + ": too many components");
        v(i++) = std::stod(tok);
    }
    if (i != dim) fail(ErrorKind::configuration, name + ": expected " + std::to_string(dim) +
                                                     " comma-separated numbers");
    return v;
}

std::vector<double> parse_grid_arg(const std::string& s) {
    std::vector<double> g;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) g.push_back(std::stod(tok));
    if (g.empty()) fail(ErrorKind::configuration, "empty t-grid");
    return g;
}

void emit(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-") {
        std::cout << content;
    } else {
        write_file(out, content);
    }
}

struct Session {
    ModelConfig cfg;
    OUModel model;
    std::uint64_t seed;
    int workers;
};

Session open_session(const CommonArgs& args) {
    ModelConfig cfg = load_model_config(args.config_path);
    OUModel model = cfg.build_model();
    std::uint64_t seed = args.seed_override >= 0 ? std::uint64_t(args.seed_override)
                                                 : cfg.defaults.seed;
    int workers = args.workers_override > 0 ? args.workers_override
                                            : (cfg.defaults.workers > 0 ? cfg.defaults.workers
                                                                        : default_workers());
    return {std::move(cfg), std::move(model), seed, workers};
}

int cmd_check(const CommonArgs& args, double eps_flag, double rho_flag, double alpha_flag,
              const std::string& out) {
    Session s = open_session(args);
    double rho = rho_flag > 0 ? rho_flag : s.cfg.defaults.rho;
    double alpha = alpha_flag > 0 ? alpha_flag : s.cfg.defaults.alpha;
    std::vector<double> sweep{0.5, 1.0, 2.0};
    if (eps_flag > 0) sweep = {eps_flag};

    std::vector<ConditionRecord> records;
    records.push_back(check_log_moment(s.model.triplet.nu));
    records.push_back(check_abs_moment(s.model.triplet.nu, 1.0));
    if (std::abs(alpha - 1.0) > 1e-12)
        records.push_back(check_abs_moment(s.model.triplet.nu, alpha));
    records.push_back(check_small_jump_spread(s.model.triplet.nu));
    records.push_back(check_symbol_growth(s.model.triplet));
    for (double eps : sweep) {
        records.push_back(check_overlap_condition(s.model.triplet.nu, eps, rho));
        records.push_back(check_tv_ratio_condition(s.model.triplet.nu, eps));
    }
    auto report = classify(records, s.model.spectral, alpha);
    auto j = to_json(report);
    j["model"] = {{"dimension", s.model.dim()},
                  {"strictly_stable", s.model.spectral.strictly_stable},
                  {"weakly_stable_semisimple", s.model.spectral.weakly_stable_semisimple},
                  {"envelope_c", s.model.spectral.envelope_c},
                  {"envelope_lambda", s.model.spectral.envelope_lambda}};
    emit(out, j.dump(2) + "\n");
    return report.classification == Classification::none ? 2 : 0;
}

int cmd_simulate(const CommonArgs& args, const std::string& x_arg, double t, std::size_t n,
                 double eps_flag, const std::string& out) {
    Session s = open_session(args);
    Vec x = parse_vec_arg(x_arg, s.model.dim(), "--x");
    SmallJumpScheme scheme;
    scheme.epsilon = eps_flag > 0 ? eps_flag : s.cfg.defaults.epsilon;
    EndpointSimulator sim(s.model, scheme);
    auto prep = sim.prepare(t);
    std::vector<Vec> draws(n);
    RandomStream root(s.seed);
    run_workers<int>(n, s.workers, root,
                     [&](int, RandomStream& rng, std::size_t i0, std::size_t i1) {
                         for (std::size_t i = i0; i < i1; ++i) draws[i] = sim.draw(prep, x, rng);
                         return 0;
                     });
    std::ostringstream os;
    write_samples_csv(os, draws);
    emit(out, os.str());
    return 0;
}

int cmd_tv_decay(const CommonArgs& args, const std::string& x_arg, const std::string& y_arg,
                 bool vs_invariant, const std::string& method_arg, const std::string& grid_arg,
                 std::size_t n_flag, const std::string& out_prefix) {
    Session s = open_session(args);
    Vec x = parse_vec_arg(x_arg, s.model.dim(), "--x");
    std::vector<double> grid =
        grid_arg.empty() ? s.cfg.defaults.t_grid : parse_grid_arg(grid_arg);
    TvMethod method = TvMethod::oracle;
    if (method_arg == "mc") method = TvMethod::monte_carlo;
    else if (method_arg == "both") method = TvMethod::both;
    else if (method_arg != "oracle") fail(ErrorKind::configuration, "--method: oracle|mc|both");

    LabOptions lopt;
    lopt.n = n_flag > 0 ? n_flag : s.cfg.defaults.n;
    lopt.workers = s.workers;
    lopt.seed = s.seed;
    lopt.epsilon = s.cfg.defaults.epsilon;

    DecaySet set;
    bool same_start = false;
    if (vs_invariant) {
        set = tv_decay_vs_invariant(s.model, x, grid, method, lopt);
    } else {
        Vec y = parse_vec_arg(y_arg, s.model.dim(), "--y");
        same_start = (x - y).norm() == 0.0;
        set = tv_decay_two_points(s.model, x, y, grid, method, lopt);
    }

    std::ostringstream os;
    write_decay_csv(os, set);
    emit(out_prefix.empty() ? "" : out_prefix + "_decay.csv", os.str());

    nlohmann::json fit_json;
    const DecayTable* fit_on = set.find("oracle");
    if (!fit_on) fit_on = set.find("mc-coupling");
    if (same_start) {
        fit_json["skipped"] = "starting points coincide; tv is identically zero";
    } else {
        try {
            fit_json = to_json(fit_decay(*fit_on, RateFamily::exponential));
            fit_json["fitted_on"] = fit_on->method;
        } catch (const Error& e) {
            fit_json["skipped"] = e.what();
        }
    }
    emit(out_prefix.empty() ? "" : out_prefix + "_fit.json", fit_json.dump(2) + "\n");
    return 0;
}

int cmd_coupling(const CommonArgs& args, const std::string& x_arg, const std::string& y_arg,
                 double eps_flag, const std::string& grid_arg, std::size_t n_flag,
                 const std::string& out) {
    Session s = open_session(args);
    Vec x = parse_vec_arg(x_arg, s.model.dim(), "--x");
    Vec y = parse_vec_arg(y_arg, s.model.dim(), "--y");
    std::vector<double> grid =
        grid_arg.empty() ? s.cfg.defaults.t_grid : parse_grid_arg(grid_arg);
    double eps = eps_flag > 0 ? eps_flag : s.cfg.defaults.epsilon;
    std::size_t n = n_flag > 0 ? n_flag : s.cfg.defaults.n;

    CouplingEngine engine(s.model, eps);
    RandomStream root(s.seed);
    std::vector<CouplingRow> rows;
    std::size_t ti = 0;
    for (double t : grid) {
        auto prep = engine.prepare(t);
        struct Acc {
            std::size_t coupled = 0, zero = 0;
        };
        auto parts = run_workers<Acc>(n, s.workers, root.split(ti++),
                                      [&](int, RandomStream& rng, std::size_t i0, std::size_t i1) {
                                          Acc a;
                                          for (std::size_t i = i0; i < i1; ++i) {
                                              auto ce = engine.sample_pair(prep, x, y, rng);
                                              if (ce.coupled) ++a.coupled;
                                              if (ce.n_jumps == 0) ++a.zero;
                                          }
                                          return a;
                                      });
        std::size_t coupled = 0, zero = 0;
        for (const auto& a : parts) {
            coupled += a.coupled;
            zero += a.zero;
        }
        double pc = double(coupled) / double(n);
        double p0 = double(zero) / double(n);
        rows.push_back({t, pc, p0, std::min(2.0, 2.0 * (1.0 - pc)),
                        2.0 * detail::binom_3sigma(1.0 - pc, n),
                        std::exp(-engine.rate() * t)});
    }
    std::ostringstream os;
    write_coupling_csv(os, rows);
    emit(out, os.str());
    return 0;
}

int cmd_invariant(const CommonArgs& args, std::size_t n_flag, double tail_tol_flag,
                  const std::string& out_prefix) {
    Session s = open_session(args);
    double tail_tol = tail_tol_flag > 0 ? tail_tol_flag : s.cfg.defaults.tail_tol;
    std::size_t n = n_flag > 0 ? n_flag : s.cfg.defaults.n;
    InvariantSampler inv(s.model, tail_tol);
    std::vector<Vec> draws(n);
    RandomStream root(s.seed);
    run_workers<int>(n, s.workers, root,
                     [&](int, RandomStream& rng, std::size_t i0, std::size_t i1) {
                         for (std::size_t i = i0; i < i1; ++i) draws[i] = inv.draw(rng);
                         return 0;
                     });
    std::ostringstream os;
    write_samples_csv(os, draws);
    emit(out_prefix.empty() ? "" : out_prefix + "_samples.csv", os.str());

    nlohmann::json j;
    j["horizon"] = inv.horizon();
    j["n"] = n;
    if (s.model.dim() == 1) {
        try {
            auto dens = stationary_density_by_fft(s.model);
            std::vector<double> xs(n);
            for (std::size_t i = 0; i < n; ++i) xs[i] = draws[i](0);
            j["ks_distance"] = ks_distance(std::move(xs), dens);
            j["density_err_bar"] = dens.err_bar;
        } catch (const Error& e) {
            j["ks_skipped"] = e.what();
        }
    } else {
        j["ks_skipped"] = "stationary Fourier oracle restricted to d = 1";
    }
    emit(out_prefix.empty() ? "" : out_prefix + "_ks.json", j.dump(2) + "\n");
    return 0;
}

int cmd_report(const CommonArgs& args, const std::string& out_dir) {
    Session s = open_session(args);
    ReportParams params;
    params.rho = s.cfg.defaults.rho;
    params.alpha = s.cfg.defaults.alpha;
    params.t_grid = s.cfg.defaults.t_grid;
    params.n = s.cfg.defaults.n;
    params.workers = s.workers;
    params.seed = s.seed;
    FullReport rep = full_report(s.model, params);

    std::filesystem::create_directories(out_dir);
    auto j = to_json(rep);
    write_file(out_dir + "/report.json", j.dump(2) + "\n");
    if (rep.decay) {
        std::ostringstream os;
        write_decay_csv(os, *rep.decay);
        write_file(out_dir + "/decay.csv", os.str());
    }
    if (rep.fit) write_file(out_dir + "/fit.json", to_json(*rep.fit).dump(2) + "\n");

    if (rep.conditions.classification == Classification::none) return 2;
    if (rep.decay && rep.fit && !rep.agreement) return 2;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Levy-driven Ornstein-Uhlenbeck toolkit"};
    app.require_subcommand(1);

    CommonArgs common;
    app.add_option("--config", common.config_path, "model configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--seed", common.seed_override, "master seed override");
    app.add_option("--workers", common.workers_override,
                   "worker threads (default: config, else LEVYOU_WORKERS, else 1)");

    auto* check = app.add_subcommand("check", "run the condition checkers and classify");
    double eps_flag = 0, rho_flag = 0, alpha_flag = 0;
    std::string out;
    check->add_option("--epsilon", eps_flag, "truncation level (default: sweep 0.5, 1, 2)");
    check->add_option("--rho", rho_flag, "overlap shift radius");
    check->add_option("--alpha", alpha_flag, "tail moment exponent in (0, 1]");
    check->add_option("--out", out, "output file (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "draw endpoint samples");
    std::string x_arg, y_arg, grid_arg, method_arg = "oracle", out_prefix;
    double t_flag = 1.0, tail_tol_flag = 0;
    std::size_t n_flag = 0;
    bool vs_invariant = false;
    simulate->add_option("--x", x_arg, "starting point (comma separated)")->required();
    simulate->add_option("--t", t_flag, "horizon")->required();
    simulate->add_option("--n", n_flag, "number of draws")->required();
    simulate->add_option("--epsilon", eps_flag, "small-jump truncation level");
    simulate->add_option("--out", out, "output CSV (default stdout)");

    auto* tv = app.add_subcommand("tv-decay", "total-variation decay experiment");
    tv->add_option("--x", x_arg, "starting point")->required();
    tv->add_option("--y", y_arg, "second starting point (two-point mode)");
    tv->add_flag("--vs-invariant", vs_invariant, "measure against the invariant law");
    tv->add_option("--method", method_arg, "oracle|mc|both");
    tv->add_option("--t-grid", grid_arg, "comma-separated horizons");
    tv->add_option("--n", n_flag, "Monte Carlo sample size");
    tv->add_option("--out", out_prefix, "output prefix (writes <prefix>_decay.csv, _fit.json)");

    auto* coupling = app.add_subcommand("coupling", "coupling frequency experiment");
    coupling->add_option("--x", x_arg, "first start")->required();
    coupling->add_option("--y", y_arg, "second start")->required();
    coupling->add_option("--epsilon", eps_flag, "truncation level");
    coupling->add_option("--t-grid", grid_arg, "comma-separated horizons");
    coupling->add_option("--n", n_flag, "pairs per horizon");
    coupling->add_option("--out", out, "output CSV (default stdout)");

    auto* invariant = app.add_subcommand("invariant", "stationary sampling + KS diagnostic");
    invariant->add_option("--n", n_flag, "number of draws");
    invariant->add_option("--tail-tol", tail_tol_flag, "horizon tail tolerance");
    invariant->add_option("--out", out_prefix, "output prefix");

    auto* report = app.add_subcommand("report", "full condition + decay report bundle");
    std::string out_dir = "report_out";
    report->add_option("--out-dir", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return cmd_check(common, eps_flag, rho_flag, alpha_flag, out);
        if (simulate->parsed())
            return cmd_simulate(common, x_arg, t_flag, n_flag, eps_flag, out);
        if (tv->parsed()) {
            if (!vs_invariant && y_arg.empty())
                fail(ErrorKind::configuration, "tv-decay needs --y or --vs-invariant");
            return cmd_tv_decay(common, x_arg, y_arg, vs_invariant, method_arg, grid_arg,
                                n_flag, out_prefix);
        }
        if (coupling->parsed())
            return cmd_coupling(common, x_arg, y_arg, eps_flag, grid_arg, n_flag, out);
        if (invariant->parsed()) return cmd_invariant(common, n_flag, tail_tol_flag, out_prefix);
        if (report->parsed()) return cmd_report(common, out_dir);
    } catch (const levyou::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

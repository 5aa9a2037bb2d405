#include <catch2/catch_amalgamated.hpp>

#include "levyou/levy.hpp"
#include "ks_util.hpp"

using namespace levyou;

namespace {

double gaussian_rho(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Reference quadrature for kappa(alpha) = int_R (1 - cos u) |u|^{-1-alpha} du,
// independent of the implementation's oscillatory machinery: singular head by
// tanh_sinh, exact power tail minus an alternating cosine remainder.
double kappa_reference(double alpha) {
    const double head_end = 40.0;
    auto head = integrate_singular(
        [&](double u) { return (1.0 - std::cos(u)) * std::pow(u, -1.0 - alpha); }, 1e-14,
        head_end);
    double tail_power = std::pow(head_end, -alpha) / alpha;
    double tail_cos = 0.0;
    double lo = head_end;
    for (int k = 0; k < 4000; ++k) {
        double hi = lo + std::numbers::pi;
        double piece = gauss15(
            [&](double u) { return std::cos(u) * std::pow(u, -1.0 - alpha); }, lo, hi);
        tail_cos += piece;
        if (std::abs(piece) < 1e-15) break;
        lo = hi;
    }
    return 2.0 * (head.value + tail_power - tail_cos);
}

}  // namespace

TEST_CASE("symbol: Brownian, atom and Hermitian structure") {
    // pure Gaussian: Phi(xi) = xi^2 / 2
    auto t_gauss = LevyTriplet::make(Mat::Identity(1, 1), Vec::Zero(1),
                                     LevyMeasure::none_measure(1));
    Vec xi(1);
    xi << 2.0;
    REQUIRE(symbol(t_gauss, xi).real() == Catch::Approx(2.0).epsilon(1e-14));
    REQUIRE(symbol(t_gauss, Vec::Zero(1)) == Cplx(0.0, 0.0));

    // single atom at z = 1 (on the unit sphere, no compensation): 1 - e^{i xi}
    auto atom = LevyMeasure::atoms(1, {{Vec::Constant(1, 1.0), 1.0}});
    auto t_atom = LevyTriplet::make(Mat::Zero(1, 1), Vec::Zero(1), atom);
    for (double x : {0.3, 1.0, 2.7}) {
        xi << x;
        Cplx got = symbol(t_atom, xi);
        Cplx expect = 1.0 - std::exp(Cplx(0.0, x));
        REQUIRE(std::abs(got - expect) < 1e-13);
    }
}

TEST_CASE("symbol: stable density matches the reference quadrature") {
    for (double alpha : {0.7, 1.0, 1.5}) {
        double kap = kappa_reference(alpha);
        auto nu = LevyMeasure::stable(1, alpha, 1.0);
        auto trip = LevyTriplet::make(Mat::Zero(1, 1), Vec::Zero(1), nu);
        for (double x : {0.5, 1.0, 3.0, 10.0}) {
            Vec xi(1);
            xi << x;
            double got = symbol(trip, xi).real();
            double expect = kap * std::pow(x, alpha);
            REQUIRE(got == Catch::Approx(expect).epsilon(1e-6));
            REQUIRE(std::abs(symbol(trip, xi).imag()) < 1e-12);
        }
    }
}

TEST_CASE("symbol properties: positivity, Hermitian symmetry") {
    // asymmetric measure: shifted Gaussian density plus an off-center atom
    auto dens = LevyMeasure::density_1d(
        [](double z) { return gaussian_rho(z - 0.7); }, false);
    auto atom = LevyMeasure::atoms(1, {{Vec::Constant(1, 0.4), 0.3}});
    auto nu = LevyMeasure::sum({dens, atom});
    Vec b(1);
    b << 0.2;
    auto trip = LevyTriplet::make(0.5 * Mat::Identity(1, 1), b, nu);
    RandomStream rng(7);
    for (int i = 0; i < 25; ++i) {
        Vec xi(1);
        xi << rng.uniform(-20.0, 20.0);
        Cplx plus = symbol(trip, xi);
        Cplx minus = symbol(trip, Vec(-xi));
        REQUIRE(plus.real() >= 0.0);
        REQUIRE(std::abs(minus - std::conj(plus)) <
                1e-12 * std::max(1.0, std::abs(plus)));
    }
    REQUIRE(std::abs(symbol(trip, Vec::Zero(1))) == 0.0);
}

TEST_CASE("symbol cache agrees with the direct path") {
    auto nu = LevyMeasure::density_1d(gaussian_rho, true);
    auto trip = LevyTriplet::make(Mat::Zero(1, 1), Vec::Zero(1), nu);
    detail::warm_symbol_cache(nu, 1e-3, 1e3);
    for (double x : {0.01, 0.37, 2.0, 55.0, 400.0}) {
        Vec xi(1);
        xi << x;
        double direct = symbol(trip, xi).real();
        double fast = symbol_fast(trip, xi).real();
        REQUIRE(fast == Catch::Approx(direct).epsilon(1e-6));
    }
}

TEST_CASE("small-jump lower bound") {
    // support outside the ball of radius 1/|xi|: bound vanishes
    auto ring = LevyMeasure::density_1d(
        [](double z) { return (std::abs(z) >= 1.0 && std::abs(z) <= 2.0) ? 0.5 : 0.0; }, true,
        2.0, 1.0);
    Vec xi(1);
    xi << 3.0;
    REQUIRE(re_symbol_small_jump_bound(ring, xi) == 0.0);

    // stable: (cos 1)/2 * 2 c |xi|^alpha / (2 - alpha)
    for (double alpha : {0.8, 1.0, 1.4}) {
        double c = 0.7;
        auto nu = LevyMeasure::stable(1, alpha, c);
        for (double x : {2.0, 8.0, 64.0}) {
            xi << x;
            double expect = 0.5 * std::cos(1.0) * 2.0 * c * std::pow(x, alpha) / (2.0 - alpha);
            REQUIRE(re_symbol_small_jump_bound(nu, xi) ==
                    Catch::Approx(expect).epsilon(1e-6));
        }
    }

    // the bound is dominated by the pure-jump real symbol
    auto nu = LevyMeasure::stable(1, 1.2, 0.5);
    auto trip = LevyTriplet::make(Mat::Zero(1, 1), Vec::Zero(1), nu);
    RandomStream rng(11);
    for (int i = 0; i < 100; ++i) {
        xi << std::exp(rng.uniform(std::log(0.1), std::log(100.0)));
        REQUIRE(re_symbol_small_jump_bound(nu, xi) <=
                symbol(trip, xi).real() * (1.0 + 1e-9));
    }
}

TEST_CASE("truncate: atoms, stable mass, monotonicity") {
    auto atoms = LevyMeasure::atoms(
        1, {{Vec::Constant(1, 0.5), 0.25}, {Vec::Constant(1, 2.0), 1.5}});
    for (double eps : {0.1, 1.0, 5.0}) {
        auto t = truncate(atoms, eps);
        REQUIRE(t.total_mass == Catch::Approx(1.75).epsilon(1e-14));
        REQUIRE(t.restricted_atoms.size() == 2);
    }

    double c = 0.8, alpha = 1.3;
    auto stable = LevyMeasure::stable(1, alpha, c);
    auto t1 = truncate(stable, 1.0);
    REQUIRE(t1.total_mass == Catch::Approx(2.0 * c / alpha).epsilon(1e-12));
    double prev = kInf;
    for (double eps : {0.25, 0.5, 1.0, 2.0}) {
        auto t = truncate(stable, eps);
        REQUIRE(t.total_mass <= prev * (1.0 + 1e-12));
        prev = t.total_mass;
    }
}

TEST_CASE("moment integrals: analytic values and divergence") {
    auto atom = LevyMeasure::atoms(1, {{Vec::Constant(1, 2.0), 1.0}});
    auto lm = moment_integral(atom, MomentKind::log1p);
    REQUIRE(lm.finite);
    REQUIRE(lm.value == Catch::Approx(std::log(3.0)).epsilon(1e-14));

    double c = 0.6;
    auto cauchy = LevyMeasure::stable(1, 1.0, c);
    auto half = moment_integral(cauchy, MomentKind::power, 0.5);
    REQUIRE(half.finite);
    REQUIRE(half.value == Catch::Approx(4.0 * c).epsilon(1e-8));

    auto heavy = LevyMeasure::stable(1, 0.5, 1.0);
    REQUIRE_FALSE(moment_integral(heavy, MomentKind::power, 1.0).finite);

    // 1/(|z| log^2 |z|) beyond e: finite mass but log-divergent log-moment
    auto log_tail = LevyMeasure::density_1d(
        [](double z) {
            double a = std::abs(z);
            if (a < std::exp(1.0)) return 0.0;
            double l = std::log(a);
            return 1.0 / (a * l * l);
        },
        true, kInf, std::exp(1.0));
    REQUIRE(validate_levy_measure(log_tail));
    REQUIRE_FALSE(moment_integral(log_tail, MomentKind::log1p).finite);

    auto sq = moment_integral(cauchy, MomentKind::square_small);
    REQUIRE(sq.finite);
    REQUIRE(sq.value == Catch::Approx(2.0 * c / 1.0).epsilon(1e-8));  // 2c/(2-alpha), alpha=1
}

TEST_CASE("sample_increment: pure drift is exact") {
    Vec b(1);
    b << 3.0;
    auto trip = LevyTriplet::make(Mat::Zero(1, 1), b, LevyMeasure::none_measure(1));
    RandomStream rng(3);
    Vec inc = sample_increment(trip, 2.0, {}, rng);
    REQUIRE(inc(0) == 6.0);
}

TEST_CASE("sample_increment: compound Poisson jump counts") {
    // unit atoms make the increment value equal to the jump count
    auto nu = LevyMeasure::atoms(1, {{Vec::Constant(1, 1.0), 1.5}});
    auto trip = LevyTriplet::make(Mat::Zero(1, 1), Vec::Zero(1), nu);
    IncrementSampler sampler(trip, {});
    RandomStream rng(17);
    const double h = 0.8;
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sampler.draw(h, rng)(0) - h * sampler.effective_drift()(0);
    double mean = sum / n;
    double lambda = h * 1.5;
    double sigma = std::sqrt(lambda / n);
    REQUIRE(std::abs(mean - lambda) <= 3.0 * sigma);
}

TEST_CASE("sample_increment: stable self-similarity (two-sample KS)") {
    auto nu = LevyMeasure::stable(1, 1.3, 0.4);
    auto trip = LevyTriplet::make(Mat::Zero(1, 1), Vec::Zero(1), nu);
    IncrementSampler sampler(trip, {});
    RandomStream rng(23);
    const int n = 10000;
    const double h = 0.2, alpha = 1.3;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) a[i] = sampler.draw(h, rng)(0) / std::pow(h, 1.0 / alpha);
    for (int i = 0; i < n; ++i) b[i] = sampler.draw(1.0, rng)(0);
    double d = two_sample_ks(a, b);
    double crit = 1.628 * std::sqrt(2.0 / n);  // level 0.01
    REQUIRE(d < crit);
}

TEST_CASE("sample_increment: empirical characteristic function matches the symbol") {
    // drift + Gaussian + atom jumps, all parts exact
    auto nu = LevyMeasure::atoms(1, {{Vec::Constant(1, 0.8), 0.6}, {Vec::Constant(1, -1.3), 0.4}});
    Vec b(1);
    b << 0.3;
    auto trip = LevyTriplet::make(0.4 * Mat::Identity(1, 1), b, nu);
    IncrementSampler sampler(trip, {});
    RandomStream rng(31);
    const int n = 100000;
    const double h = 0.7;
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i) draws[i] = sampler.draw(h, rng)(0);
    for (int k = 1; k <= 10; ++k) {
        double x = -2.0 + 0.4 * k;
        if (x == 0.0) continue;
        Cplx ecf = 0.0;
        for (double v : draws) ecf += std::exp(Cplx(0.0, x * v));
        ecf /= double(n);
        Vec xi(1);
        xi << x;
        Cplx expect = std::exp(-h * symbol(trip, xi));
        REQUIRE(std::abs(ecf - expect) <= 4.0 / std::sqrt(double(n)));
    }
}

TEST_CASE("sample_increment: Gaussian matching keeps the ecf close for stable") {
    auto nu = LevyMeasure::stable(1, 1.1, 0.3);
    auto trip = LevyTriplet::make(Mat::Zero(1, 1), Vec::Zero(1), nu);
    SmallJumpScheme cp_scheme;
    cp_scheme.exact_stable = false;  // force truncation + matching
    cp_scheme.epsilon = 0.05;
    IncrementSampler sampler(trip, cp_scheme);
    RandomStream rng(37);
    const int n = 100000;
    const double h = 0.5;
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i) draws[i] = sampler.draw(h, rng)(0);
    for (double x : {0.5, 1.0, 2.0}) {
        Cplx ecf = 0.0;
        for (double v : draws) ecf += std::exp(Cplx(0.0, x * v));
        ecf /= double(n);
        Vec xi(1);
        xi << x;
        Cplx expect = std::exp(-h * symbol(trip, xi));
        REQUIRE(std::abs(ecf - expect) <= 4.0 / std::sqrt(double(n)));
    }
}

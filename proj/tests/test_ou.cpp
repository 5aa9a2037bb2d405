#include <catch2/catch_amalgamated.hpp>

#include "levyou/ou.hpp"
#include "ks_util.hpp"
#include "levyou/spectral.hpp"

using namespace levyou;

namespace {

double gaussian_rho(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

OUModel gaussian_ou() {
    Mat a(1, 1);
    a << -1.0;
    return OUModel::build(a, LevyTriplet::make(Mat::Identity(1, 1), Vec::Zero(1),
                                               LevyMeasure::none_measure(1)));
}

OUModel cp_gauss_ou() {
    Mat a(1, 1);
    a << -1.0;
    return OUModel::build(a, LevyTriplet::make(Mat::Zero(1, 1), Vec::Zero(1),
                                               LevyMeasure::density_1d(gaussian_rho, true)));
}

OUModel cauchy_ou() {
    Mat a(1, 1);
    a << -1.0;
    return OUModel::build(
        a, LevyTriplet::make(Mat::Zero(1, 1), Vec::Zero(1),
                             LevyMeasure::stable(1, 1.0, 1.0 / std::numbers::pi)));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_against_cdf(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    double worst = 0.0;
    std::size_t n = xs.size();
    for (std::size_t i = 0; i < n; ++i) {
        double c = cdf(xs[i]);
        worst = std::max(worst, std::abs(c - double(i) / n));
        worst = std::max(worst, std::abs(c - double(i + 1) / n));
    }
    return worst;
}

}  // namespace

TEST_CASE("simulate_endpoint: deterministic flow with zero noise") {
    Mat a(2, 2);
    a << -1.0, 0.3, -0.2, -0.7;
    auto m = OUModel::build(a, LevyTriplet::make(Mat::Zero(2, 2), Vec::Zero(2),
                                                 LevyMeasure::none_measure(2)));
    RandomStream rng(1);
    Vec x(2);
    x << 1.0, -2.0;
    Vec got = simulate_endpoint(m, x, 1.7, {}, rng);
    REQUIRE((got - matrix_exponential(a, 1.7) * x).norm() == 0.0);
}

TEST_CASE("simulate_endpoint: Gaussian OU law (KS)") {
    auto m = gaussian_ou();
    EndpointSimulator sim(m);
    auto prep = sim.prepare(1.0);
    RandomStream rng(2);
    Vec x = Vec::Constant(1, 1.5);
    const int n = 10000;
    std::vector<double> xs(n);
    for (auto& v : xs) v = sim.draw(prep, x, rng)(0);
    double mu = std::exp(-1.0) * 1.5, sd = std::sqrt((1.0 - std::exp(-2.0)) / 2.0);
    double ks = ks_against_cdf(xs, [&](double u) { return normal_cdf((u - mu) / sd); });
    REQUIRE(ks < 1.628 / std::sqrt(double(n)));
}

TEST_CASE("synchronous noise: endpoint difference is the deterministic flow") {
    for (auto scheme : {SmallJumpScheme{}, SmallJumpScheme{0.25, false, false}}) {
        auto m = cp_gauss_ou();
        EndpointSimulator sim(m, scheme);
        auto prep = sim.prepare(2.0);
        Vec x = Vec::Constant(1, 3.0), y = Vec::Constant(1, -1.0);
        for (std::uint64_t seed : {5u, 6u, 7u}) {
            RandomStream r1(seed), r2(seed);
            Vec xa = sim.draw(prep, x, r1);
            Vec xb = sim.draw(prep, y, r2);
            Vec expect = matrix_exponential(m.A, 2.0) * (x - y);
            REQUIRE((xa - xb - expect).norm() < 1e-12);
        }
    }
}

TEST_CASE("simulate_convolution: jump path reproduces the endpoint") {
    auto m = cp_gauss_ou();
    EndpointSimulator sim(m);
    auto prep = sim.prepare(3.0);
    RandomStream rng(11);
    CompoundPoissonPath path;
    Vec endpoint = sim.draw(prep, Vec::Zero(1), rng, &path);
    Vec rebuilt = Vec::Zero(1);
    for (std::size_t k = 0; k < path.times.size(); ++k)
        rebuilt += matrix_exponential(m.A, 3.0 - path.times[k]) * path.marks[k];
    REQUIRE((endpoint - rebuilt).norm() < 1e-12);
    REQUIRE(std::is_sorted(path.times.begin(), path.times.end()));
}

TEST_CASE("endpoint empirical characteristic function matches the oracle") {
    auto m = cp_gauss_ou();
    EndpointSimulator sim(m);
    double t = 1.0;
    auto prep = sim.prepare(t);
    AccumulatedSymbol acc(m, t);
    RandomStream rng(13);
    Vec x = Vec::Constant(1, 1.0);
    const int n = 100000;
    std::vector<double> draws(n);
    for (auto& v : draws) v = sim.draw(prep, x, rng)(0);
    double center = std::exp(-t) * 1.0;
    for (int k = 1; k <= 10; ++k) {
        double xi = -2.5 + 0.5 * k;
        if (xi == 0.0) continue;
        Cplx ecf = 0.0;
        for (double v : draws) ecf += std::exp(Cplx(0.0, xi * v));
        ecf /= double(n);
        Cplx expect =
            std::exp(Cplx(0.0, xi * center) - acc.eval(Vec::Constant(1, xi)));
        REQUIRE(std::abs(ecf - expect) <= 4.0 / std::sqrt(double(n)));
    }
}

TEST_CASE("invariant sampler: degenerate and Gaussian laws") {
    Mat a(1, 1);
    a << -1.0;
    auto zero = OUModel::build(a, LevyTriplet::make(Mat::Zero(1, 1), Vec::Zero(1),
                                                    LevyMeasure::none_measure(1)));
    RandomStream rng(17);
    REQUIRE(sample_invariant(zero, rng).norm() == 0.0);

    auto m = gaussian_ou();
    InvariantSampler inv(m);
    const int n = 10000;
    std::vector<double> xs(n);
    for (auto& v : xs) v = inv.draw(rng)(0);
    double sd = std::sqrt(0.5);
    double ks = ks_against_cdf(xs, [&](double u) { return normal_cdf(u / sd); });
    REQUIRE(ks < 1.628 / std::sqrt(double(n)));
}

TEST_CASE("invariant sampler rejects unstable drift") {
    Mat a(1, 1);
    a << 0.2;
    auto bad = OUModel::build(a, LevyTriplet::make(Mat::Zero(1, 1), Vec::Zero(1),
                                                   LevyMeasure::none_measure(1)));
    RandomStream rng(19);
    REQUIRE_THROWS_AS(sample_invariant(bad, rng), Error);
}

TEST_CASE("coupled pair: identical starts couple exactly when jumps arrive") {
    auto m = cp_gauss_ou();
    CouplingEngine engine(m, 1.0);
    auto prep = engine.prepare(1.0);
    RandomStream rng(23);
    Vec x = Vec::Constant(1, 0.7);
    const int n = 20000;
    int coupled = 0, zero = 0;
    for (int i = 0; i < n; ++i) {
        auto ce = engine.sample_pair(prep, x, x, rng);
        if (ce.coupled) ++coupled;
        if (ce.n_jumps == 0) ++zero;
        REQUIRE(ce.coupled == (ce.n_jumps >= 1));
    }
    double p0 = std::exp(-1.0);
    double sigma = std::sqrt(p0 * (1.0 - p0) / n);
    REQUIRE(std::abs(double(zero) / n - p0) <= 3.0 * sigma);
}

TEST_CASE("coupled pair: single-atom marks never couple distinct starts") {
    Mat a(1, 1);
    a << -1.0;
    auto m = OUModel::build(
        a, LevyTriplet::make(Mat::Zero(1, 1), Vec::Zero(1),
                             LevyMeasure::atoms(1, {{Vec::Constant(1, 1.0), 1.0}})));
    CouplingEngine engine(m, 1.0);
    auto prep = engine.prepare(2.0);
    RandomStream rng(29);
    Vec x = Vec::Constant(1, 1.0), y = Vec::Zero(1);
    for (int i = 0; i < 2000; ++i) REQUIRE_FALSE(engine.sample_pair(prep, x, y, rng).coupled);
}

TEST_CASE("coupled pair: coupled means bitwise equal") {
    auto m = cp_gauss_ou();
    CouplingEngine engine(m, 1.0);
    auto prep = engine.prepare(2.0);
    RandomStream rng(31);
    Vec x = Vec::Constant(1, 1.0), y = Vec::Constant(1, -0.5);
    int seen = 0;
    for (int i = 0; i < 5000; ++i) {
        auto ce = engine.sample_pair(prep, x, y, rng);
        if (ce.coupled) {
            ++seen;
            REQUIRE(ce.x(0) == ce.x_prime(0));
        }
    }
    REQUIRE(seen > 1000);
}

TEST_CASE("coupled pair: marginal law matches independent endpoint draws (KS)") {
    auto m = cp_gauss_ou();
    CouplingEngine engine(m, 1.0);
    EndpointSimulator sim(m);
    double t = 1.0;
    auto cprep = engine.prepare(t);
    auto sprep = sim.prepare(t);
    RandomStream rng(37);
    Vec x = Vec::Constant(1, 1.0), y = Vec::Constant(1, -0.5);
    const int n = 10000;
    std::vector<double> via_pair(n), direct(n);
    for (int i = 0; i < n; ++i) via_pair[i] = engine.sample_pair(cprep, x, y, rng).x(0);
    for (int i = 0; i < n; ++i) direct[i] = sim.draw(sprep, x, rng)(0);
    double d = two_sample_ks(via_pair, direct);
    REQUIRE(d < 1.628 * std::sqrt(2.0 / n));
}

TEST_CASE("coupling bound dominates the oracle tv") {
    auto m = cp_gauss_ou();
    CouplingEngine engine(m, 1.0);
    double t = 1.0;
    auto prep = engine.prepare(t);
    RandomStream rng(41);
    Vec x = Vec::Constant(1, 1.0), y = Vec::Zero(1);
    const int n = 20000;
    int nc = 0;
    for (int i = 0; i < n; ++i)
        if (!engine.sample_pair(prep, x, y, rng).coupled) ++nc;
    double p = double(nc) / n;
    double sigma = std::sqrt(p * (1.0 - p) / n);
    auto tv = tv_distance_oracle(m, t, x, y);
    REQUIRE(2.0 * (p + 3.0 * sigma) >= tv.value - tv.error);
}

TEST_CASE("uniform moment check: Gaussian plateau at 1/sqrt(pi)") {
    auto m = gaussian_ou();
    RandomStream root(43);
    auto table = uniform_moment_check(m, 1.0, {1.0, 2.0, 5.0, 10.0, 20.0}, 20000, root, 2);
    REQUIRE(table.plateau);
    const auto& last = table.rows.back();
    double expect = 1.0 / std::sqrt(std::numbers::pi);
    REQUIRE(std::abs(last.mean - expect) <= 3.0 * last.std_error);

    // half-normal mean at finite t: sigma_t sqrt(2/pi)
    const auto& first = table.rows.front();
    double s1 = std::sqrt((1.0 - std::exp(-2.0)) / 2.0);
    REQUIRE(std::abs(first.mean - s1 * std::sqrt(2.0 / std::numbers::pi)) <=
            3.0 * first.std_error);
}

TEST_CASE("uniform moment check: stable plateau and precondition") {
    Mat a(1, 1);
    a << -1.0;
    auto m = OUModel::build(a, LevyTriplet::make(Mat::Zero(1, 1), Vec::Zero(1),
                                                 LevyMeasure::stable(1, 1.2, 0.3)));
    RandomStream root(47);
    auto table = uniform_moment_check(m, 0.5, {1.0, 2.0, 5.0, 10.0, 20.0}, 20000, root, 2);
    REQUIRE(table.plateau);
    for (const auto& r : table.rows) REQUIRE(std::isfinite(r.mean));

    // alpha = 1 moment diverges for a Cauchy driver: precondition error
    auto cau = cauchy_ou();
    REQUIRE_THROWS_AS(uniform_moment_check(cau, 1.0, {1.0}, 10, root), Error);
}

TEST_CASE("zero-noise moment table is identically zero") {
    Mat a(1, 1);
    a << -1.0;
    auto m = OUModel::build(a, LevyTriplet::make(Mat::Zero(1, 1), Vec::Zero(1),
                                                 LevyMeasure::none_measure(1)));
    RandomStream root(53);
    auto table = uniform_moment_check(m, 1.0, {1.0, 2.0, 3.0}, 100, root);
    for (const auto& r : table.rows) REQUIRE(r.mean == 0.0);
}

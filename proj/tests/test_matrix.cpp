#include <catch2/catch_amalgamated.hpp>

#include "levyou/matrix.hpp"
#include "levyou/rng.hpp"

using namespace levyou;

TEST_CASE("matrix exponential basics") {
    Mat z = Mat::Zero(2, 2);
    REQUIRE((matrix_exponential(z, 5.0) - Mat::Identity(2, 2)).norm() == 0.0);

    Mat a(1, 1);
    a << -1.0;
    REQUIRE(matrix_exponential(a, 1.0)(0, 0) == Catch::Approx(std::exp(-1.0)).epsilon(1e-14));

    Mat rot(2, 2);
    rot << 0, -1, 1, 0;
    Mat e = matrix_exponential(rot, std::numbers::pi / 2.0);
    Mat expect(2, 2);
    expect << 0, -1, 1, 0;
    REQUIRE((e - expect).cwiseAbs().maxCoeff() < 1e-14);

    Mat bad(1, 1);
    bad << std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(matrix_exponential(bad, 1.0), Error);
}

TEST_CASE("matrix exponential semigroup law") {
    RandomStream rng(101);
    for (int rep = 0; rep < 10; ++rep) {
        int d = 1 + int(rng.uniform01() * 4);
        Mat a(d, d);
        for (int i = 0; i < d * d; ++i) a(i / d, i % d) = rng.normal();
        a *= 0.8;
        double t = rng.uniform(0.1, 3.0), s = rng.uniform(0.1, 3.0);
        if (operator_norm(a) * (s + t) > 10.0) continue;
        Mat lhs = matrix_exponential(a, t) * matrix_exponential(a, s);
        Mat rhs = matrix_exponential(a, t + s);
        REQUIRE((lhs - rhs).norm() / rhs.norm() < 1e-10);
    }
}

TEST_CASE("spectral profile: negative identity") {
    Mat a = -Mat::Identity(2, 2);
    auto p = spectral_profile(a);
    REQUIRE(p.strictly_stable);
    REQUIRE(p.weakly_stable_semisimple);
    REQUIRE(p.envelope_lambda == Catch::Approx(1.0).epsilon(1e-12));
    REQUIRE(p.envelope_c == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spectral profile: defective Jordan block") {
    Mat a(2, 2);
    a << 0, 1, 0, 0;
    auto p = spectral_profile(a);
    REQUIRE_FALSE(p.strictly_stable);
    REQUIRE_FALSE(p.weakly_stable_semisimple);
}

TEST_CASE("spectral profile: rotation generator is weakly stable") {
    Mat a(2, 2);
    a << 0, -1, 1, 0;
    auto p = spectral_profile(a);
    REQUIRE_FALSE(p.strictly_stable);
    REQUIRE(p.weakly_stable_semisimple);
    REQUIRE(p.envelope_lambda == 0.0);
    REQUIRE(p.envelope_c == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("spectral profile: non-normal envelope certified on a grid") {
    Mat a(2, 2);
    a << -1, 100, 0, -1;
    auto p = spectral_profile(a);
    REQUIRE(p.strictly_stable);
    REQUIRE(p.envelope_lambda == Catch::Approx(0.99).epsilon(1e-12));
    REQUIRE(p.envelope_c >= 1.0);

    // independent grid maximization oracle with the same lambda
    double c_oracle = 1.0;
    for (int i = 0; i < 200; ++i) {
        double t = std::exp(std::log(1e-3) + (std::log(1e3) - std::log(1e-3)) * i / 199.0);
        c_oracle = std::max(c_oracle,
                            operator_norm(matrix_exponential(a, t)) *
                                std::exp(p.envelope_lambda * t));
    }
    REQUIRE(p.envelope_c == Catch::Approx(c_oracle).epsilon(0.02));

    // the certified envelope actually holds on the grid
    for (int i = 0; i < 120; ++i) {
        double t = std::exp(std::log(1e-3) + (std::log(1e3) - std::log(1e-3)) * i / 119.0);
        REQUIRE(operator_norm(matrix_exponential(a, t)) <=
                p.envelope_c * std::exp(-p.envelope_lambda * t) * (1.0 + 1e-9));
    }
}

TEST_CASE("gaussian convolution covariance: trivial cases") {
    Mat a(1, 1), q(1, 1);
    a << -1.0;
    q << 1.0;
    REQUIRE(gaussian_convolution_covariance(a, q, 0.0).cwiseAbs().maxCoeff() == 0.0);
    for (double t : {0.25, 1.0, 4.0}) {
        double expect = (1.0 - std::exp(-2.0 * t)) / 2.0;
        REQUIRE(gaussian_convolution_covariance(a, q, t)(0, 0) ==
                Catch::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("gaussian convolution covariance vs quadrature oracle") {
    Mat a(2, 2);
    a << -1.2, 0.7, -0.4, -0.9;  // strictly stable
    Mat q = Mat::Identity(2, 2);
    double t = 1.7;
    Mat sigma = gaussian_convolution_covariance(a, q, t);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            auto integrand = [&](double s) {
                Mat e = matrix_exponential(a, s);
                return (e * q * e.transpose())(i, j);
            };
            auto ref = integrate(integrand, 0.0, t, QuadTol{1e-12, 1e-10});
            REQUIRE(std::abs(sigma(i, j) - ref.value) < 1e-8);
        }
}

TEST_CASE("gaussian convolution covariance: monotone and Lyapunov flow") {
    Mat a(2, 2);
    a << -0.5, 0.3, -0.2, -1.1;
    Mat q(2, 2);
    q << 1.0, 0.2, 0.2, 0.5;
    Mat prev = Mat::Zero(2, 2);
    for (double t : {0.2, 0.5, 1.0, 2.0, 4.0}) {
        Mat cur = gaussian_convolution_covariance(a, q, t);
        Eigen::SelfAdjointEigenSolver<Mat> es(cur - prev);
        REQUIRE(es.eigenvalues().minCoeff() >= -1e-10);
        prev = cur;
    }
    // d Sigma / dt = A Sigma + Sigma A^T + Q via central differences
    double t0 = 1.3, h = 1e-5;
    Mat d1 = (gaussian_convolution_covariance(a, q, t0 + h) -
              gaussian_convolution_covariance(a, q, t0 - h)) /
             (2.0 * h);
    Mat sig = gaussian_convolution_covariance(a, q, t0);
    Mat rhs = a * sig + sig * a.transpose() + q;
    REQUIRE((d1 - rhs).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("gaussian convolution covariance rejects bad inputs") {
    Mat a(2, 2);
    a << -1, 0, 0, -1;
    Mat asym(2, 2);
    asym << 1, 0.5, -0.5, 1;
    REQUIRE_THROWS_AS(gaussian_convolution_covariance(a, asym, 1.0), Error);
    Mat neg(2, 2);
    neg << -1, 0, 0, 1;
    REQUIRE_THROWS_AS(gaussian_convolution_covariance(a, neg, 1.0), Error);
    REQUIRE_THROWS_AS(gaussian_convolution_covariance(a, Mat::Identity(2, 2), -1.0), Error);
}

TEST_CASE("drift convolution matches the resolvent formula") {
    Mat a(2, 2);
    a << -1.0, 0.4, 0.0, -2.0;
    Vec b(2);
    b << 1.0, -0.5;
    double t = 2.3;
    Vec got = drift_convolution(a, b, t);
    Vec expect = a.inverse() * (matrix_exponential(a, t) - Mat::Identity(2, 2)) * b;
    REQUIRE((got - expect).norm() < 1e-12);
}

TEST_CASE("psd_sqrt factors positive semidefinite matrices") {
    Mat sigma(2, 2);
    sigma << 2.0, 1.0, 1.0, 0.5001;
    Mat l = psd_sqrt(sigma);
    REQUIRE((l * l.transpose() - sigma).cwiseAbs().maxCoeff() < 1e-12);
}

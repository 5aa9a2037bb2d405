#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <vector>

#include "levyou/common.hpp"
#include "levyou/quadrature.hpp"

namespace levyou {

// Matrix exponentials, spectral diagnostics and the decay envelope
// ||exp(tA)|| <= c exp(-lambda t) that every downstream bound leans on.

inline Mat matrix_exponential(const Mat& a, double t) {
    require_finite(a, "A");
    require_finite(t, "t");
    if (a.rows() != a.cols()) fail(ErrorKind::invalid_input, "A must be square");
    return (t * a).exp();
}

inline double operator_norm(const Mat& m) {
    if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

struct SpectralProfile {
    Eigen::VectorXcd eigenvalues;
    bool strictly_stable = false;
    bool weakly_stable_semisimple = false;
    double envelope_c = std::numeric_limits<double>::infinity();
    double envelope_lambda = 0.0;
};

namespace detail {

// Geometric multiplicity of lambda as numeric rank deficiency of (A - lambda I).
inline int geometric_multiplicity(const Mat& a, Cplx lambda, double tol) {
    int d = static_cast<int>(a.rows());
    Eigen::MatrixXcd shifted = a.cast<Cplx>() - lambda * Eigen::MatrixXcd::Identity(d, d);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(shifted);
    int rank = 0;
    for (int i = 0; i < d; ++i)
        if (svd.singularValues()(i) > tol) ++rank;
    return d - rank;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i) g[i] = std::exp(llo + (lhi - llo) * i / (n - 1));
    return g;
}

}  // namespace detail

// Eigenvalues, stability flags and a grid-certified envelope (c, lambda).
// Semisimplicity is decided by clustering eigenvalues at 1e-8*scale and
// comparing algebraic multiplicity with the rank deficiency of (A - lambda I).
inline SpectralProfile spectral_profile(const Mat& a) {
    require_finite(a, "A");
    if (a.rows() != a.cols()) fail(ErrorKind::invalid_input, "A must be square");
    const int d = static_cast<int>(a.rows());
    const double scale = std::max(operator_norm(a), 1.0);
    const double tol = 1e-8 * scale;

    Eigen::EigenSolver<Mat> es(a, false);
    if (es.info() != Eigen::Success)
        fail(ErrorKind::numeric, "eigenvalue solver did not converge");
    SpectralProfile out;
    out.eigenvalues = es.eigenvalues();

    double max_re = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) max_re = std::max(max_re, out.eigenvalues(i).real());

    out.strictly_stable = max_re < -tol;

    bool weakly = max_re <= tol;
    if (weakly) {
        // Cluster eigenvalues and check semisimplicity of the (numerically)
        // purely imaginary ones.
        std::vector<bool> used(d, false);
        for (int i = 0; i < d && weakly; ++i) {
            if (used[i]) continue;
            Cplx lam = out.eigenvalues(i);
            int alg = 0;
            for (int j = 0; j < d; ++j) {
                if (!used[j] && std::abs(out.eigenvalues(j) - lam) <= 10 * tol) {
                    used[j] = true;
                    ++alg;
                }
            }
            if (std::abs(lam.real()) <= tol) {
                int geo = detail::geometric_multiplicity(a, Cplx(0.0, lam.imag()), tol);
                if (geo < alg) weakly = false;
            }
        }
    }
    out.weakly_stable_semisimple = weakly;

    auto grid_max_norm = [&](double lambda) {
        auto value = [&](double t) {
            return operator_norm(matrix_exponential(a, t)) * std::exp(lambda * t);
        };
        auto grid = detail::log_grid(1e-3, 1e3, 80);
        double c = 1.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double v = value(grid[i]);
            if (v > c) {
                c = v;
                arg = i;
            }
        }
        // polish the interior maximum by golden-section search so the
        // certificate holds between grid nodes as well
        if (arg > 0 && arg + 1 < grid.size()) {
            double lo = grid[arg - 1], hi = grid[arg + 1];
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
            double f1 = value(x1), f2 = value(x2);
            for (int it = 0; it < 40; ++it) {
                if (f1 < f2) {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + gr * (hi - lo);
                    f2 = value(x2);
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - gr * (hi - lo);
                    f1 = value(x1);
                }
            }
            c = std::max(c, std::max(f1, f2));
        }
        return c;
    };

    if (out.strictly_stable) {
        bool normal = (a * a.transpose() - a.transpose() * a).cwiseAbs().maxCoeff() <=
                      1e-12 * scale * scale;
        if (normal) {
            // Normal A: ||exp(tA)|| = exp(t max Re), envelope exact.
            out.envelope_lambda = -max_re;
            out.envelope_c = 1.0;
        } else {
            out.envelope_lambda = 0.99 * (-max_re);
            out.envelope_c = grid_max_norm(out.envelope_lambda);
        }
    } else if (out.weakly_stable_semisimple) {
        out.envelope_lambda = 0.0;
        out.envelope_c = grid_max_norm(0.0);
    }
    return out;
}

namespace detail {

inline void require_symmetric_psd(const Mat& q, const char* name) {
    double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        fail(ErrorKind::invalid_input, std::string(name) + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(q);
    if (es.eigenvalues().minCoeff() < -1e-9 * scale)
        fail(ErrorKind::invalid_input, std::string(name) + " is not positive semi-definite");
}

}  // namespace detail

// Sigma_t = int_0^t exp(sA) Q exp(sA^T) ds via the block-exponential identity
// exp(t [[A, Q], [0, -A^T]]) = [[E11, E12], [0, E22]], Sigma_t = E12 E11^T.
inline Mat gaussian_convolution_covariance(const Mat& a, const Mat& q, double t) {
    require_finite(a, "A");
    require_finite(q, "Q");
    require_finite(t, "t");
    if (t < 0) fail(ErrorKind::invalid_input, "t must be nonnegative");
    const int d = static_cast<int>(a.rows());
    if (q.rows() != d || q.cols() != d) fail(ErrorKind::invalid_input, "Q dimension mismatch");
    detail::require_symmetric_psd(q, "Q");
    if (t == 0.0 || q.cwiseAbs().maxCoeff() == 0.0) return Mat::Zero(d, d);

    Mat block = Mat::Zero(2 * d, 2 * d);
    block.topLeftCorner(d, d) = a;
    block.topRightCorner(d, d) = q;
    block.bottomRightCorner(d, d) = -a.transpose();
    Mat e = (t * block).exp();
    Mat sigma = e.topRightCorner(d, d) * e.topLeftCorner(d, d).transpose();
    return 0.5 * (sigma + sigma.transpose());
}

// int_0^t exp(sA) b ds via the augmented (d+1)-dimensional exponential; valid
// for singular A as well.
inline Vec drift_convolution(const Mat& a, const Vec& b, double t) {
    require_finite(a, "A");
    require_finite(b, "b");
    const int d = static_cast<int>(a.rows());
    if (b.size() != d) fail(ErrorKind::invalid_input, "b dimension mismatch");
    if (t == 0.0 || b.cwiseAbs().maxCoeff() == 0.0) return Vec::Zero(d);
    Mat block = Mat::Zero(d + 1, d + 1);
    block.topLeftCorner(d, d) = a;
    block.topRightCorner(d, 1) = b;
    Mat e = (t * block).exp();
    return e.topRightCorner(d, 1);
}

// Factor L with L L^T = Sigma for symmetric PSD Sigma; eigenvalue clamping
// keeps semidefinite covariances usable.
inline Mat psd_sqrt(const Mat& sigma) {
    Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
    Vec lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

}  // namespace levyou

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace levyou {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Cplx = std::complex<double>;

// Error taxonomy shared by all modules. Each failure mode carries a kind so
// callers (and the CLI) can map it to an exit code without string matching.
enum class ErrorKind {
    invalid_input,
    numeric,
    coverage,
    domain,
    configuration,
    precondition,
    resolution,
    internal_consistency,
    fit_degenerate,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::invalid_input: return "invalid-input";
        case ErrorKind::numeric: return "numeric";
        case ErrorKind::coverage: return "coverage";
        case ErrorKind::domain: return "domain";
        case ErrorKind::configuration: return "configuration";
        case ErrorKind::precondition: return "precondition";
        case ErrorKind::resolution: return "resolution";
        case ErrorKind::internal_consistency: return "internal-consistency";
        case ErrorKind::fit_degenerate: return "fit-degenerate";
    }
    return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
    throw Error(kind, std::string(error_kind_name(kind)) + ": " + msg);
}

// A value plus a one-sided absolute error bound.
struct ValueWithError {
    double value = 0.0;
    double error = 0.0;
};

inline bool all_finite(const Mat& m) { return m.allFinite(); }
inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline void require_finite(const Mat& m, const char* name) {
    if (!m.allFinite()) fail(ErrorKind::invalid_input, std::string(name) + " has non-finite entries");
}
inline void require_finite(const Vec& v, const char* name) {
    if (!v.allFinite()) fail(ErrorKind::invalid_input, std::string(name) + " has non-finite entries");
}
inline void require_finite(double x, const char* name) {
    if (!std::isfinite(x)) fail(ErrorKind::invalid_input, std::string(name) + " is non-finite");
}

// Compensated accumulation; TV/meet identities are asserted at 1e-10 and plain
// summation over ~1e5 cells would eat most of that budget.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

}  // namespace levyou

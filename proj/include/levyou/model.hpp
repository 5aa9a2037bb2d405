#pragma once

#include "levyou/common.hpp"
#include "levyou/levy.hpp"
#include "levyou/matrix.hpp"

namespace levyou {

namespace detail {

inline double measure_tail_mass_ge1(const LevyMeasure& m) {
    switch (m.kind) {
        case MeasureKind::none:
            return 0.0;
        case MeasureKind::atoms: {
            double acc = 0.0;
            for (const auto& a : m.atom_list)
                if (a.z.norm() >= 1.0) acc += a.mass;
            return acc;
        }
        case MeasureKind::stable: {
            double s = sphere_surface(m.dim);
            return s * m.stable_scale / m.alpha0;
        }
        case MeasureKind::sum: {
            double acc = 0.0;
            for (const auto& c : m.components) acc += measure_tail_mass_ge1(c);
            return acc;
        }
        case MeasureKind::density: {
            auto sides = measure_sides(m);
            auto shell = [&](int k) {
                double lo = std::pow(2.0, double(k));
                if (lo >= m.support_radius) return 0.0;
                double hi = std::min(2.0 * lo, m.support_radius);
                double acc = 0.0;
                for (const auto& g : sides) acc += integrate(g, lo, hi).value;
                return acc;
            };
            auto s = sum_shells(shell, 64, 0.98, 12);
            if (!s.finite) fail(ErrorKind::invalid_input, "Levy measure has infinite tail mass");
            return s.value;
        }
    }
    return 0.0;
}

}  // namespace detail

// Drift matrix + Levy triplet + cached spectral data. Built once, shared by
// the simulation engine, the condition checkers and the Fourier oracle.
struct OUModel {
    Mat A;
    LevyTriplet triplet;
    SpectralProfile spectral;
    bool log_moment_finite = false;
    double log_moment_value = 0.0;
    double tail_mass = 0.0;  // nu({|z| >= 1})

    int dim() const { return static_cast<int>(A.rows()); }

    static OUModel build(Mat a, LevyTriplet t) {
        require_finite(a, "A");
        if (a.rows() != a.cols()) fail(ErrorKind::invalid_input, "A must be square");
        if (a.rows() != t.nu.dim) fail(ErrorKind::invalid_input, "A and triplet dimension mismatch");
        if (!validate_levy_measure(t.nu))
            fail(ErrorKind::invalid_input, "nu fails the (1 ^ |z|^2) integrability check");
        OUModel m{std::move(a), std::move(t), {}, false, 0.0, 0.0};
        m.spectral = spectral_profile(m.A);
        auto lm = moment_integral(m.triplet.nu, MomentKind::log1p);
        m.log_moment_finite = lm.finite;
        m.log_moment_value = lm.value;
        m.tail_mass = detail::measure_tail_mass_ge1(m.triplet.nu);
        return m;
    }
};

}  // namespace levyou

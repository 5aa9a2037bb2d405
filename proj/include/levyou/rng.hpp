#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "levyou/common.hpp"

namespace levyou {

// Deterministic, splittable random stream (xoshiro256++ seeded via splitmix64).
// Streams are value types; split(i) derives an independent child stream, which
// is how Monte Carlo workers get their own generators from one master seed.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed = 0) : key_(seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
    }

    RandomStream split(std::uint64_t index) const {
        return RandomStream(mix(key_, 0x9e3779b97f4a7c15ULL * (index + 1)));
    }

    std::uint64_t key() const { return key_; }

    std::uint64_t next_u64() {
        std::uint64_t* s = state_;
        std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe to pass to log.
    double uniform01_open() { return 1.0 - uniform01(); }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double exponential(double rate) {
        if (!(rate > 0)) fail(ErrorKind::invalid_input, "exponential rate must be positive");
        return -std::log(uniform01_open()) / rate;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01_open();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    Vec normal_vec(int d) {
        Vec z(d);
        for (int i = 0; i < d; ++i) z(i) = normal();
        return z;
    }

    // Uniform direction on the unit sphere in R^d.
    Vec sphere(int d) {
        if (d == 1) return Vec::Constant(1, uniform01() < 0.5 ? -1.0 : 1.0);
        Vec z = normal_vec(d);
        double n = z.norm();
        while (n < 1e-300) {
            z = normal_vec(d);
            n = z.norm();
        }
        return z / n;
    }

    // Standard symmetric alpha-stable variate, characteristic function
    // exp(-|xi|^alpha); Chambers-Mallows-Stuck.
    double stable_symmetric(double alpha) {
        if (!(alpha > 0.0 && alpha < 2.0))
            fail(ErrorKind::invalid_input, "stable index must lie in (0,2)");
        double u = std::numbers::pi * (uniform01() - 0.5);
        double w = exponential(1.0);
        if (std::abs(alpha - 1.0) < 1e-12) return std::tan(u);
        double t1 = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha);
        double t2 = std::pow(std::cos(u - alpha * u) / w, (1.0 - alpha) / alpha);
        return t1 * t2;
    }

    // Positive gamma-stable variate with Laplace transform exp(-u^gamma),
    // 0 < gamma < 1 (Kanter's representation). Used for subordination.
    double stable_positive(double gamma) {
        if (!(gamma > 0.0 && gamma < 1.0))
            fail(ErrorKind::invalid_input, "positive-stable index must lie in (0,1)");
        double theta = std::numbers::pi * uniform01_open();
        double w = exponential(1.0);
        double a = std::pow(std::sin(gamma * theta), gamma) *
                   std::pow(std::sin((1.0 - gamma) * theta), 1.0 - gamma) / std::sin(theta);
        // A(theta)^{1/(1-gamma)} / W^{gamma/(1-gamma)}, then power (1-gamma)/gamma.
        return std::pow(std::pow(a, 1.0 / (1.0 - gamma)) / w, (1.0 - gamma) / gamma);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
        std::uint64_t dummy = x;
        return splitmix64(dummy);
    }

    std::uint64_t state_[4];
    std::uint64_t key_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace levyou

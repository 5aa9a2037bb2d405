#pragma once

#include <json.hpp>
#include <fstream>
#include <string>

#include "levyou/common.hpp"
#include "levyou/model.hpp"

namespace levyou {

using Json = nlohmann::json;

// Declarative model configuration: a single JSON document with a versioned
// schema. Parse failures carry the offending field path.

struct ConfigDefaults {
    double epsilon = 1.0;
    double rho = 0.5;
    double alpha = 0.5;
    std::uint64_t seed = 20260810;
    int workers = 1;
    std::size_t n = 10000;
    std::vector<double> t_grid{1, 2, 3, 4, 5, 6, 7, 8};
    double tail_tol = 1e-4;
};

struct ModelConfig {
    int schema_version = 1;
    int dimension = 1;
    Mat A;
    Mat Q;
    Vec b;
    LevyMeasure nu;
    ConfigDefaults defaults;

    OUModel build_model() const {
        return OUModel::build(A, LevyTriplet::make(Q, b, nu));
    }
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& msg) {
    fail(ErrorKind::configuration, path + ": " + msg);
}

inline const Json& require_field(const Json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) config_fail(path + "." + key, "missing required field");
    return *it;
}

inline double require_number(const Json& j, const char* key, const std::string& path) {
    const Json& v = require_field(j, key, path);
    if (!v.is_number()) config_fail(path + "." + key, "expected a number");
    return v.get<double>();
}

inline Vec parse_vec(const Json& j, int dim, const std::string& path) {
    Vec v(dim);
    if (j.is_number() && dim == 1) {
        v(0) = j.get<double>();
        return v;
    }
    if (!j.is_array() || int(j.size()) != dim)
        config_fail(path, "expected an array of " + std::to_string(dim) + " numbers");
    for (int i = 0; i < dim; ++i) {
        if (!j[i].is_number()) config_fail(path + "[" + std::to_string(i) + "]", "not a number");
        v(i) = j[i].get<double>();
    }
    return v;
}

inline Mat parse_mat(const Json& j, int dim, const std::string& path) {
    Mat m(dim, dim);
    if (j.is_number() && dim == 1) {
        m(0, 0) = j.get<double>();
        return m;
    }
    if (!j.is_array() || int(j.size()) != dim * dim)
        config_fail(path, "expected a row-major array of " + std::to_string(dim * dim) +
                              " numbers");
    for (int i = 0; i < dim * dim; ++i) {
        if (!j[i].is_number()) config_fail(path + "[" + std::to_string(i) + "]", "not a number");
        m(i / dim, i % dim) = j[i].get<double>();
    }
    return m;
}

inline LevyMeasure parse_levy(const Json& j, int dim, const std::string& path);

inline LevyMeasure parse_density_family(const Json& j, int dim, const std::string& path) {
    if (dim != 1) config_fail(path, "named density families are one-dimensional");
    const Json& fam = require_field(j, "family", path);
    std::string name = fam.get<std::string>();
    if (name == "gaussian") {
        double sigma = j.contains("sigma") ? require_number(j, "sigma", path) : 1.0;
        double mass = j.contains("mass") ? require_number(j, "mass", path) : 1.0;
        double mean = j.contains("mean") ? require_number(j, "mean", path) : 0.0;
        if (!(sigma > 0) || !(mass > 0)) config_fail(path, "gaussian needs sigma, mass > 0");
        auto rho = [sigma, mass, mean](double z) {
            double u = (z - mean) / sigma;
            return mass * std::exp(-0.5 * u * u) /
                   (sigma * std::sqrt(2.0 * std::numbers::pi));
        };
        return LevyMeasure::density_1d(rho, mean == 0.0);
    }
    if (name == "uniform") {
        double half = j.contains("halfwidth") ? require_number(j, "halfwidth", path) : 1.0;
        double mass = j.contains("mass") ? require_number(j, "mass", path) : 1.0;
        if (!(half > 0) || !(mass > 0)) config_fail(path, "uniform needs halfwidth, mass > 0");
        double level = mass / (2.0 * half);
        return LevyMeasure::density_1d(
            [half, level](double z) { return std::abs(z) <= half ? level : 0.0; }, true, half);
    }
    if (name == "log-tail") {
        // 1/(|z| log^2 |z|) beyond `inner`; the log-moment diverges
        double inner = j.contains("inner") ? require_number(j, "inner", path) : std::exp(1.0);
        if (!(inner > 1.0)) config_fail(path, "log-tail needs inner > 1");
        return LevyMeasure::density_1d(
            [inner](double z) {
                double a = std::abs(z);
                if (a < inner) return 0.0;
                double l = std::log(a);
                return 1.0 / (a * l * l);
            },
            true, kInf, inner);
    }
    if (name == "near-zero-log") {
        // 1/(|z| log^2(1/|z|)) on |z| <= outer < 1: infinite mass, thin spread
        double outer = j.contains("outer") ? require_number(j, "outer", path)
                                           : std::exp(-1.0);
        if (!(outer > 0 && outer < 1)) config_fail(path, "near-zero-log needs outer in (0,1)");
        return LevyMeasure::density_1d(
            [outer](double z) {
                double a = std::abs(z);
                if (a <= 0.0 || a > outer) return 0.0;
                double l = std::log(1.0 / a);
                return 1.0 / (a * l * l);
            },
            true, outer);
    }
    config_fail(path + ".family", "unknown density family '" + name + "'");
}

inline LevyMeasure parse_levy(const Json& j, int dim, const std::string& path) {
    const Json& var = require_field(j, "variant", path);
    std::string v = var.get<std::string>();
    if (v == "none") return LevyMeasure::none_measure(dim);
    if (v == "stable") {
        double alpha = require_number(j, "alpha", path);
        double scale = require_number(j, "scale", path);
        return LevyMeasure::stable(dim, alpha, scale);
    }
    if (v == "atoms") {
        const Json& arr = require_field(j, "atoms", path);
        if (!arr.is_array() || arr.empty()) config_fail(path + ".atoms", "expected a non-empty array");
        std::vector<Atom> atoms;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            std::string ap = path + ".atoms[" + std::to_string(i) + "]";
            Vec z = parse_vec(require_field(arr[i], "z", ap), dim, ap + ".z");
            double mass = require_number(arr[i], "mass", ap);
            atoms.push_back({z, mass});
        }
        return LevyMeasure::atoms(dim, std::move(atoms));
    }
    if (v == "density") return parse_density_family(j, dim, path);
    if (v == "sum") {
        const Json& arr = require_field(j, "components", path);
        if (!arr.is_array() || arr.empty())
            config_fail(path + ".components", "expected a non-empty array");
        std::vector<LevyMeasure> comps;
        for (std::size_t i = 0; i < arr.size(); ++i)
            comps.push_back(
                parse_levy(arr[i], dim, path + ".components[" + std::to_string(i) + "]"));
        return LevyMeasure::sum(std::move(comps));
    }
    config_fail(path + ".variant", "unknown variant '" + v + "'");
}

}  // namespace detail

inline ModelConfig parse_model_config(const Json& j) {
    ModelConfig cfg;
    const std::string root = "$";
    const Json& ver = detail::require_field(j, "schema_version", root);
    if (!ver.is_number_integer() || ver.get<int>() != 1)
        detail::config_fail("$.schema_version", "unsupported schema version");
    cfg.schema_version = 1;
    double dimv = detail::require_number(j, "dimension", root);
    cfg.dimension = int(dimv);
    if (cfg.dimension < 1 || cfg.dimension > 8 || dimv != cfg.dimension)
        detail::config_fail("$.dimension", "dimension must be an integer in [1, 8]");
    cfg.A = detail::parse_mat(detail::require_field(j, "A", root), cfg.dimension, "$.A");
    cfg.Q = j.contains("Q") ? detail::parse_mat(j["Q"], cfg.dimension, "$.Q")
                            : Mat::Zero(cfg.dimension, cfg.dimension);
    cfg.b = j.contains("b") ? detail::parse_vec(j["b"], cfg.dimension, "$.b")
                            : Vec::Zero(cfg.dimension);
    cfg.nu = detail::parse_levy(detail::require_field(j, "levy", root), cfg.dimension, "$.levy");
    if (j.contains("defaults")) {
        const Json& d = j["defaults"];
        const std::string dp = "$.defaults";
        if (d.contains("epsilon")) cfg.defaults.epsilon = detail::require_number(d, "epsilon", dp);
        if (d.contains("rho")) cfg.defaults.rho = detail::require_number(d, "rho", dp);
        if (d.contains("alpha")) cfg.defaults.alpha = detail::require_number(d, "alpha", dp);
        if (d.contains("seed")) cfg.defaults.seed = d["seed"].get<std::uint64_t>();
        if (d.contains("workers")) cfg.defaults.workers = d["workers"].get<int>();
        if (d.contains("n")) cfg.defaults.n = d["n"].get<std::size_t>();
        if (d.contains("tail_tol")) cfg.defaults.tail_tol = detail::require_number(d, "tail_tol", dp);
        if (d.contains("t_grid")) {
            cfg.defaults.t_grid.clear();
            for (const auto& v : d["t_grid"]) cfg.defaults.t_grid.push_back(v.get<double>());
        }
    }
    return cfg;
}

inline ModelConfig load_model_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) fail(ErrorKind::configuration, "cannot open config file " + file);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail(ErrorKind::configuration, std::string("config parse error: ") + e.what());
    }
    return parse_model_config(j);
}

}  // namespace levyou

#pragma once

#include <json.hpp>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "levyou/conditions.hpp"
#include "levyou/lab.hpp"
#include "levyou/ou.hpp"

namespace levyou {

// Deterministic serialization: doubles through shortest-round-trip printf so a
// rerun with the same seed is byte-identical.

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline nlohmann::json to_json(const ConditionRecord& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["status"] = check_status_name(r.status);
    j["value"] = r.value;
    j["error_bar"] = r.error_bar;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    j["params"] = params;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline nlohmann::json to_json(const ConditionReport& rep) {
    nlohmann::json j;
    j["classification"] = classification_name(rep.classification);
    j["justification"] = rep.justification;
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : rep.records) recs.push_back(to_json(r));
    j["conditions"] = recs;
    return j;
}

inline nlohmann::json to_json(const RateFit& f) {
    nlohmann::json j;
    j["family"] = rate_family_name(f.family);
    j["prefactor"] = f.prefactor;
    j["rate"] = f.rate;
    j["rate_ci_half_width"] = f.rate_ci_half;
    j["r2"] = f.r2;
    j["n_used"] = f.n_used;
    nlohmann::json res = nlohmann::json::array();
    for (const auto& [t, r] : f.residuals) res.push_back({{"t", t}, {"log_residual", r}});
    j["residuals"] = res;
    return j;
}

inline nlohmann::json to_json(const MomentTable& m) {
    nlohmann::json j;
    j["alpha"] = m.alpha;
    j["plateau"] = m.plateau;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : m.rows)
        rows.push_back({{"t", r.t}, {"mean", r.mean}, {"std_error", r.std_error}});
    j["rows"] = rows;
    return j;
}

inline nlohmann::json to_json(const FullReport& rep) {
    nlohmann::json j;
    j["report"] = to_json(rep.conditions);
    j["expected_family"] = rep.expected_family;
    j["decay_method_used"] = rep.decay_method_used;
    if (rep.fit) j["fit"] = to_json(*rep.fit);
    if (!rep.skipped_reason.empty()) j["skipped_reason"] = rep.skipped_reason;
    j["agreement"] = rep.agreement;
    if (!rep.agreement_note.empty()) j["agreement_note"] = rep.agreement_note;
    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [k, v] : rep.meta) meta[k] = v;
    j["meta"] = meta;
    return j;
}

inline void write_decay_csv(std::ostream& os, const DecaySet& set) {
    os << "t,tv,err,method\n";
    for (const auto& table : set.tables)
        for (const auto& r : table.rows)
            os << format_double(r.t) << ',' << format_double(r.tv) << ','
               << format_double(r.err) << ',' << table.method << '\n';
}

inline void write_samples_csv(std::ostream& os, const std::vector<Vec>& samples) {
    if (samples.empty()) {
        os << "index\n";
        return;
    }
    os << "index";
    for (int c = 0; c < samples.front().size(); ++c) os << ",x" << c;
    os << '\n';
    for (std::size_t i = 0; i < samples.size(); ++i) {
        os << i;
        for (int c = 0; c < samples[i].size(); ++c)
            os << ',' << format_double(samples[i](c));
        os << '\n';
    }
}

struct CouplingRow {
    double t;
    double coupled_freq;
    double p_no_jump;
    double tv_bound;
    double err3;
    double expected_p0;
};

inline void write_coupling_csv(std::ostream& os, const std::vector<CouplingRow>& rows) {
    os << "t,coupled_freq,p_no_jump,tv_bound,err_3sigma,expected_p_no_jump\n";
    for (const auto& r : rows)
        os << format_double(r.t) << ',' << format_double(r.coupled_freq) << ','
           << format_double(r.p_no_jump) << ',' << format_double(r.tv_bound) << ','
           << format_double(r.err3) << ',' << format_double(r.expected_p0) << '\n';
}

inline void write_density_csv(std::ostream& os, const GriddedDensity& d) {
    if (d.dim == 1) {
        os << "x,density\n";
        for (std::size_t k = 0; k < d.values.size(); ++k)
            os << format_double(d.position(k)(0)) << ',' << format_double(d.values[k]) << '\n';
    } else {
        os << "x,y,density\n";
        for (std::size_t k = 0; k < d.values.size(); ++k) {
            Vec p = d.position(k);
            os << format_double(p(0)) << ',' << format_double(p(1)) << ','
               << format_double(d.values[k]) << '\n';
        }
    }
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::configuration, "cannot write " + path);
    out << content;
}

}  // namespace levyou

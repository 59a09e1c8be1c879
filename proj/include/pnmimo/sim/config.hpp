#pragma once

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../bounds.hpp"
#include "../channel.hpp"
#include "../constellation.hpp"
#include "../detector.hpp"
#include "../errors.hpp"
#include "../scenario.hpp"

namespace pnmimo::sim {

enum class ScenarioKind { siso, los_mimo, uplink_simo, custom };

inline std::string to_string(ScenarioKind s) {
    switch (s) {
    case ScenarioKind::siso: return "siso";
    case ScenarioKind::los_mimo: return "los_mimo";
    case ScenarioKind::uplink_simo: return "uplink_simo";
    case ScenarioKind::custom: return "custom";
    }
    return "?";
}

struct ExperimentConfig {
    ScenarioKind scenario = ScenarioKind::custom;
    std::string label;  // CSV scenario column; defaults to the scenario kind
    int n_t = 1;
    int n_r = 1;
    int qam_order = 4;
    ChannelModel channel = ChannelModel::rayleigh;
    double los_spacing = 1.0;
    PhaseNoiseFamily pn_family = PhaseNoiseFamily::none;
    double sigma_t_deg = 0.0;
    double sigma_r_deg = 0.0;
    std::vector<double> snr_db_list;
    std::vector<Method> detectors;
    std::int64_t trials = 0;
    std::uint64_t master_seed = 1;
    std::optional<double> gamma_max_db;
    int max_iter = 4;
    bool ml_lb = false;
    bool aml_lb = false;
    LPolicy l_policy = LPolicy::automatic;
    std::int64_t ml_lb_s_max = 10000000;
    Method ml_lb_reference = Method::siw_iter;

    std::string name() const { return label.empty() ? to_string(scenario) : label; }

    PhaseNoiseModel phase_noise() const {
        const double st = deg_to_rad(sigma_t_deg);
        const double sr = deg_to_rad(sigma_r_deg);
        switch (pn_family) {
        case PhaseNoiseFamily::none: return PhaseNoiseModel::none(n_t, n_r);
        case PhaseNoiseFamily::gaussian_iid: return PhaseNoiseModel::gaussian_iid(n_t, n_r, st, sr);
        case PhaseNoiseFamily::uniform_iid: return PhaseNoiseModel::uniform_iid(n_t, n_r, st, sr);
        case PhaseNoiseFamily::gaussian_cov: break;
        }
        throw ConfigError("pn_family", "gaussian_cov is not configurable from a file");
    }

    Scenario scenario_model() const {
        Scenario sc;
        sc.name = name();
        sc.n_t = n_t;
        sc.n_r = n_r;
        sc.qam_order = qam_order;
        sc.channel = channel;
        sc.los_spacing = los_spacing;
        sc.pn = phase_noise();
        sc.gamma_max_db = gamma_max_db;
        sc.max_iter = max_iter;
        return sc;
    }
};

/// Raw key -> (value, line) entries in file order of last assignment.
using ConfigEntries = std::map<std::string, std::pair<std::string, int>>;

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double parse_real(const std::string& key, const std::string& v, int line) {
    if (v.empty()) throw ConfigError(key, "expected a number", line);
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(d))
        throw ConfigError(key, "expected a number, got '" + v + "'", line);
    return d;
}

inline std::int64_t parse_int(const std::string& key, const std::string& v, int line) {
    const double d = parse_real(key, v, line);
    if (d != std::floor(d) || std::abs(d) > 9.0e15) throw ConfigError(key, "expected an integer, got '" + v + "'", line);
    return static_cast<std::int64_t>(d);
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v, int line) {
    if (v.empty() || v[0] == '-') throw ConfigError(key, "expected a non-negative integer", line);
    char* end = nullptr;
    errno = 0;
    const unsigned long long u = std::strtoull(v.c_str(), &end, 0);
    if (end != v.c_str() + v.size() || errno == ERANGE)
        throw ConfigError(key, "expected a 64-bit integer, got '" + v + "'", line);
    return u;
}

} // namespace detail

inline const std::set<std::string>& config_keys() {
    static const std::set<std::string> keys{
        "scenario",    "label",       "n_t",        "n_r",         "qam_order",     "channel",
        "los_spacing", "pn_family",   "sigma_t_deg", "sigma_r_deg", "snr_db_list",  "detectors",
        "trials",      "master_seed", "gamma_max_db", "max_iter",   "bounds",        "l_policy",
        "ml_lb_s_max", "ml_lb_reference"};
    return keys;
}

/// Split `key = value` lines. `#` starts a comment; blank lines are skipped.
inline ConfigEntries read_entries(std::istream& in) {
    ConfigEntries out;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError("", "expected key = value", line);
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string val = detail::trim(text.substr(eq + 1));
        if (!config_keys().count(key)) throw ConfigError(key, "unknown key", line);
        if (out.count(key)) throw ConfigError(key, "duplicate key (first on line " + std::to_string(out[key].second) + ")", line);
        out[key] = {val, line};
    }
    return out;
}

inline ConfigEntries read_entries(const std::string& text) {
    std::istringstream in(text);
    return read_entries(in);
}

/// Apply a `key=value` override on top of parsed entries (line 0).
inline void apply_override(ConfigEntries& e, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("", "override must be key=value: '" + kv + "'");
    const std::string key = detail::trim(kv.substr(0, eq));
    if (!config_keys().count(key)) throw ConfigError(key, "unknown key");
    e[key] = {detail::trim(kv.substr(eq + 1)), 0};
}

inline void validate(const ExperimentConfig& c);

namespace detail {

inline std::string strip_prefix(const ConfigError& err) {
    const std::string w = err.what();
    const std::string p = "'" + err.field() + "': ";
    return w.rfind(p, 0) == 0 ? w.substr(p.size()) : w;
}

} // namespace detail

inline ExperimentConfig build_config(const ConfigEntries& e) {
    ExperimentConfig c;
    auto has = [&](const char* k) { return e.count(k) > 0; };
    auto val = [&](const char* k) -> const std::string& { return e.at(k).first; };
    auto line = [&](const char* k) { return e.at(k).second; };
    auto require = [&](const char* k) {
        if (!has(k)) throw ConfigError(k, "missing required key");
    };

    if (has("scenario")) {
        const std::string& s = val("scenario");
        bool ok = false;
        for (ScenarioKind k : {ScenarioKind::siso, ScenarioKind::los_mimo, ScenarioKind::uplink_simo,
                               ScenarioKind::custom})
            if (to_string(k) == s) {
                c.scenario = k;
                ok = true;
            }
        if (!ok) throw ConfigError("scenario", "unknown scenario '" + s + "'", line("scenario"));
    }
    if (has("label")) c.label = val("label");
    require("n_t");
    require("n_r");
    require("qam_order");
    c.n_t = static_cast<int>(detail::parse_int("n_t", val("n_t"), line("n_t")));
    c.n_r = static_cast<int>(detail::parse_int("n_r", val("n_r"), line("n_r")));
    c.qam_order = static_cast<int>(detail::parse_int("qam_order", val("qam_order"), line("qam_order")));
    if (has("channel")) {
        const std::string& s = val("channel");
        if (s == "rayleigh") c.channel = ChannelModel::rayleigh;
        else if (s == "los_mimo") c.channel = ChannelModel::los_mimo;
        else if (s == "identity") c.channel = ChannelModel::identity;
        else throw ConfigError("channel", "expected rayleigh, los_mimo or identity", line("channel"));
    }
    if (has("los_spacing")) c.los_spacing = detail::parse_real("los_spacing", val("los_spacing"), line("los_spacing"));
    if (has("pn_family")) {
        const std::string& s = val("pn_family");
        if (s == "none") c.pn_family = PhaseNoiseFamily::none;
        else if (s == "gaussian_iid" || s == "gaussian") c.pn_family = PhaseNoiseFamily::gaussian_iid;
        else if (s == "uniform_iid" || s == "uniform") c.pn_family = PhaseNoiseFamily::uniform_iid;
        else throw ConfigError("pn_family", "expected none, gaussian_iid or uniform_iid", line("pn_family"));
    }
    if (has("sigma_t_deg")) c.sigma_t_deg = detail::parse_real("sigma_t_deg", val("sigma_t_deg"), line("sigma_t_deg"));
    if (has("sigma_r_deg")) c.sigma_r_deg = detail::parse_real("sigma_r_deg", val("sigma_r_deg"), line("sigma_r_deg"));

    require("snr_db_list");
    for (const std::string& s : detail::split_list(val("snr_db_list")))
        c.snr_db_list.push_back(detail::parse_real("snr_db_list", s, line("snr_db_list")));
    require("detectors");
    for (const std::string& s : detail::split_list(val("detectors"))) {
        const auto m = parse_method(s);
        if (!m) throw ConfigError("detectors", "unknown detector '" + s + "'", line("detectors"));
        for (Method prev : c.detectors)
            if (prev == *m) throw ConfigError("detectors", "detector '" + s + "' listed twice", line("detectors"));
        c.detectors.push_back(*m);
    }
    require("trials");
    c.trials = detail::parse_int("trials", val("trials"), line("trials"));
    if (has("master_seed")) c.master_seed = detail::parse_u64("master_seed", val("master_seed"), line("master_seed"));
    if (has("gamma_max_db") && val("gamma_max_db") != "none")
        c.gamma_max_db = detail::parse_real("gamma_max_db", val("gamma_max_db"), line("gamma_max_db"));
    if (has("max_iter")) c.max_iter = static_cast<int>(detail::parse_int("max_iter", val("max_iter"), line("max_iter")));
    if (has("bounds")) {
        for (const std::string& s : detail::split_list(val("bounds"))) {
            if (s == "ml_lb") c.ml_lb = true;
            else if (s == "aml_lb") c.aml_lb = true;
            else if (s != "none") throw ConfigError("bounds", "unknown bound '" + s + "'", line("bounds"));
        }
    }
    if (has("l_policy")) {
        const auto p = parse_l_policy(val("l_policy"));
        if (!p) throw ConfigError("l_policy", "unknown policy '" + val("l_policy") + "'", line("l_policy"));
        c.l_policy = *p;
    }
    if (has("ml_lb_s_max")) c.ml_lb_s_max = detail::parse_int("ml_lb_s_max", val("ml_lb_s_max"), line("ml_lb_s_max"));
    if (has("ml_lb_reference")) {
        const auto m = parse_method(val("ml_lb_reference"));
        if (!m) throw ConfigError("ml_lb_reference", "unknown detector", line("ml_lb_reference"));
        c.ml_lb_reference = *m;
    }

    // attach the line of the offending key to validation errors
    try {
        validate(c);
    } catch (const ConfigError& err) {
        if (err.line() == 0 && has(err.field().c_str())) throw ConfigError(err.field(), detail::strip_prefix(err), line(err.field().c_str()));
        throw;
    }
    return c;
}

inline void validate(const ExperimentConfig& c) {
    if (c.n_t < 1) throw ConfigError("n_t", "must be >= 1");
    if (c.n_r < 1) throw ConfigError("n_r", "must be >= 1");
    if (c.n_r < c.n_t) throw ConfigError("n_r", "must be >= n_t (detection needs a full-column-rank channel)");
    try {
        Constellation k(c.qam_order);
    } catch (const InvalidOrder&) {
        throw ConfigError("qam_order", "must be one of 4, 16, 64, 256, 1024");
    }
    if (c.channel == ChannelModel::los_mimo) {
        if (c.n_t != 4 || c.n_r != 4) throw ConfigError("channel", "los_mimo is a 4x4 channel");
        if (!(c.los_spacing > 0.0) || c.los_spacing > 1.0) throw ConfigError("los_spacing", "must lie in (0, 1]");
    }
    if (c.channel == ChannelModel::identity && c.n_t != c.n_r) throw ConfigError("channel", "identity needs n_t == n_r");
    if (c.sigma_t_deg < 0.0) throw ConfigError("sigma_t_deg", "must be >= 0");
    if (c.sigma_r_deg < 0.0) throw ConfigError("sigma_r_deg", "must be >= 0");
    if (c.snr_db_list.empty()) throw ConfigError("snr_db_list", "must not be empty");
    for (std::size_t i = 1; i < c.snr_db_list.size(); ++i)
        if (!(c.snr_db_list[i] > c.snr_db_list[i - 1])) throw ConfigError("snr_db_list", "must be strictly increasing");
    if (c.detectors.empty()) throw ConfigError("detectors", "must not be empty");
    if (c.trials < 100) throw ConfigError("trials", "must be >= 100");
    if (c.max_iter < 1) throw ConfigError("max_iter", "must be >= 1");
    if (c.ml_lb_s_max < 2) throw ConfigError("ml_lb_s_max", "must be >= 2");
    const Constellation k(c.qam_order);
    const bool small = search_space_size(k, c.n_t) <= kMaxExhaustiveSpace;
    for (Method m : c.detectors)
        if (m == Method::exhaustive_aml && !small) throw ConfigError("detectors", "exhaustive_aml needs |X|^n_t <= 2^20");
    if (c.ml_lb_reference == Method::exhaustive_aml && !small)
        throw ConfigError("ml_lb_reference", "exhaustive_aml needs |X|^n_t <= 2^20");
    if (c.aml_lb && c.l_policy == LPolicy::full && !small)
        throw ConfigError("l_policy", "full candidate set needs |X|^n_t <= 2^20");

    switch (c.scenario) {
    case ScenarioKind::siso:
        if (c.n_t != 1 || c.n_r != 1) throw ConfigError("scenario", "siso pins n_t = n_r = 1");
        if (c.channel != ChannelModel::rayleigh) throw ConfigError("scenario", "siso uses a rayleigh channel");
        break;
    case ScenarioKind::los_mimo:
        if (c.channel != ChannelModel::los_mimo) throw ConfigError("scenario", "los_mimo needs channel = los_mimo");
        break;
    case ScenarioKind::uplink_simo:
        if (c.sigma_r_deg != 0.0) throw ConfigError("scenario", "uplink_simo has no receive phase noise");
        if (c.channel != ChannelModel::rayleigh) throw ConfigError("scenario", "uplink_simo uses a rayleigh channel");
        break;
    case ScenarioKind::custom: break;
    }
}

inline ExperimentConfig parse_config(std::istream& in) { return build_config(read_entries(in)); }

inline ExperimentConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

namespace detail {

inline std::string fmt_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// Canonical key = value text of a config, keys sorted. Parsing it gives the same config.
inline std::string canonical_text(const ExperimentConfig& c) {
    std::map<std::string, std::string> kv;
    kv["scenario"] = to_string(c.scenario);
    if (!c.label.empty()) kv["label"] = c.label;
    kv["n_t"] = std::to_string(c.n_t);
    kv["n_r"] = std::to_string(c.n_r);
    kv["qam_order"] = std::to_string(c.qam_order);
    kv["channel"] = to_string(c.channel);
    kv["los_spacing"] = detail::fmt_real(c.los_spacing);
    kv["pn_family"] = to_string(c.pn_family);
    kv["sigma_t_deg"] = detail::fmt_real(c.sigma_t_deg);
    kv["sigma_r_deg"] = detail::fmt_real(c.sigma_r_deg);
    std::string snr;
    for (std::size_t i = 0; i < c.snr_db_list.size(); ++i) snr += (i ? "," : "") + detail::fmt_real(c.snr_db_list[i]);
    kv["snr_db_list"] = snr;
    std::string det;
    for (std::size_t i = 0; i < c.detectors.size(); ++i) det += (i ? "," : "") + to_string(c.detectors[i]);
    kv["detectors"] = det;
    kv["trials"] = std::to_string(c.trials);
    kv["master_seed"] = std::to_string(c.master_seed);
    kv["gamma_max_db"] = c.gamma_max_db ? detail::fmt_real(*c.gamma_max_db) : "none";
    kv["max_iter"] = std::to_string(c.max_iter);
    std::string b = c.ml_lb ? "ml_lb" : "";
    if (c.aml_lb) b += b.empty() ? "aml_lb" : ",aml_lb";
    kv["bounds"] = b.empty() ? "none" : b;
    kv["l_policy"] = to_string(c.l_policy);
    kv["ml_lb_s_max"] = std::to_string(c.ml_lb_s_max);
    kv["ml_lb_reference"] = to_string(c.ml_lb_reference);
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t config_hash(const ExperimentConfig& c) { return fnv1a64(canonical_text(c)); }

} // namespace pnmimo::sim

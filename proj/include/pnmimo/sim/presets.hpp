#pragma once

#include <map>
#include <string>
#include <vector>

#include "config.hpp"

namespace pnmimo::sim {

namespace detail {

// Shared defaults; each preset overrides the link, the noise and the grid.
inline std::string preset_common() {
    return "detectors = lmmse, naive_ml, selection, siw, siw_iter\n"
           "trials = 10000\n"
           "master_seed = 1\n"
           "max_iter = 4\n"
           "bounds = none\n";
}

inline const std::map<std::string, std::string>& preset_table() {
    static const std::map<std::string, std::string> table{
        {"siso64", "scenario = siso\nn_t = 1\nn_r = 1\nqam_order = 64\npn_family = gaussian_iid\n"
                   "sigma_t_deg = 3\nsigma_r_deg = 3\nsnr_db_list = 15, 20, 25, 30, 35, 40\n"},
        {"siso256", "scenario = siso\nn_t = 1\nn_r = 1\nqam_order = 256\npn_family = gaussian_iid\n"
                    "sigma_t_deg = 2\nsigma_r_deg = 2\nsnr_db_list = 20, 25, 30, 35, 40, 45\n"},
        {"siso1024", "scenario = siso\nn_t = 1\nn_r = 1\nqam_order = 1024\npn_family = gaussian_iid\n"
                     "sigma_t_deg = 1\nsigma_r_deg = 1\nsnr_db_list = 25, 30, 35, 40, 45, 50\n"},
        {"los033", "scenario = los_mimo\nn_t = 4\nn_r = 4\nchannel = los_mimo\nlos_spacing = 0.33\n"
                   "qam_order = 64\npn_family = gaussian_iid\nsigma_t_deg = 1\nsigma_r_deg = 1\n"
                   "snr_db_list = 20, 25, 30, 35, 40, 45, 50\n"},
        {"los07", "scenario = los_mimo\nn_t = 4\nn_r = 4\nchannel = los_mimo\nlos_spacing = 0.7\n"
                  "qam_order = 256\npn_family = gaussian_iid\nsigma_t_deg = 1\nsigma_r_deg = 1\n"
                  "snr_db_list = 20, 25, 30, 35, 40, 45, 50\n"},
        {"los10", "scenario = los_mimo\nn_t = 4\nn_r = 4\nchannel = los_mimo\nlos_spacing = 1\n"
                  "qam_order = 1024\npn_family = gaussian_iid\nsigma_t_deg = 1\nsigma_r_deg = 1\n"
                  "snr_db_list = 25, 30, 35, 40, 45, 50, 55\n"},
        {"simo44_64", "scenario = uplink_simo\nn_t = 4\nn_r = 4\nqam_order = 64\npn_family = gaussian_iid\n"
                      "sigma_t_deg = 4\nsigma_r_deg = 0\ngamma_max_db = 37.5\n"
                      "snr_db_list = 15, 20, 25, 30, 35, 40\n"},
        {"simo44_256", "scenario = uplink_simo\nn_t = 4\nn_r = 4\nqam_order = 256\npn_family = gaussian_iid\n"
                       "sigma_t_deg = 2\nsigma_r_deg = 0\ngamma_max_db = 50\n"
                       "snr_db_list = 20, 25, 30, 35, 40, 45, 50\n"},
        {"simo410_256", "scenario = uplink_simo\nn_t = 4\nn_r = 10\nqam_order = 256\npn_family = gaussian_iid\n"
                        "sigma_t_deg = 2\nsigma_r_deg = 0\ngamma_max_db = 30\n"
                        "snr_db_list = 10, 15, 20, 25, 30, 35\n"},
    };
    return table;
}

} // namespace detail

/// Uniform-noise counterparts run by the "uniform_variants" group.
inline const std::vector<std::string>& uniform_variant_names() {
    static const std::vector<std::string> names{"uniform_siso1024", "uniform_simo44_64", "uniform_simo44_256"};
    return names;
}

inline std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : detail::preset_table()) out.push_back(k);
    for (const auto& n : uniform_variant_names()) out.push_back(n);
    out.push_back("uniform_variants");
    return out;
}

/// Names a preset expands to: itself, or the members of a group.
inline std::vector<std::string> expand_preset(const std::string& name) {
    if (name == "uniform_variants") return uniform_variant_names();
    return {name};
}

/// Entries of a single preset, before overrides.
inline ConfigEntries preset_entries(const std::string& name) {
    std::string base = name;
    bool uniform = false;
    if (name.rfind("uniform_", 0) == 0) {
        base = name.substr(8);
        uniform = true;
        bool known = false;
        for (const auto& n : uniform_variant_names()) known = known || n == name;
        if (!known) throw ConfigError("preset", "unknown preset '" + name + "'");
    }
    const auto it = detail::preset_table().find(base);
    if (it == detail::preset_table().end()) throw ConfigError("preset", "unknown preset '" + name + "'");
    ConfigEntries e = read_entries(it->second + detail::preset_common());
    e["label"] = {name, 0};
    if (uniform) e["pn_family"] = {"uniform_iid", 0};
    return e;
}

inline ExperimentConfig preset(const std::string& name, const std::vector<std::string>& overrides = {}) {
    if (name == "uniform_variants") throw ConfigError("preset", "uniform_variants is a group; expand it first");
    ConfigEntries e = preset_entries(name);
    for (const std::string& kv : overrides) apply_override(e, kv);
    return build_config(e);
}

} // namespace pnmimo::sim

// Command-line front end: experiment runs, presets, and the diagnostic labs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pnmimo/pnmimo.hpp"

namespace {

using namespace pnmimo;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw ConfigError("--out", "cannot open '" + out + "' for writing");
    f << text;
}

sim::ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    sim::ConfigEntries e = sim::read_entries(in);
    for (const auto& kv : overrides) sim::apply_override(e, kv);
    return sim::build_config(e);
}

std::string fmt(double v) { return sim::detail::fmt_real(v); }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase-noise MIMO detection simulator"};
    app.require_subcommand(1);
    int threads = 1;
    std::string out;
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "output file (directory for preset groups); stdout if omitted");

    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    std::string config_path;
    std::vector<std::string> run_overrides;
    run->add_option("config", config_path, "key = value config file")->required();
    run->add_option("--override", run_overrides, "key=value applied after the file");

    auto* pre = app.add_subcommand("preset", "run a named scenario preset");
    std::string preset_name;
    std::vector<std::string> pre_overrides;
    bool list_only = false;
    pre->add_option("name", preset_name, "preset name");
    pre->add_option("--override", pre_overrides, "key=value applied to the preset");
    pre->add_flag("--list", list_only, "list preset names");
    bool print_config = false;
    pre->add_flag("--print-config", print_config, "print the resolved config instead of running");

    auto* bnd = app.add_subcommand("bounds", "ML / aML lower bounds for a config or preset");
    std::string bnd_config, bnd_preset, bnd_kind = "ml_lb,aml_lb";
    std::vector<std::string> bnd_overrides;
    bnd->add_option("--config", bnd_config, "config file");
    bnd->add_option("--preset", bnd_preset, "preset name");
    bnd->add_option("--kind", bnd_kind, "ml_lb, aml_lb or both");
    bnd->add_option("--override", bnd_overrides, "key=value");

    auto* hard = app.add_subcommand("hardness", "radius statistics: closed form against simulation");
    std::vector<int> h_nt{16}, h_nr{16};
    double h_sigma_t = 3.0, h_sigma_r = 3.0, h_snr = 40.0;
    int h_qam = 4;
    std::int64_t h_draws = 10000;
    std::uint64_t h_seed = 1;
    hard->add_option("--n-t", h_nt, "transmit antenna counts");
    hard->add_option("--n-r", h_nr, "receive antenna counts");
    hard->add_option("--sigma-t-deg", h_sigma_t);
    hard->add_option("--sigma-r-deg", h_sigma_r);
    hard->add_option("--snr-db", h_snr);
    hard->add_option("--qam", h_qam);
    hard->add_option("--draws", h_draws)->check(CLI::Range(std::int64_t{2}, std::int64_t{100000000}));
    hard->add_option("--seed", h_seed);

    auto* wien = app.add_subcommand("wiener", "filtered Wiener phase-noise gain moments");
    std::vector<double> w_std{1, 2, 5, 10, 15, 20};
    std::int64_t w_samples = 100000;
    int w_steps = kDefaultWienerSteps;
    std::uint64_t w_seed = 1;
    wien->add_option("--std-deg", w_std, "filtered phase standard deviations, degrees");
    wien->add_option("--samples", w_samples)->check(CLI::Range(std::int64_t{2}, std::int64_t{1000000000}));
    wien->add_option("--steps", w_steps)->check(CLI::Range(2, 1 << 20));
    wien->add_option("--seed", w_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*run) {
            const auto cfg = load_config(config_path, run_overrides);
            emit(sim::to_csv(sim::run_experiment(cfg, threads)), out);
        } else if (*pre) {
            if (list_only) {
                for (const auto& n : sim::preset_names()) std::cout << n << "\n";
                return 0;
            }
            if (preset_name.empty()) throw ConfigError("preset", "missing preset name");
            const auto names = sim::expand_preset(preset_name);
            if (names.size() > 1 && !out.empty()) std::filesystem::create_directories(out);
            for (const auto& n : names) {
                const auto cfg = sim::preset(n, pre_overrides);
                const std::string target = names.size() > 1 && !out.empty() ? out + "/" + n + ".csv" : out;
                if (print_config) {
                    std::cout << sim::canonical_text(cfg);
                    continue;
                }
                emit(sim::to_csv(sim::run_experiment(cfg, threads)), target);
            }
        } else if (*bnd) {
            if (bnd_config.empty() == bnd_preset.empty()) throw ConfigError("", "give exactly one of --config, --preset");
            std::vector<std::string> ov = bnd_overrides;
            ov.push_back("bounds=" + bnd_kind);
            const auto cfg = bnd_config.empty() ? sim::preset(bnd_preset, ov) : load_config(bnd_config, ov);
            emit(sim::to_csv(sim::run_experiment(cfg, threads)), out);
        } else if (*hard) {
            const Constellation k(h_qam);
            const double st = deg_to_rad(h_sigma_t), sr = deg_to_rad(h_sigma_r);
            const double gamma = db_to_linear(h_snr);
            std::ostringstream os;
            os << "n_t,n_r,sigma_t_deg,sigma_r_deg,snr_db,e_r2_closed,e_r2_emp,var_r2_closed,var_r2_emp,coverage\n";
            for (int nt : h_nt)
                for (int nr : h_nr) {
                    CounterRng rng(derive_key(h_seed, {static_cast<std::uint64_t>(nt), static_cast<std::uint64_t>(nr)}));
                    const auto draws = simulate_radius(nt, nr, gamma, st, sr, k, h_draws, rng);
                    const auto s = summarize(draws);
                    const RadiusStats rs = radius_variance(nt, nr, gamma, st, sr, k);
                    os << nt << ',' << nr << ',' << fmt(h_sigma_t) << ',' << fmt(h_sigma_r) << ',' << fmt(h_snr)
                       << ',' << fmt(rs.e_r2) << ',' << fmt(s.mean) << ',' << fmt(rs.var_r2) << ','
                       << fmt(s.variance) << ',' << fmt(coverage_fraction(draws, rs.e_r2, 0.1)) << "\n";
                }
            emit(os.str(), out);
        } else if (*wien) {
            std::ostringstream os;
            os << "phase_std_deg,var_phi_emp,var_phi_cf,var_g_emp,var_g_cf,var_g_db,wraps\n";
            for (std::size_t i = 0; i < w_std.size(); ++i) {
                CounterRng rng(derive_key(w_seed, {i}));
                const double s_param = s_for_phase_std(deg_to_rad(w_std[i]));
                const WienerValidation v = validate_moments(s_param, w_samples, w_steps, rng);
                os << fmt(w_std[i]) << ',' << fmt(v.var_phi_emp) << ',' << fmt(v.closed_form.var_phi) << ','
                   << fmt(v.var_g_emp) << ',' << fmt(v.closed_form.var_g) << ','
                   << fmt(10.0 * std::log10(v.var_g_emp)) << ',' << v.wraps << "\n";
            }
            emit(os.str(), out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const pnmimo::Error& e) {
        // out-of-range parameters reaching the library count as bad input
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}

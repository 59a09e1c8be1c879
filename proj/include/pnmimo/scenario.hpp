#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "channel.hpp"
#include "constellation.hpp"
#include "detector.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace pnmimo {

/// Everything needed to draw trials of one link at one SNR grid.
struct Scenario {
    std::string name = "custom";
    int n_t = 1;
    int n_r = 1;
    int qam_order = 4;
    ChannelModel channel = ChannelModel::rayleigh;
    double los_spacing = 1.0;
    PhaseNoiseModel pn = PhaseNoiseModel::none(1, 1);
    std::optional<double> gamma_max_db;
    int max_iter = 4;
};

/// One transmitted vector and what the receiver sees.
struct Trial {
    CMat h;
    Observation obs;
    double gamma = 1.0;          // channel SNR
    double gamma_decoder = 1.0;  // after the SNR ceiling

    const CVec& y() const { return obs.y; }
    const CVec& x_true() const { return obs.x_true; }
};

/// The channel of a scenario that does not change across trials, if any.
inline std::optional<ChannelInstance> fixed_channel(const Scenario& sc) {
    switch (sc.channel) {
    case ChannelModel::los_mimo: return make_los_mimo(sc.los_spacing);
    case ChannelModel::identity: return make_identity(sc.n_t);
    default: return std::nullopt;
    }
}

/// Draw trial `trial_idx` at grid point `snr_idx`. Channel, symbols, phases
/// and noise each come from their own counter stream, so the draw depends only
/// on (master, snr_idx, trial_idx) and not on which detectors or bounds run.
inline Trial draw_trial(const Scenario& sc, const Constellation& k, double snr_db, std::uint64_t master,
                        std::uint64_t snr_idx, std::uint64_t trial_idx,
                        const std::optional<ChannelInstance>& fixed = std::nullopt) {
    ChannelInstance ch;
    if (fixed) {
        ch = *fixed;
    } else if (sc.channel == ChannelModel::rayleigh) {
        auto rng = trial_stream(master, snr_idx, trial_idx, Purpose::channel);
        ch = sample_rayleigh(sc.n_t, sc.n_r, rng);
    } else {
        ch = *fixed_channel(sc);
    }

    auto sym_rng = trial_stream(master, snr_idx, trial_idx, Purpose::symbols);
    CVec x(sc.n_t);
    for (int l = 0; l < sc.n_t; ++l) x[l] = k.point(uniform_index(sym_rng, k.order()));

    auto ph_rng = trial_stream(master, snr_idx, trial_idx, Purpose::phase);
    const RVec theta = sc.pn.sample(ph_rng);

    Trial t;
    t.gamma = db_to_linear(snr_db);
    t.gamma_decoder = sc.gamma_max_db ? snr_ceiling(t.gamma, db_to_linear(*sc.gamma_max_db)) : t.gamma;
    auto noise_rng = trial_stream(master, snr_idx, trial_idx, Purpose::noise);
    t.obs = apply_channel(ch, x, theta, t.gamma, noise_rng);
    t.h = std::move(ch.h);
    return t;
}

/// Starting points shared by all detectors of a trial (decoder-side SNR).
inline InitialCandidates trial_candidates(const Trial& t, const Scenario& sc, const Constellation& k) {
    return initial_candidates(t.y(), t.h, t.gamma_decoder, sc.pn.q_theta(), k);
}

} // namespace pnmimo

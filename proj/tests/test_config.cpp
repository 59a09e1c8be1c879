#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "common.hpp"

using namespace pnmimo;
using namespace pnmimo::sim;

namespace {

const char* kBase =
    "# small custom run\n"
    "scenario = custom\n"
    "n_t = 2\n"
    "n_r = 2\n"
    "qam_order = 16\n"
    "pn_family = gaussian_iid\n"
    "sigma_t_deg = 3\n"
    "sigma_r_deg = 1.5   # trailing comment\n"
    "snr_db_list = 10, 20, 30\n"
    "detectors = lmmse, siw\n"
    "trials = 200\n"
    "master_seed = 77\n";

int error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

std::string error_field(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<none>";
}

} // namespace

TEST(Config, ParsesBase) {
    const ExperimentConfig c = parse_config(kBase);
    EXPECT_EQ(c.scenario, ScenarioKind::custom);
    EXPECT_EQ(c.n_t, 2);
    EXPECT_EQ(c.qam_order, 16);
    EXPECT_EQ(c.pn_family, PhaseNoiseFamily::gaussian_iid);
    EXPECT_EQ(c.sigma_r_deg, 1.5);
    EXPECT_EQ(c.snr_db_list, (std::vector<double>{10, 20, 30}));
    ASSERT_EQ(c.detectors.size(), 2u);
    EXPECT_EQ(c.detectors[1], Method::siw);
    EXPECT_EQ(c.trials, 200);
    EXPECT_EQ(c.master_seed, 77u);
    EXPECT_FALSE(c.gamma_max_db.has_value());
    EXPECT_FALSE(c.ml_lb);
    const PhaseNoiseModel pn = c.phase_noise();
    const RMat& q = pn.q_theta();
    EXPECT_NEAR(q(0, 0), std::pow(deg_to_rad(3), 2), 1e-18);
    EXPECT_NEAR(q(3, 3), std::pow(deg_to_rad(1.5), 2), 1e-18);
}

TEST(Config, ErrorsCarryLineNumbers) {
    const std::string base = kBase;
    EXPECT_EQ(error_line(base + "bogus_key = 1\n"), 13);
    EXPECT_EQ(error_field(base + "bogus_key = 1\n"), "bogus_key");
    EXPECT_EQ(error_line(base + "trials = 300\n"), 13);  // duplicate
    EXPECT_EQ(error_line(base + "max_iter\n"), 13);
    // value errors point at the key's line
    std::string t = kBase;
    t.replace(t.find("trials = 200"), 12, "trials = 50");
    EXPECT_EQ(error_line(t), 11);
    EXPECT_EQ(error_field(t), "trials");
    t = kBase;
    t.replace(t.find("10, 20, 30"), 10, "10, 30, 20");
    EXPECT_EQ(error_line(t), 9);
    t = kBase;
    t.replace(t.find("qam_order = 16"), 14, "qam_order = 32");
    EXPECT_EQ(error_line(t), 5);
    t = kBase;
    t.replace(t.find("lmmse, siw"), 10, "lmmse, fancy");
    EXPECT_EQ(error_line(t), 10);
    t = kBase;
    t.replace(t.find("n_r = 2"), 7, "n_r = 1");
    EXPECT_EQ(error_field(t), "n_r");
    t = kBase;
    t.replace(t.find("sigma_t_deg = 3"), 15, "sigma_t_deg = x");
    EXPECT_EQ(error_line(t), 7);
}

TEST(Config, MissingKeys) {
    EXPECT_EQ(error_field("n_t = 1\nn_r = 1\n"), "qam_order");
    EXPECT_EQ(error_field("n_t = 1\nn_r = 1\nqam_order = 4\ndetectors = siw\ntrials = 100\n"), "snr_db_list");
}

TEST(Config, Validation) {
    const std::string base = kBase;
    EXPECT_EQ(error_field(base + "channel = los_mimo\n"), "channel");
    EXPECT_EQ(error_field(base + "bounds = aml_lb\nl_policy = full\n"), "<none>");
    std::string big = kBase;
    big.replace(big.find("qam_order = 16"), 14, "qam_order = 1024");
    EXPECT_EQ(error_field(big + "bounds = aml_lb\nl_policy = full\n"), "<none>");  // exactly 2^20
    big.replace(big.find("n_t = 2"), 7, "n_t = 3");
    big.replace(big.find("n_r = 2"), 7, "n_r = 3");
    EXPECT_EQ(error_field(big + "bounds = aml_lb\nl_policy = full\n"), "l_policy");
    big.replace(big.find("lmmse, siw"), 10, "exhaustive_aml");
    EXPECT_EQ(error_field(big), "detectors");
    std::string s = kBase;
    s.replace(s.find("scenario = custom"), 17, "scenario = siso");
    EXPECT_EQ(error_field(s), "scenario");
    s = kBase;
    s.replace(s.find("scenario = custom"), 17, "scenario = uplink_simo");
    EXPECT_EQ(error_field(s), "scenario");  // receive phase noise not allowed
    EXPECT_EQ(error_field(base + "gamma_max_db = none\nbounds = ml_lb, aml_lb\n"), "<none>");
    EXPECT_EQ(error_field(base + "bounds = upper\n"), "bounds");
}

TEST(Config, CanonicalRoundTripAndHash) {
    ExperimentConfig c = parse_config(std::string(kBase) + "gamma_max_db = 37.5\nbounds = ml_lb\n");
    const std::string text = canonical_text(c);
    const ExperimentConfig d = parse_config(text);
    EXPECT_EQ(canonical_text(d), text);
    EXPECT_EQ(config_hash(c), config_hash(d));
    c.master_seed += 1;
    EXPECT_NE(config_hash(c), config_hash(d));
    // FNV-1a reference values
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Config, Overrides) {
    ConfigEntries e = read_entries(kBase);
    apply_override(e, "trials=500");
    apply_override(e, " snr_db_list = 40 ");
    const ExperimentConfig c = build_config(e);
    EXPECT_EQ(c.trials, 500);
    EXPECT_EQ(c.snr_db_list, std::vector<double>{40});
    EXPECT_THROW(apply_override(e, "nokey=1"), ConfigError);
    EXPECT_THROW(apply_override(e, "trials"), ConfigError);
}

TEST(Presets, NamedScenarios) {
    const ExperimentConfig a = preset("siso64");
    EXPECT_EQ(a.n_t, 1);
    EXPECT_EQ(a.n_r, 1);
    EXPECT_EQ(a.qam_order, 64);
    EXPECT_EQ(a.sigma_t_deg, 3);
    EXPECT_EQ(a.sigma_r_deg, 3);

    const ExperimentConfig b = preset("simo44_64");
    EXPECT_EQ(b.n_t, 4);
    EXPECT_EQ(b.n_r, 4);
    EXPECT_EQ(b.qam_order, 64);
    EXPECT_EQ(b.sigma_t_deg, 4);
    EXPECT_EQ(b.sigma_r_deg, 0);
    ASSERT_TRUE(b.gamma_max_db.has_value());
    EXPECT_EQ(*b.gamma_max_db, 37.5);

    const ExperimentConfig c = preset("los07");
    EXPECT_EQ(c.channel, ChannelModel::los_mimo);
    EXPECT_EQ(c.los_spacing, 0.7);
    EXPECT_EQ(c.qam_order, 256);
    EXPECT_EQ(c.sigma_t_deg, 1);
    EXPECT_EQ(c.sigma_r_deg, 1);
    EXPECT_EQ(c.n_t, 4);

    EXPECT_EQ(preset("siso256").qam_order, 256);
    EXPECT_EQ(preset("siso1024").sigma_t_deg, 1);
    EXPECT_EQ(preset("los033").los_spacing, 0.33);
    EXPECT_EQ(preset("los10").qam_order, 1024);
    EXPECT_EQ(preset("simo410_256").n_r, 10);
    EXPECT_EQ(preset("simo44_256").sigma_t_deg, 2);
}

TEST(Presets, AllValidAndListed) {
    for (const std::string& n : preset_names()) {
        for (const std::string& m : expand_preset(n)) {
            const ExperimentConfig c = preset(m);
            EXPECT_EQ(c.name(), m);
            EXPECT_GE(c.trials, 100);
            EXPECT_NO_THROW(validate(c));
        }
    }
}

TEST(Presets, UniformVariants) {
    const auto names = expand_preset("uniform_variants");
    ASSERT_EQ(names.size(), 3u);
    for (const auto& n : names) EXPECT_EQ(preset(n).pn_family, PhaseNoiseFamily::uniform_iid);
    const ExperimentConfig u = preset("uniform_siso1024");
    EXPECT_EQ(u.qam_order, 1024);
    EXPECT_EQ(u.sigma_t_deg, 1);
    EXPECT_THROW(preset("uniform_variants"), ConfigError);
}

TEST(Presets, UnknownAndOverrides) {
    EXPECT_THROW(preset("siso2048"), ConfigError);
    EXPECT_THROW(preset("uniform_los07"), ConfigError);
    const ExperimentConfig c = preset("siso64", {"trials=123", "snr_db_list=30"});
    EXPECT_EQ(c.trials, 123);
    EXPECT_EQ(c.snr_db_list.size(), 1u);
    EXPECT_THROW(preset("siso64", {"n_t=2"}), ConfigError);  // siso pins the dimensions
}

TEST(Config, ShippedConfigsParse) {
    const char* dir = std::getenv("PNMIMO_CONFIG_DIR");
    if (!dir) GTEST_SKIP() << "PNMIMO_CONFIG_DIR not set";
    int n = 0;
    for (const auto& f : std::filesystem::directory_iterator(dir)) {
        if (f.path().extension() != ".cfg") continue;
        std::ifstream in(f.path());
        EXPECT_NO_THROW(parse_config(in)) << f.path();
        ++n;
    }
    EXPECT_GE(n, 1);
}

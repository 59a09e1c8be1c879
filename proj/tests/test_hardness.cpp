#include <cmath>
#include <gtest/gtest.h>

#include "common.hpp"

using namespace pnmimo;

namespace {

const double kS3 = deg_to_rad(3.0);

double fourth_central(const std::vector<double>& v, double mean) {
    double m4 = 0;
    for (double a : v) m4 += std::pow(a - mean, 4);
    return m4 / v.size();
}

CVec vec1(cplx v) {
    CVec x(1);
    x[0] = v;
    return x;
}

} // namespace

TEST(Radius, NoPhaseNoise) {
    for (int nr : {1, 3, 8}) {
        const double g = 10.0;
        EXPECT_DOUBLE_EQ(expected_radius(2, nr, g, 0.0, 0.0), nr / g);
        const RadiusStats r = radius_variance(2, nr, g, 0.0, 0.0, 1.0);
        EXPECT_EQ(r.w1, 0.0);
        EXPECT_EQ(r.w2, 0.0);
        EXPECT_EQ(r.w3, 0.0);
        // ||Z||^2 is a sum of n_r exponentials with mean 1/gamma
        EXPECT_NEAR(r.var_r2, nr / (g * g), 1e-15);
    }
}

TEST(Radius, AwgnVarianceBySimulation) {
    CounterRng rng(1);
    const auto draws = simulate_radius(2, 3, 10.0, 0.0, 0.0, Constellation(4), 200000, rng);
    const SampleSummary s = summarize(draws);
    const RadiusStats r = radius_variance(2, 3, 10.0, 0.0, 0.0, 1.0);
    EXPECT_NEAR(s.mean, r.e_r2, 0.01 * r.e_r2);
    EXPECT_NEAR(s.variance, r.var_r2, 0.03 * r.var_r2);
}

TEST(Radius, DoublingTransmitAntennas) {
    const double g = 1e4;
    const double n16 = expected_radius(16, 16, g, kS3, kS3) - 16 / g;
    const double n32 = expected_radius(32, 16, g, kS3, kS3) - 16 / g;
    EXPECT_NEAR(n32, 2 * n16, 1e-12);
    EXPECT_THROW(expected_radius(0, 1, 1.0, 0, 0), DimensionMismatch);
}

TEST(Radius, FourthMomentInput) {
    EXPECT_NEAR(Constellation(4).fourth_moment(), 1.0, 1e-12);
    for (int m : {16, 64, 256, 1024}) EXPECT_GT(Constellation(m).fourth_moment(), 1.0);
    EXPECT_NO_THROW(radius_variance(2, 2, 10.0, kS3, kS3, Constellation(4)));
    EXPECT_THROW(radius_variance(2, 2, 10.0, kS3, kS3, 0.9), DimensionMismatch);
    const RadiusStats r = radius_variance(4, 4, 100.0, kS3, 2 * kS3, Constellation(64));
    EXPECT_GE(r.w1, 0.0);
    EXPECT_GE(r.w2, 0.0);
    EXPECT_GE(r.w3, 0.0);
    EXPECT_GE(r.var_r2, 0.0);
    EXPECT_NEAR(r.sigma2, (kS3 * kS3 + 4 * kS3 * kS3) / 2, 1e-18);
}

TEST(Radius, SixteenBySixteenMeanAndCoverage) {
    CounterRng rng(2);
    const Constellation k(4);
    const double g = db_to_linear(40.0);
    const auto draws = simulate_radius(16, 16, g, kS3, kS3, k, 10000, rng);
    const double e = expected_radius(16, 16, g, kS3, kS3);
    EXPECT_NEAR(summarize(draws).mean, e, 0.02 * e);
    EXPECT_GE(coverage_fraction(draws, e, 0.1), 0.99);
}

TEST(Radius, SixteenBySixteenVariance) {
    CounterRng rng(3);
    const Constellation k(4);
    const double g = db_to_linear(40.0);
    const auto draws = simulate_radius(16, 16, g, kS3, kS3, k, 100000, rng);
    const RadiusStats r = radius_variance(16, 16, g, kS3, kS3, k);
    EXPECT_NEAR(summarize(draws).variance, r.var_r2, 0.1 * r.var_r2);
}

TEST(Radius, SmallDimensionsAgainstSimulation) {
    // includes unequal phase deviations and a non-constant-modulus constellation
    const Constellation k(16);
    const double st = deg_to_rad(10.0), sr = deg_to_rad(5.0), g = 100.0;
    for (int nt : {1, 2, 4}) {
        for (int nr : {1, 2, 4}) {
            CounterRng rng(derive_key(4, {static_cast<std::uint64_t>(nt), static_cast<std::uint64_t>(nr)}));
            const std::int64_t n = 200000;
            const auto draws = simulate_radius(nt, nr, g, st, sr, k, n, rng);
            const SampleSummary s = summarize(draws);
            const RadiusStats r = radius_variance(nt, nr, g, st, sr, k);
            const double se_mean = std::sqrt(s.variance / n);
            const double se_var = std::sqrt((fourth_central(draws, s.mean) - s.variance * s.variance) / n);
            EXPECT_NEAR(s.mean, r.e_r2, 4 * se_mean) << nt << "x" << nr;
            EXPECT_NEAR(s.variance, r.var_r2, 4 * se_var) << nt << "x" << nr;
        }
    }
}

TEST(Radius, Concentration) {
    const double g = db_to_linear(40.0);
    double prev = 1e300;
    for (int n : {4, 8, 16, 32}) {
        const RadiusStats r = radius_variance(n, n, g, kS3, kS3, Constellation(4));
        const double ratio = r.var_r2 / (r.e_r2 * r.e_r2);
        EXPECT_LT(ratio, prev) << n;
        prev = ratio;
    }
}

TEST(PhaseDistance, ExactObservation) {
    CounterRng rng(5);
    for (int t = 0; t < 20; ++t) {
        const CMat h = testing_util::random_channel(3, 2, rng);
        const CVec x = testing_util::random_symbols(Constellation(16), 2, rng);
        EXPECT_LE(min_phase_distance(x, h * x, h), 1e-10);
    }
}

TEST(PhaseDistance, ScalarClosedForm) {
    CounterRng rng(6);
    for (int t = 0; t < 50; ++t) {
        const cplx x = complex_normal(rng, 1.0), y = complex_normal(rng, 1.0);
        const double m = min_phase_distance(vec1(x), vec1(y), CMat::Ones(1, 1));
        const double d = std::abs(y) - std::abs(x);
        EXPECT_NEAR(m, d * d, 1e-10);
    }
}

TEST(PhaseDistance, NonConcavityConstruction) {
    CounterRng rng(7);
    for (int nt : {1, 2, 4}) {
        for (int nr : {1, 2, 4}) {
            for (int rep = 0; rep < 5; ++rep) {
                const CMat h = testing_util::random_channel(nr, nt, rng);
                CVec z(nt);
                for (int l = 0; l < nt; ++l) z[l] = complex_normal(rng, 1.0);
                const CVec y = h * z;
                ASSERT_GT(y.norm(), 0.0);
                CVec x(nt);
                for (int l = 0; l < nt; ++l) x[l] = cplx(0.0, std::abs(z[l]));
                const double mp = min_phase_distance(x, y, h);
                const double mm = min_phase_distance(-x, y, h);
                const double m0 = min_phase_distance(CVec::Zero(nt), y, h);
                EXPECT_LE(mp, 1e-8) << nt << "x" << nr;
                EXPECT_LE(mm, 1e-8) << nt << "x" << nr;
                EXPECT_NEAR(m0, y.squaredNorm(), 1e-12 * y.squaredNorm());
                // midpoint concavity of -m would need m(0) <= (m(x) + m(-x)) / 2
                EXPECT_GT(m0, 0.5 * (mp + mm));
            }
        }
    }
}

TEST(PhaseDistance, MonotoneTraces) {
    CounterRng rng(8);
    for (int t = 0; t < 10; ++t) {
        const CMat h = testing_util::random_channel(4, 4, rng);
        const CVec x = testing_util::random_symbols(Constellation(64), 4, rng);
        CVec y(4);
        for (int i = 0; i < 4; ++i) y[i] = complex_normal(rng, 1.0);
        const PhaseDistanceResult r = min_phase_distance_detail(x, y, h, 200, 5, true);
        ASSERT_EQ(r.traces.size(), 5u);
        double best = 1e300;
        for (const auto& tr : r.traces) {
            for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_LE(tr[i], tr[i - 1]);
            best = std::min(best, tr.back());
        }
        EXPECT_EQ(r.value, best);
        // the reported phases reproduce the value
        const double direct = (y - rotate_and_mix(h, x, RVec(r.theta))).squaredNorm();
        EXPECT_NEAR(direct, r.value, 1e-9 * std::max(1.0, r.value));
    }
}

TEST(PhaseDistance, InvariantToTransmitRotation) {
    CounterRng rng(9);
    for (int t = 0; t < 20; ++t) {
        const CMat h = testing_util::random_channel(3, 2, rng);
        const CVec x = testing_util::random_symbols(Constellation(16), 2, rng);
        CVec y(3);
        for (int i = 0; i < 3; ++i) y[i] = complex_normal(rng, 1.0);
        CVec lx = x;
        for (int l = 0; l < 2; ++l) lx[l] *= std::polar(1.0, uniform_real(rng, -kPi, kPi));
        EXPECT_NEAR(min_phase_distance(x, y, h), min_phase_distance(lx, y, h), 1e-6);
    }
}

TEST(PhaseDistance, BadArguments) {
    EXPECT_THROW(min_phase_distance(CVec::Ones(1), CVec::Ones(1), CMat::Ones(1, 1), 0), DimensionMismatch);
    EXPECT_THROW(min_phase_distance(CVec::Ones(2), CVec::Ones(1), CMat::Ones(1, 1)), DimensionMismatch);
}

TEST(HighSnr, GapShrinksForMatchedPoint) {
    const auto pn = PhaseNoiseModel::gaussian_iid(1, 1, kS3, kS3);
    const CVec x = vec1(cplx(0.6, 0.3));
    const auto rows = high_snr_ratio_check(x, x, CMat::Ones(1, 1), pn,
                                           {db_to_linear(20), db_to_linear(30), db_to_linear(40), db_to_linear(50)});
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_LE(rows[0].m, 1e-12);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(std::abs(rows[i].gap), std::abs(rows[i - 1].gap));
    EXPECT_LT(std::abs(rows.back().gap), 1e-3);
}

TEST(HighSnr, ZeroSymbol) {
    const auto pn = PhaseNoiseModel::gaussian_iid(1, 1, kS3, kS3);
    const CVec y = vec1(cplx(0.4, -0.2));
    for (const auto& r : high_snr_ratio_check(CVec::Zero(1), y, CMat::Ones(1, 1), pn, {10.0, 1e3, 1e5})) {
        EXPECT_NEAR(r.m, y.squaredNorm(), 1e-14);
        EXPECT_NEAR(r.neg_f_over_gamma, y.squaredNorm(), 1e-12);
    }
}

TEST(HighSnr, GaussianOnly) {
    const auto pn = PhaseNoiseModel::uniform_iid(1, 1, kS3, kS3);
    EXPECT_THROW(high_snr_ratio_check(CVec::Ones(1), CVec::Ones(1), CMat::Ones(1, 1), pn, {100.0}), UnsupportedModel);
}

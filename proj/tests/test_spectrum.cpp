#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ck/spectrum.hpp"

using namespace ck;

namespace {
SimConfig small(long n, long m, long p, std::uint64_t seed = 3) {
    SimConfig c;
    c.n = n;
    c.m = m;
    c.p = p;
    c.seed = seed;
    c.trials = 4;
    c.k_max = 3;
    return c;
}
}  // namespace

TEST(Spectrum, DiagonalGramHasKnownEigenvalues) {
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(2, 3);
    Y(0, 0) = 1.0;
    Y(1, 2) = 2.0;
    auto e = gram_eigenvalues(Y);
    ASSERT_EQ(e.size(), 2u);
    EXPECT_NEAR(e[0], 1.0, 1e-15);
    EXPECT_NEAR(e[1], 4.0, 1e-15);
    auto m = spectral_moments(e, 3);
    EXPECT_DOUBLE_EQ(m[0], 2.5);
    EXPECT_DOUBLE_EQ(m[1], 8.5);
    EXPECT_DOUBLE_EQ(m[2], 32.5);
}

TEST(Spectrum, ZeroFeaturesHaveZeroSpectrum) {
    auto cfg = small(20, 30, 10);
    cfg.activation = Activation::builtin("zero");
    auto rep = run_trials(cfg);
    for (auto& s : rep.samples)
        for (double l : s.eigenvalues) EXPECT_EQ(l, 0.0);
    EXPECT_EQ(rep.worst_trace, 0.0);
    EXPECT_EQ(rep.hist.count[0], 4 * 10);
}

TEST(Spectrum, NonFiniteEntriesAreRejected) {
    Eigen::MatrixXd Y = Eigen::MatrixXd::Ones(2, 2);
    Y(1, 0) = std::nan("");
    EXPECT_THROW(gram_eigenvalues(Y), std::invalid_argument);
}

TEST(Spectrum, TraceMomentsMatchEigenvalueMoments) {
    auto cfg = small(40, 50, 30);
    cfg.law = WeightLaw::stable(1.2, 1.0);
    Eigen::MatrixXd Y = build_features(cfg, 2);
    auto eig = gram_eigenvalues(Y);
    auto sm = spectral_moments(eig, 4);
    auto tm = trace_moments(Y, 4);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(sm[k], tm[k], 1e-10 * std::abs(tm[k]));
    EXPECT_NEAR(std::accumulate(eig.begin(), eig.end(), 0.0), kahan_frobenius2(Y), 1e-11 * kahan_frobenius2(Y));
}

TEST(Spectrum, FeaturesAreBoundedByTheSupNorm) {
    auto cfg = small(30, 64, 20);
    cfg.law = WeightLaw::stable(0.5, 1.0);
    Eigen::MatrixXd Y = build_features(cfg, 0);
    const double bound = cfg.activation.sup_norm() / std::sqrt(64.0);
    EXPECT_LE(Y.cwiseAbs().maxCoeff(), bound * (1 + 1e-15));
}

TEST(Spectrum, TrialsAreReproducibleAndIndependent) {
    auto cfg = small(24, 24, 16, 42);
    Eigen::MatrixXd a = build_features(cfg, 1), b = build_features(cfg, 1), c = build_features(cfg, 2);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_NE(trial_seed(42, 1), trial_seed(42, 2));
    auto r1 = run_trials(cfg);
    auto r2 = run_trials(cfg);
    for (int k = 0; k < cfg.k_max; ++k) EXPECT_EQ(r1.mean[k], r2.mean[k]);
}

TEST(Spectrum, ReportStatistics) {
    auto cfg = small(32, 32, 32);
    cfg.trials = 5;
    auto rep = run_trials(cfg);
    ASSERT_EQ(rep.samples.size(), 5u);
    for (int k = 0; k < cfg.k_max; ++k) {
        double mean = 0.0;
        for (auto& s : rep.samples) mean += s.moments[k];
        mean /= 5;
        EXPECT_NEAR(rep.mean[k], mean, 1e-14 * std::abs(mean));
        double var = 0.0;
        for (auto& s : rep.samples) var += (s.moments[k] - mean) * (s.moments[k] - mean);
        var /= 4;
        EXPECT_NEAR(rep.variance[k], var, 1e-12 * var + 1e-300);
        EXPECT_NEAR(rep.stderr_[k], std::sqrt(var / 5), 1e-12 * std::sqrt(var / 5) + 1e-300);
    }
    EXPECT_LT(rep.worst_psd, 1e-10);
    EXPECT_LT(rep.worst_trace, 1e-10);
}

TEST(Spectrum, HistogramDensityIntegratesToOne) {
    auto cfg = small(32, 48, 40);
    cfg.histogram_bins = 17;
    auto rep = run_trials(cfg);
    const auto& h = rep.hist;
    ASSERT_EQ(h.count.size(), 17u);
    double mass = 0.0;
    long total = 0;
    for (std::size_t b = 0; b < h.count.size(); ++b) {
        mass += h.density[b] * (h.hi[b] - h.lo[b]);
        total += h.count[b];
    }
    EXPECT_NEAR(mass, 1.0, 1e-12);
    EXPECT_EQ(total, 4 * 40);
    EXPECT_THROW(histogram(rep.samples, 1), std::invalid_argument);
}

TEST(Spectrum, AuditResidualIsSmall) {
    auto cfg = small(40, 40, 40);
    cfg.audit = true;
    cfg.trials = 1;
    auto rep = run_trials(cfg);
    EXPECT_LT(rep.worst_audit, 1e-12);
}

TEST(Spectrum, ConfigValidation) {
    auto cfg = small(8, 8, 8);
    cfg.p = kDenseCap + 1;
    EXPECT_THROW(run_trials(cfg), CapabilityError);
    cfg = small(8, 8, 8);
    cfg.trials = 0;
    EXPECT_THROW(run_trials(cfg), ConfigError);
    cfg = small(8, 8, 8);
    cfg.histogram_bins = 1;
    EXPECT_THROW(run_trials(cfg), ConfigError);
}

TEST(Spectrum, GaussianFirstMomentConcentratesOnTheta1) {
    // E m_hat_1 = E f(w.x)^2 with w.x ~ N(0, |w|^2 sigma_x^2) and |w|^2 near sigma_w^2.
    auto cfg = small(400, 400, 200, 9);
    cfg.trials = 3;
    auto rep = run_trials(cfg);
    EXPECT_NEAR(rep.mean[0], std::pow(5.0, -1.5), 0.01);
}

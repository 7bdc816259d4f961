#include <gtest/gtest.h>

#include <cmath>

#include "ck/weight_laws.hpp"

using namespace ck;

namespace {
constexpr double kPiT = 3.14159265358979323846;
}

TEST(WeightLaws, BetaAlphaOracles) {
    EXPECT_NEAR(beta_alpha(2.0), 1.0, 1e-15);
    EXPECT_NEAR(beta_alpha(1.0), std::sqrt(2.0 / kPiT), 1e-15);
    EXPECT_NEAR(beta_alpha(4.0), 3.0, 1e-14);
    EXPECT_NEAR(beta_alpha(0.0), 1.0, 1e-15);
}

TEST(WeightLaws, ParameterValidationNamesTheKey) {
    auto key_of = [](auto fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            return e.key();
        }
        return std::string("none");
    };
    EXPECT_EQ(key_of([] { WeightLaw::stable(2.5, 1.0); }), "alpha");
    EXPECT_EQ(key_of([] { WeightLaw::stable(0.0, 1.0); }), "alpha");
    EXPECT_EQ(key_of([] { WeightLaw::stable(1.0, -1.0); }), "sigma");
    EXPECT_EQ(key_of([] { WeightLaw::sparse(1.0); }), "q");
    EXPECT_EQ(key_of([] { WeightLaw::sparse(0.5, ZLaw::gaussian, 0.0); }), "sigma_z");
    EXPECT_EQ(key_of([] { WeightLaw::gaussian(0.0); }), "sigma_w");
}

TEST(WeightLaws, GaussianConventionConverter) {
    auto g = WeightLaw::gaussian(1.7);
    auto s = WeightLaw::stable(2.0, WeightLaw::stable_sigma_from_sigma_w(1.7));
    EXPECT_TRUE(g.is_gaussian_family());
    EXPECT_TRUE(s.is_gaussian_family());
    EXPECT_NEAR(s.gaussian_sigma_w(), 1.7, 1e-15);
    EXPECT_NEAR(g.stable_sigma(), 1.7 / std::sqrt(2.0), 1e-15);
    for (double l : {0.1, 0.5, 2.0}) EXPECT_NEAR(g.phi(l), s.phi(l), 1e-14);
    for (double r2 : {0.3, 1.0, 4.0})
        EXPECT_NEAR(g.expected_phi_gaussian_norm2(r2, 0.8), s.expected_phi_gaussian_norm2(r2, 0.8), 1e-14);
    EXPECT_NEAR(g.kappa(0.8), s.kappa(0.8), 1e-14);
    EXPECT_NEAR(g.kappa(1.0), 1.7 * 1.7 / 2.0, 1e-14);
    EXPECT_THROW(WeightLaw::stable(1.5, 1.0).gaussian_sigma_w(), CapabilityError);
    EXPECT_THROW(WeightLaw::sparse(0.3).stable_alpha(), CapabilityError);
}

TEST(WeightLaws, LimitExponents) {
    auto st = WeightLaw::stable(1.5, 0.7);
    EXPECT_NEAR(st.phi(2.0), -std::pow(0.7, 1.5) * std::pow(2.0, 1.5), 1e-14);
    auto sp = WeightLaw::sparse(0.4);
    EXPECT_NEAR(sp.phi(1.0), 0.4 * (std::cos(1.0) - 1.0), 1e-15);
    auto sg = WeightLaw::sparse(0.4, ZLaw::gaussian, 2.0);
    EXPECT_NEAR(sg.phi(1.0), 0.4 * (std::exp(-2.0) - 1.0), 1e-15);
    // n log(1 + (q/n)(c - 1)) tends to q (c - 1).
    EXPECT_NEAR(sp.phi_n(1.0, 100000000), sp.phi(1.0), 1e-8);
    EXPECT_GT(std::abs(sp.phi_n(1.0, 2) - sp.phi(1.0)), 1e-3);
    EXPECT_EQ(st.phi_n(1.3, 5), st.phi(1.3));
}

TEST(WeightLaws, ExpectedExponentClosedForms) {
    const double sx = 1.3;
    auto st = WeightLaw::stable(1.0, 0.9);
    std::vector<double> a{0.6, -0.8};  // |a| = 1
    EXPECT_NEAR(st.expected_phi_gaussian(a, sx), -st.kappa(sx), 1e-14);
    EXPECT_NEAR(st.kappa(sx), 0.9 * sx * std::sqrt(2.0 / kPiT), 1e-14);
    auto sp = WeightLaw::sparse(0.5);
    EXPECT_NEAR(sp.expected_phi_gaussian_norm2(2.0, 1.0), 0.5 * (std::exp(-1.0) - 1.0), 1e-15);
    auto sg = WeightLaw::sparse(0.5, ZLaw::gaussian, 1.0);
    EXPECT_NEAR(sg.expected_phi_gaussian_norm2(3.0, 1.0), 0.5 * (0.5 - 1.0), 1e-15);
    EXPECT_EQ(st.expected_phi_gaussian_norm2(0.0, sx), 0.0);
}

TEST(WeightLaws, ExpectedExponentAgreesWithMonteCarlo) {
    // E Phi(<a, X>) over X ~ N(0, sx^2 I), sampled directly.
    const double sx = 0.9;
    std::vector<double> a{1.0, 0.5, -0.3};
    for (auto law : {WeightLaw::stable(1.5, 0.8), WeightLaw::stable(0.5, 1.0), WeightLaw::sparse(0.3)}) {
        Engine rng = make_engine(17, {1});
        const int N = 200000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < N; ++i) {
            double t = 0.0;
            for (double v : a) t += v * sx * standard_normal(rng);
            double ph = law.phi(t);
            s += ph;
            s2 += ph * ph;
        }
        double mean = s / N, se = std::sqrt((s2 / N - mean * mean) / N);
        EXPECT_NEAR(law.expected_phi_gaussian(a, sx), mean, 5.0 * se) << law.key();
    }
}

TEST(WeightLaws, StableSamplerCharacteristicFunction) {
    for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
        Engine rng = make_engine(5, {static_cast<std::uint64_t>(alpha * 10)});
        const int N = 200000;
        std::vector<double> xs(N);
        for (auto& x : xs) x = WeightLaw::standard_stable(alpha, rng);
        for (double l : {0.3, 1.0, 2.0}) {
            double s = 0.0;
            for (double x : xs) s += std::cos(l * x);
            // Standard error of a mean of cosines is at most 1 / sqrt(N).
            EXPECT_NEAR(s / N, std::exp(-std::pow(l, alpha)), 5.0 / std::sqrt(N)) << "alpha " << alpha;
        }
    }
}

TEST(WeightLaws, EntryScalingAtWidthN) {
    const long n = 64;
    Engine rng = make_engine(3, {});
    auto g = WeightLaw::gaussian(1.5);
    auto W = g.sample_weights(200, n, rng);
    double var = W.array().square().mean();
    EXPECT_NEAR(var, 1.5 * 1.5 / n, 5.0 * std::sqrt(2.0 / W.size()) * 1.5 * 1.5 / n);

    auto sp = WeightLaw::sparse(0.5);
    auto S = sp.sample_weights(400, n, rng);
    double nz = (S.array() != 0.0).cast<double>().mean();
    const double pq = 0.5 / n;
    EXPECT_NEAR(nz, pq, 5.0 * std::sqrt(pq * (1 - pq) / S.size()));
    EXPECT_TRUE(((S.array() == 0.0) || (S.array().abs() == 1.0)).all());

    // Row sums of a stable matrix: sum of n entries of scale sigma n^{-1/alpha} is sigma A.
    auto st = WeightLaw::stable(1.0, 0.5);
    auto M = st.sample_weights(20000, n, rng);
    Eigen::VectorXd rs = M.rowwise().sum();
    double c = 0.0;
    for (long i = 0; i < rs.size(); ++i) c += std::cos(rs(i));
    EXPECT_NEAR(c / rs.size(), std::exp(-0.5), 5.0 / std::sqrt(static_cast<double>(rs.size())));
}

TEST(WeightLaws, SamplingIsDeterministicPerSeed) {
    auto law = WeightLaw::stable(1.2, 1.0);
    Engine a = make_engine(99, {4, 2}), b = make_engine(99, {4, 2}), c = make_engine(99, {2, 4});
    auto A = law.sample_weights(5, 7, a);
    EXPECT_EQ(A, law.sample_weights(5, 7, b));
    EXPECT_NE(A, law.sample_weights(5, 7, c));
    EXPECT_THROW(law.sample_weights(0, 3, a), std::invalid_argument);
}

TEST(WeightLaws, KeysAreCanonical) {
    EXPECT_EQ(WeightLaw::stable(1.5, 1.0).key(), "stable(alpha=1.5,sigma=1)");
    EXPECT_EQ(WeightLaw::sparse(0.25).key(), "sparse(q=0.25,z=rademacher)");
    EXPECT_EQ(WeightLaw::gaussian(2.0).key(), "gauss(sigma_w=2)");
}

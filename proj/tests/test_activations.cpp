#include <gtest/gtest.h>

#include <cmath>

#include "ck/activations.hpp"

using namespace ck;

TEST(Activations, UnknownNameAndBadParametersNameTheKey) {
    try {
        Activation::builtin("relu");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "activation");
    }
    try {
        Activation::builtin("arctan", -1.0);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "cutoff");
    }
    try {
        Activation::builtin("tanh", 8.0, 1.0, 0.0);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "act_scale");
    }
}

TEST(Activations, BuiltinsAreOdd) {
    for (auto& name : Activation::builtin_names()) {
        auto f = Activation::builtin(name, 8.0, 1.7, 0.6);
        for (double x : {0.0, 0.3, 1.1, 2.5, 7.0}) EXPECT_DOUBLE_EQ(f(-x), -f(x)) << name;
    }
}

TEST(Activations, SupNorms) {
    EXPECT_NEAR(Activation::builtin("gauss_odd").sup_norm(), std::exp(-0.5) / std::sqrt(2.0), 1e-15);
    EXPECT_TRUE(std::isinf(Activation::builtin("identity").sup_norm()));
    EXPECT_EQ(Activation::builtin("zero").sup_norm(), 0.0);
    auto sg = Activation::builtin("sin_gauss");
    double best = 0.0;
    for (int i = 0; i <= 200000; ++i) best = std::max(best, std::abs(sg(i * 1e-5)));
    EXPECT_NEAR(sg.sup_norm(), best, 1e-9);
    EXPECT_NEAR(Activation::builtin("gauss_odd", 8.0, -2.0).sup_norm(), 2.0 * std::exp(-0.5) / std::sqrt(2.0), 1e-15);
}

TEST(Activations, ThetaOraclesForGaussOdd) {
    auto f = Activation::builtin("gauss_odd");
    // E[Z^2 exp(-2 Z^2)] = (1 + 4)^{-3/2}; E[Z^2 exp(-Z^2)] = (1 + 2)^{-3/2} at s = 1.
    EXPECT_NEAR(theta1(f, 1.0), std::pow(5.0, -1.5), 1e-14);
    EXPECT_NEAR(theta2(f, 1.0), std::pow(3.0, -3.0), 1e-14);
    // General s: theta1 = s^2 (1 + 4 s^2)^{-3/2}, theta2 = s^2 (1 + 2 s^2)^{-3}.
    const double s = 0.7;
    EXPECT_NEAR(theta1(f, s), s * s * std::pow(1 + 4 * s * s, -1.5), 1e-14);
    EXPECT_NEAR(theta2(f, s), s * s * std::pow(1 + 2 * s * s, -3.0), 1e-14);
    EXPECT_THROW(theta1(f, 0.0), std::invalid_argument);
}

TEST(Activations, ThetaOraclesForIdentity) {
    auto id = Activation::builtin("identity");
    EXPECT_NEAR(theta1(id, 1.3), 1.69, 1e-12);
    EXPECT_NEAR(theta2(id, 1.3), 1.69, 1e-12);
}

TEST(Activations, ClosedFormTransformsMatchQuadrature) {
    for (auto name : {"gauss_odd", "sin_gauss"}) {
        auto f = Activation::builtin(name, 8.0, 1.2, 0.8);
        for (double t : {0.0, 0.4, 1.5, 3.0, 6.0}) {
            // F(t) = 2 int_0^inf f(x) sin(t x) dx by a fine midpoint rule.
            double h = 1e-4, sum = 0.0, sq = 0.0;
            for (double x = 0.5 * h; x < 12.0; x += h) {
                sum += f(x) * std::sin(t * x) * h;
                sq += f(x) * f(x) * std::cos(t * x) * h;
            }
            EXPECT_NEAR(f.fourier_F(t), 2.0 * sum, 1e-9) << name << " t=" << t;
            EXPECT_NEAR(f.fsq_hat(t), 2.0 * sq, 1e-9) << name << " t=" << t;
            EXPECT_DOUBLE_EQ(f.fhat(t).real(), 0.0);
            EXPECT_DOUBLE_EQ(f.fhat(t).imag(), -f.fourier_F(t));
        }
    }
}

TEST(Activations, NumericTransformsOfCutoffActivations) {
    for (auto name : {"arctan", "tanh"}) {
        auto f = Activation::builtin(name, 3.0);
        for (double t : {0.5, 2.0}) {
            double h = 1e-4, sum = 0.0;
            for (double x = 0.5 * h; x < 30.0; x += h) sum += f(x) * std::sin(t * x) * h;
            EXPECT_NEAR(f.fourier_F(t), 2.0 * sum, 1e-8) << name;
        }
    }
    EXPECT_THROW(Activation::builtin("identity").fourier_F(1.0), CapabilityError);
}

TEST(Activations, FhatL1) {
    auto f = Activation::builtin("gauss_odd");
    EXPECT_NEAR(f.fhat_l1(), 2.0 * kSqrtPi, 1e-15);
    // Trapezoid rule on the table: the leading error is -(h^2 / 12) F'(0) per half line, F'(0) = sqrt(pi) / 2.
    const auto& tab = f.fourier_table();
    EXPECT_NEAR(tab.l1, 2.0 * kSqrtPi - tab.h * tab.h / 6.0 * kSqrtPi / 2.0, 1e-9);
    auto g = Activation::builtin("sin_gauss");
    EXPECT_GT(g.fhat_l1(), 0.0);
}

TEST(Activations, PlancherelForGaussOdd) {
    // (1 / 2 pi) int F^2 = int f^2 = sqrt(pi / 2) / 4.
    auto f = Activation::builtin("gauss_odd");
    const auto& tab = f.fourier_table();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < tab.F.size(); ++i)
        s += 0.5 * tab.h * (tab.F[i] * tab.F[i] + tab.F[i + 1] * tab.F[i + 1]);
    EXPECT_NEAR(2.0 * s / (2.0 * kPi), std::sqrt(kPi / 2.0) / 4.0, 1e-8);
}

TEST(Activations, GaussianSmoothingClosedForm) {
    for (auto name : {"gauss_odd", "sin_gauss"}) {
        auto f = Activation::builtin(name, 8.0, 1.3, 0.7);
        for (int m = 0; m <= 4; ++m)
            for (double c : {-1.5, 0.0, 0.6})
                for (double v : {0.0, 0.2, 4.0}) {
                    double want;
                    if (v == 0.0) {
                        want = std::pow(f(c), m);
                    } else {
                        double h = 1e-3;
                        want = 0.0;
                        for (double x = -25.0; x <= 25.0; x += h)
                            want += h * std::pow(f(x), m) * std::exp(-(x - c) * (x - c) / (2 * v)) /
                                    std::sqrt(2 * kPi * v);
                    }
                    EXPECT_NEAR(f.smoothed_power(m, c, v), want, 1e-12) << name << " m=" << m;
                }
    }
    EXPECT_THROW(Activation::builtin("tanh").smoothed_power(1, 0.0, 1.0), CapabilityError);
    EXPECT_FALSE(Activation::builtin("arctan").has_gaussian_smoothing());
}

TEST(Activations, FourierDecayAudit) {
    // F(t) (1 + t)^4 = (sqrt(pi) / 2) t e^{-t^2 / 4} (1 + t)^4 decreases on [8, 16].
    const double want = kSqrtPi / 2.0 * 8.0 * std::exp(-16.0) * std::pow(9.0, 4);
    EXPECT_NEAR(fourier_decay_audit(Activation::builtin("gauss_odd")), want, 1e-12 * want);
}

TEST(Activations, KeysDistinguishParameters) {
    EXPECT_NE(Activation::builtin("arctan", 8.0).key(), Activation::builtin("arctan", 4.0).key());
    EXPECT_EQ(Activation::builtin("gauss_odd", 8.0).key(), Activation::builtin("gauss_odd", 4.0).key());
    EXPECT_TRUE(Activation::builtin("zero").is_zero());
    EXPECT_TRUE(Activation::builtin("identity").test_only());
}

#ifndef CK_ACTIVATIONS_HPP
#define CK_ACTIVATIONS_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ck/errors.hpp"
#include "ck/quadrature.hpp"

namespace ck {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrtPi = 1.77245385090551602730;
inline constexpr double kDefaultCutoff = 8.0;

enum class ActivationBase { zero, identity, gauss_odd, sin_gauss, arctan, tanh };

// Tabulated odd real function F with f_hat(t) = -i F(t), on t in [-T, T].
struct FourierTable {
    double h = 0.0;
    double T = 0.0;
    std::vector<double> F;     // F(i h), i = 0..N
    std::vector<double> cdf;   // cumulative |F| mass over [0, i h] cells (trapezoid), normalized at the end
    double l1 = 0.0;           // integral of |F| over the whole real line

    double interp(double t) const {
        double a = std::abs(t);
        if (a >= T) return 0.0;
        double x = a / h;
        std::size_t i = static_cast<std::size_t>(x);
        double frac = x - static_cast<double>(i);
        double v = F[i] + frac * (F[i + 1] - F[i]);
        return t < 0 ? -v : v;
    }
};

// An odd activation f(x) = amplitude * base(scale * x). Arctan and tanh carry a Gaussian
// soft cutoff exp(-(x / cutoff)^2) in base coordinates so that f_hat exists.
class Activation {
public:
    static std::vector<std::string> builtin_names() {
        return {"zero", "identity", "gauss_odd", "sin_gauss", "arctan", "tanh"};
    }

    static Activation builtin(const std::string& name, double cutoff = kDefaultCutoff, double amplitude = 1.0,
                              double scale = 1.0) {
        Activation a;
        if (name == "zero")
            a.base_ = ActivationBase::zero;
        else if (name == "identity")
            a.base_ = ActivationBase::identity;
        else if (name == "gauss_odd")
            a.base_ = ActivationBase::gauss_odd;
        else if (name == "sin_gauss")
            a.base_ = ActivationBase::sin_gauss;
        else if (name == "arctan")
            a.base_ = ActivationBase::arctan;
        else if (name == "tanh")
            a.base_ = ActivationBase::tanh;
        else
            throw ConfigError("activation", "unknown activation '" + name + "'");
        if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw ConfigError("cutoff", "cutoff must be positive");
        if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("act_scale", "scale must be positive");
        if (!std::isfinite(amplitude)) throw ConfigError("act_amplitude", "amplitude must be finite");
        a.name_ = name;
        a.cutoff_ = cutoff;
        a.amplitude_ = amplitude;
        a.scale_ = scale;
        a.table_state_ = std::make_shared<TableState>();
        return a;
    }

    const std::string& name() const { return name_; }
    ActivationBase base() const { return base_; }
    double cutoff() const { return cutoff_; }
    double amplitude() const { return amplitude_; }
    double scale() const { return scale_; }
    bool has_cutoff() const { return base_ == ActivationBase::arctan || base_ == ActivationBase::tanh; }
    bool test_only() const { return base_ == ActivationBase::identity; }
    bool is_zero() const { return base_ == ActivationBase::zero || amplitude_ == 0.0; }
    bool fhat_closed_form() const {
        return base_ == ActivationBase::zero || base_ == ActivationBase::gauss_odd ||
               base_ == ActivationBase::sin_gauss;
    }
    bool has_fourier() const { return base_ != ActivationBase::identity; }

    std::string key() const {
        std::ostringstream os;
        os.precision(17);
        os << name_ << "(a=" << amplitude_ << ",b=" << scale_;
        if (has_cutoff()) os << ",X0=" << cutoff_;
        os << ")";
        return os.str();
    }

    std::string smoothness_note() const {
        switch (base_) {
            case ActivationBase::identity: return "linear, unbounded: test-only";
            case ActivationBase::arctan:
            case ActivationBase::tanh: return "analytic, with Gaussian soft cutoff for integrability";
            default: return "entire and rapidly decaying";
        }
    }

    double operator()(double x) const { return amplitude_ * base_value(scale_ * x); }

    // Supremum norm. For cutoff activations this is the bound of the raw function.
    double sup_norm() const {
        double s = 0.0;
        switch (base_) {
            case ActivationBase::zero: s = 0.0; break;
            case ActivationBase::identity: return std::numeric_limits<double>::infinity();
            case ActivationBase::gauss_odd: s = std::exp(-0.5) / std::sqrt(2.0); break;
            case ActivationBase::sin_gauss: s = sin_gauss_sup(); break;
            case ActivationBase::arctan: s = kPi / 2.0; break;
            case ActivationBase::tanh: s = 1.0; break;
        }
        return std::abs(amplitude_) * s;
    }

    // f_hat(t) = integral of f(x) exp(-i t x) dx (purely imaginary for odd f).
    std::complex<double> fhat(double t) const { return {0.0, -fourier_F(t)}; }

    // F(t) with f_hat(t) = -i F(t); F(t) = 2 * integral_0^inf f(x) sin(t x) dx.
    double fourier_F(double t) const {
        if (!has_fourier()) throw CapabilityError("activation '" + name_ + "' has no Fourier transform");
        const double u = t / scale_;
        return amplitude_ / scale_ * base_F(u);
    }

    // Fourier transform of f^2 (real and even).
    double fsq_hat(double t) const {
        if (!has_fourier()) throw CapabilityError("activation '" + name_ + "' has no Fourier transform");
        const double u = t / scale_;
        return amplitude_ * amplitude_ / scale_ * base_sq_hat(u);
    }

    // True when E f(c + s G)^m has a closed form (Gaussian-times-trigonometric-polynomial bases).
    bool has_gaussian_smoothing() const {
        return base_ == ActivationBase::zero || base_ == ActivationBase::gauss_odd ||
               base_ == ActivationBase::sin_gauss;
    }

    // E f(c + sqrt(v) G)^m for G ~ N(0, 1), m >= 0, v >= 0.
    double smoothed_power(int m, double c, double v) const {
        if (m < 0) throw std::invalid_argument("smoothed_power needs m >= 0");
        if (!(v >= 0.0)) throw std::invalid_argument("smoothed_power needs v >= 0");
        if (m == 0) return 1.0;
        if (!has_gaussian_smoothing())
            throw CapabilityError("activation '" + name_ + "' has no closed-form Gaussian smoothing");
        if (base_ == ActivationBase::zero) return 0.0;
        // In base coordinates x = scale * y: x ~ N(b c, b^2 v) times exp(-m x^2) is again Gaussian.
        const double b = scale_;
        const double mu0 = b * c, v0 = b * b * v;
        const double D = 1.0 + 2.0 * m * v0;
        const double pref = std::pow(amplitude_, m) * std::exp(-m * mu0 * mu0 / D) / std::sqrt(D);
        const double mu = mu0 / D, var = v0 / D;
        if (base_ == ActivationBase::gauss_odd) {
            // E x^m under N(mu, var).
            double sum = 0.0, binom = 1.0, dfact = 1.0;
            for (int j = 0; j <= m; ++j) {
                if (j > 0) binom = binom * (m - j + 1) / j;
                if (j % 2 == 0) {
                    if (j >= 2) dfact *= (j - 1);
                    sum += binom * std::pow(mu, m - j) * std::pow(var, j / 2) * dfact;
                }
            }
            return pref * sum;
        }
        // sin^m x = (2i)^{-m} sum_j binom(m, j) (-1)^j exp(i (m - 2j) x).
        std::complex<double> sum = 0.0;
        double binom = 1.0;
        for (int j = 0; j <= m; ++j) {
            if (j > 0) binom = binom * (m - j + 1) / j;
            const double w = m - 2.0 * j;
            const double sign = (j % 2 == 0) ? 1.0 : -1.0;
            sum += sign * binom * std::polar(std::exp(-0.5 * w * w * var), w * mu);
        }
        sum /= std::pow(std::complex<double>(0.0, 2.0), m);
        return pref * sum.real();
    }

    // Table of F on a fine grid with the integral of |F|; built once per activation.
    const FourierTable& fourier_table() const {
        std::call_once(table_state_->once, [this] { table_state_->table = build_table(); });
        return table_state_->table;
    }

    double fhat_l1() const {
        if (base_ == ActivationBase::gauss_odd) return std::abs(amplitude_) * 2.0 * kSqrtPi;
        return fourier_table().l1;
    }

private:
    struct TableState {
        std::once_flag once;
        FourierTable table;
    };

    double envelope_half_width() const { return 6.0 * cutoff_; }

    double base_value(double x) const {
        switch (base_) {
            case ActivationBase::zero: return 0.0;
            case ActivationBase::identity: return x;
            case ActivationBase::gauss_odd: return x * std::exp(-x * x);
            case ActivationBase::sin_gauss: return std::sin(x) * std::exp(-x * x);
            case ActivationBase::arctan: {
                double r = x / cutoff_;
                return std::atan(x) * std::exp(-r * r);
            }
            case ActivationBase::tanh: {
                double r = x / cutoff_;
                return std::tanh(x) * std::exp(-r * r);
            }
        }
        return 0.0;
    }

    static double sin_gauss_sup() {
        // Maximum of sin(x) exp(-x^2) on [0, 1] by golden-section search.
        double a = 0.0, b = 1.0;
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        auto f = [](double x) { return std::sin(x) * std::exp(-x * x); };
        for (int i = 0; i < 200; ++i) {
            double c = b - g * (b - a), d = a + g * (b - a);
            if (f(c) > f(d))
                b = d;
            else
                a = c;
        }
        return f(0.5 * (a + b));
    }

    double base_F(double u) const {
        switch (base_) {
            case ActivationBase::zero: return 0.0;
            case ActivationBase::gauss_odd: return kSqrtPi / 2.0 * u * std::exp(-u * u / 4.0);
            case ActivationBase::sin_gauss:
                return kSqrtPi / 2.0 * (std::exp(-(u - 1.0) * (u - 1.0) / 4.0) - std::exp(-(u + 1.0) * (u + 1.0) / 4.0));
            default: break;
        }
        double err = 0.0;
        const double L = envelope_half_width();
        auto integrand = [&](double x) { return base_value(x) * std::sin(u * x); };
        double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, L, 18, 1e-13, &err);
        if (!(err <= 1e-9)) throw QuadratureError("Fourier transform quadrature did not converge", err);
        return 2.0 * v;
    }

    double base_sq_hat(double u) const {
        switch (base_) {
            case ActivationBase::zero: return 0.0;
            case ActivationBase::gauss_odd:
                // x^2 exp(-2 x^2)
                return std::sqrt(kPi / 2.0) * std::exp(-u * u / 8.0) * (0.25 - u * u / 16.0);
            case ActivationBase::sin_gauss: {
                // (1 - cos 2x)/2 * exp(-2 x^2)
                auto g = [](double v) { return std::sqrt(kPi / 2.0) * std::exp(-v * v / 8.0); };
                return 0.5 * g(u) - 0.25 * (g(u - 2.0) + g(u + 2.0));
            }
            default: break;
        }
        double err = 0.0;
        const double L = envelope_half_width();
        auto integrand = [&](double x) {
            double f = base_value(x);
            return f * f * std::cos(u * x);
        };
        double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, L, 18, 1e-13, &err);
        if (!(err <= 1e-9)) throw QuadratureError("Fourier transform of f^2 did not converge at u = " + std::to_string(u), err);
        return 2.0 * v;
    }

    FourierTable build_table() const {
        if (!has_fourier()) throw CapabilityError("activation '" + name_ + "' has no Fourier transform");
        FourierTable tab;
        // F decays at least exponentially for every builtin; 60 (in base units) is far in the tail.
        tab.T = 60.0 * scale_;
        const int N = 12000;
        tab.h = tab.T / N;
        tab.F.resize(N + 1);
        for (int i = 0; i <= N; ++i) tab.F[i] = fourier_F(i * tab.h);
        tab.cdf.assign(N + 1, 0.0);
        for (int i = 1; i <= N; ++i)
            tab.cdf[i] = tab.cdf[i - 1] + 0.5 * tab.h * (std::abs(tab.F[i - 1]) + std::abs(tab.F[i]));
        tab.l1 = 2.0 * tab.cdf[N];
        return tab;
    }

    std::string name_;
    ActivationBase base_ = ActivationBase::zero;
    double cutoff_ = kDefaultCutoff;
    double amplitude_ = 1.0;
    double scale_ = 1.0;
    std::shared_ptr<TableState> table_state_;
};

// theta1 = E f(Z)^2 and theta2 = (E[Z f(Z)])^2 / s^2 for Z ~ N(0, s^2). The second
// equals (s E f'(Z))^2 by Stein's identity; see the decisions note in README.
inline double theta1(const Activation& f, double s, int nodes = kHermiteNodes) {
    if (!(s > 0.0)) throw std::invalid_argument("theta1 needs s > 0");
    return gaussian_expectation([&](double z) { double v = f(z); return v * v; }, s, nodes);
}

inline double theta2(const Activation& f, double s, int nodes = kHermiteNodes) {
    if (!(s > 0.0)) throw std::invalid_argument("theta2 needs s > 0");
    double m = gaussian_expectation([&](double z) { return z * f(z); }, s, nodes);
    return m * m / (s * s);
}

// max over |t| in [lo, hi] of |f_hat(t)| (1 + |t|)^ell, sampled on a grid.
inline double fourier_decay_audit(const Activation& f, double lo = 8.0, double hi = 16.0, int ell = 4) {
    double best = 0.0;
    for (int i = 0; i <= 256; ++i) {
        double t = lo + (hi - lo) * i / 256.0;
        best = std::max(best, std::abs(f.fourier_F(t)) * std::pow(1.0 + t, ell));
    }
    return best;
}

}  // namespace ck

#endif

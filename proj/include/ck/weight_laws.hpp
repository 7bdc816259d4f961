#ifndef CK_WEIGHT_LAWS_HPP
#define CK_WEIGHT_LAWS_HPP

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ck/errors.hpp"
#include "ck/rng.hpp"

namespace ck {

enum class LawKind { stable, sparse, gauss };
enum class ZLaw { rademacher, gaussian };

// beta_alpha = E|G|^alpha for G ~ N(0, 1).
inline double beta_alpha(double alpha) {
    return std::pow(2.0, alpha / 2.0) * std::tgamma((alpha + 1.0) / 2.0) / std::sqrt(3.14159265358979323846);
}

// Weight distribution described by its limiting characteristic exponent Phi.
//   stable:  Phi(l) = -sigma^alpha |l|^alpha, entries sigma n^{-1/alpha} A with A standard SaS
//   sparse:  Phi(l) = q (E exp(i l Z) - 1), entries Bernoulli(q/n) Z
//   gauss:   Phi(l) = -sigma_w^2 l^2 / 2, entries N(0, sigma_w^2 / n)
class WeightLaw {
public:
    static WeightLaw stable(double alpha, double sigma) {
        if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("alpha", "alpha must lie in (0, 2]");
        if (!(sigma > 0.0)) throw ConfigError("sigma", "sigma must be positive");
        WeightLaw w;
        w.kind_ = LawKind::stable;
        w.alpha_ = alpha;
        w.sigma_ = sigma;
        return w;
    }
    static WeightLaw sparse(double q, ZLaw z = ZLaw::rademacher, double sigma_z = 1.0) {
        if (!(q > 0.0 && q < 1.0)) throw ConfigError("q", "q must lie in (0, 1)");
        if (!(sigma_z > 0.0)) throw ConfigError("sigma_z", "sigma_z must be positive");
        WeightLaw w;
        w.kind_ = LawKind::sparse;
        w.q_ = q;
        w.z_ = z;
        w.sigma_z_ = sigma_z;
        return w;
    }
    static WeightLaw gaussian(double sigma_w) {
        if (!(sigma_w > 0.0)) throw ConfigError("sigma_w", "sigma_w must be positive");
        WeightLaw w;
        w.kind_ = LawKind::gauss;
        w.alpha_ = 2.0;
        w.sigma_w_ = sigma_w;
        return w;
    }

    LawKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double sigma() const { return sigma_; }
    double q() const { return q_; }
    ZLaw z_law() const { return z_; }
    double sigma_z() const { return sigma_z_; }

    // True for the Gaussian law and for the stable law with alpha = 2.
    bool is_gaussian_family() const { return kind_ == LawKind::gauss || (kind_ == LawKind::stable && alpha_ == 2.0); }

    // The one converter between conventions: stable(2, sigma) has sigma_w = sqrt(2) sigma.
    double gaussian_sigma_w() const {
        if (kind_ == LawKind::gauss) return sigma_w_;
        if (kind_ == LawKind::stable && alpha_ == 2.0) return std::sqrt(2.0) * sigma_;
        throw CapabilityError("gaussian_sigma_w: law is not Gaussian");
    }
    static double stable_sigma_from_sigma_w(double sigma_w) { return sigma_w / std::sqrt(2.0); }

    // Stable parameters (alpha, sigma) for stable laws and for Gaussian via the converter.
    double stable_alpha() const {
        if (kind_ == LawKind::sparse) throw CapabilityError("sparse law has no stable index");
        return kind_ == LawKind::gauss ? 2.0 : alpha_;
    }
    double stable_sigma() const {
        if (kind_ == LawKind::sparse) throw CapabilityError("sparse law has no stable scale");
        return kind_ == LawKind::gauss ? stable_sigma_from_sigma_w(sigma_w_) : sigma_;
    }

    // E exp(i l Z) for the sparse mark law.
    double z_char(double l) const {
        return z_ == ZLaw::rademacher ? std::cos(l) : std::exp(-0.5 * sigma_z_ * sigma_z_ * l * l);
    }

    double phi(double l) const {
        switch (kind_) {
            case LawKind::stable: return -std::pow(sigma_, alpha_) * std::pow(std::abs(l), alpha_);
            case LawKind::sparse: return q_ * (z_char(l) - 1.0);
            case LawKind::gauss: return -0.5 * sigma_w_ * sigma_w_ * l * l;
        }
        return 0.0;
    }

    // Finite-n exponent n log E exp(i l W_ij); a diagnostic only.
    double phi_n(double l, long n) const {
        if (n < 1) throw std::invalid_argument("phi_n needs n >= 1");
        if (kind_ != LawKind::sparse) return phi(l);
        double arg = 1.0 + (q_ / static_cast<double>(n)) * (z_char(l) - 1.0);
        if (!(arg > 0.0)) throw std::domain_error("phi_n: nonpositive characteristic function");
        return static_cast<double>(n) * std::log(arg);
    }

    // E_X[Phi(sum_v a_v X_v)] for X_v i.i.d. N(0, sigma_x^2).
    double expected_phi_gaussian(const std::vector<double>& a, double sigma_x) const {
        double r2 = 0.0;
        for (double v : a) r2 += v * v;
        return expected_phi_gaussian_norm2(r2, sigma_x);
    }
    // Same, in terms of |a|^2.
    double expected_phi_gaussian_norm2(double norm2, double sigma_x) const {
        if (norm2 == 0.0) return 0.0;
        switch (kind_) {
            case LawKind::stable:
                return -std::pow(sigma_ * sigma_x, alpha_) * beta_alpha(alpha_) * std::pow(norm2, alpha_ / 2.0);
            case LawKind::gauss: return -0.5 * sigma_w_ * sigma_w_ * sigma_x * sigma_x * norm2;
            case LawKind::sparse: {
                // sum a_v X_v ~ N(0, sigma_x^2 |a|^2), so E e^{i Z <a,X>} = E exp(-sigma_x^2 |a|^2 Z^2 / 2).
                double v = sigma_x * sigma_x * norm2;
                double c = z_ == ZLaw::rademacher ? std::exp(-0.5 * v) : 1.0 / std::sqrt(1.0 + sigma_z_ * sigma_z_ * v);
                return q_ * (c - 1.0);
            }
        }
        return 0.0;
    }

    // kappa with E_X[Phi(<a,X>)] = -kappa |a|^alpha for stable-type laws.
    double kappa(double sigma_x) const {
        return std::pow(stable_sigma() * sigma_x, stable_alpha()) * beta_alpha(stable_alpha());
    }

    // Standard symmetric alpha-stable variate with E exp(i l A) = exp(-|l|^alpha)
    // (Chambers-Mallows-Stuck).
    static double standard_stable(double alpha, Engine& rng) {
        const double u = 3.14159265358979323846 * (uniform_open(rng) - 0.5);
        const double e = standard_exponential(rng);
        if (alpha == 1.0) return std::tan(u);
        return std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha) *
               std::pow(std::cos((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
    }

    double sample_mark(Engine& rng) const {
        if (z_ == ZLaw::rademacher) return (rng() >> 63) ? 1.0 : -1.0;
        return sigma_z_ * standard_normal(rng);
    }

    // One entry of the p x n weight matrix at width n.
    double sample_entry(long n, Engine& rng) const {
        switch (kind_) {
            case LawKind::stable:
                return sigma_ * std::pow(static_cast<double>(n), -1.0 / alpha_) * standard_stable(alpha_, rng);
            case LawKind::sparse:
                return uniform_open(rng) < q_ / static_cast<double>(n) ? sample_mark(rng) : 0.0;
            case LawKind::gauss: return sigma_w_ / std::sqrt(static_cast<double>(n)) * standard_normal(rng);
        }
        return 0.0;
    }

    Eigen::MatrixXd sample_weights(long rows, long cols, Engine& rng) const {
        if (rows < 1 || cols < 1) throw std::invalid_argument("sample_weights needs positive dimensions");
        Eigen::MatrixXd W(rows, cols);
        // Row-major fill order so the stream does not depend on Eigen's storage order.
        for (long i = 0; i < rows; ++i)
            for (long j = 0; j < cols; ++j) W(i, j) = sample_entry(cols, rng);
        return W;
    }

    std::string key() const {
        std::ostringstream os;
        os.precision(17);
        switch (kind_) {
            case LawKind::stable: os << "stable(alpha=" << alpha_ << ",sigma=" << sigma_ << ")"; break;
            case LawKind::sparse:
                os << "sparse(q=" << q_ << ",z=" << (z_ == ZLaw::rademacher ? "rademacher" : "gaussian");
                if (z_ == ZLaw::gaussian) os << ",sigma_z=" << sigma_z_;
                os << ")";
                break;
            case LawKind::gauss: os << "gauss(sigma_w=" << sigma_w_ << ")"; break;
        }
        return os.str();
    }

private:
    LawKind kind_ = LawKind::gauss;
    double alpha_ = 2.0;
    double sigma_ = 1.0;
    double sigma_w_ = 1.0;
    double q_ = 0.5;
    ZLaw z_ = ZLaw::rademacher;
    double sigma_z_ = 1.0;
};

}  // namespace ck

#endif

#ifndef CK_SPECTRUM_HPP
#define CK_SPECTRUM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ck/activations.hpp"
#include "ck/errors.hpp"
#include "ck/parallel.hpp"
#include "ck/rng.hpp"
#include "ck/weight_laws.hpp"

namespace ck {

inline constexpr long kDenseCap = 2048;

enum class MatrixRole : std::uint64_t { weights = 1, inputs = 2 };

struct SimConfig {
    long n = 256, m = 256, p = 256;
    WeightLaw law = WeightLaw::gaussian(1.0);
    Activation activation = Activation::builtin("gauss_odd");
    double sigma_x = 1.0;
    long trials = 8;
    std::uint64_t seed = 1;
    int histogram_bins = 50;
    int k_max = 4;
    long dense_cap = kDenseCap;
    bool audit = false;  // residual audit on five eigenpairs per trial

    void validate() const {
        if (n < 1) throw ConfigError("n", "n must be positive");
        if (m < 1) throw ConfigError("m", "m must be positive");
        if (p < 1) throw ConfigError("p", "p must be positive");
        if (p > dense_cap)
            throw CapabilityError("p = " + std::to_string(p) + " exceeds the dense eigen-solve cap " +
                                  std::to_string(dense_cap));
        if (trials < 1) throw ConfigError("trials", "trials must be positive");
        if (histogram_bins < 2) throw ConfigError("bins", "bins must be at least 2");
        if (k_max < 1) throw ConfigError("kmax", "kmax must be positive");
        if (!(sigma_x > 0.0)) throw ConfigError("sigma_x", "sigma_x must be positive");
    }
};

struct SpectrumSample {
    long trial = 0;
    std::uint64_t trial_seed = 0;
    std::vector<double> eigenvalues;  // ascending
    std::vector<double> moments;      // m_hat_1..m_hat_kmax
    double frobenius2 = 0.0;          // ||Y||_F^2 (Kahan-summed)
    double min_eig = 0.0, max_eig = 0.0;
    double audit_residual = 0.0;      // max ||Mv - lambda v|| / ||M||_F over audited pairs
};

inline std::uint64_t trial_seed(std::uint64_t master, long trial) {
    return derive_seed(master, {static_cast<std::uint64_t>(trial)});
}

// Y = f(W X) / sqrt(m) with W ~ law (p x n) and X ~ N(0, sigma_x^2) (n x m).
inline Eigen::MatrixXd build_features(const SimConfig& cfg, long trial) {
    const std::uint64_t ts = trial_seed(cfg.seed, trial);
    Engine rw(derive_seed(ts, {static_cast<std::uint64_t>(MatrixRole::weights)}));
    Engine rx(derive_seed(ts, {static_cast<std::uint64_t>(MatrixRole::inputs)}));
    Eigen::MatrixXd W = cfg.law.sample_weights(cfg.p, cfg.n, rw);
    Eigen::MatrixXd X(cfg.n, cfg.m);
    for (long i = 0; i < cfg.n; ++i)
        for (long j = 0; j < cfg.m; ++j) X(i, j) = cfg.sigma_x * standard_normal(rx);
    Eigen::MatrixXd Y = W * X;
    const double inv = 1.0 / std::sqrt(static_cast<double>(cfg.m));
    for (long j = 0; j < Y.cols(); ++j)
        for (long i = 0; i < Y.rows(); ++i) {
            double v = cfg.activation(Y(i, j)) * inv;
            if (!std::isfinite(v)) throw std::runtime_error("non-finite feature entry");
            Y(i, j) = v;
        }
    return Y;
}

inline double kahan_frobenius2(const Eigen::MatrixXd& Y) {
    double sum = 0.0, c = 0.0;
    for (long j = 0; j < Y.cols(); ++j)
        for (long i = 0; i < Y.rows(); ++i) {
            double y = Y(i, j) * Y(i, j) - c;
            double t = sum + y;
            c = (t - sum) - y;
            sum = t;
        }
    return sum;
}

// Eigenvalues of Y Y^T in ascending order (tridiagonalization + implicit QR).
inline std::vector<double> gram_eigenvalues(const Eigen::MatrixXd& Y, double* audit_residual = nullptr) {
    for (long j = 0; j < Y.cols(); ++j)
        for (long i = 0; i < Y.rows(); ++i)
            if (!std::isfinite(Y(i, j))) throw std::invalid_argument("gram_eigenvalues: non-finite entry");
    Eigen::MatrixXd M = Y * Y.transpose();
    std::vector<double> out(static_cast<std::size_t>(M.rows()));
    if (audit_residual) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::ComputeEigenvectors);
        if (es.info() != Eigen::Success) throw std::runtime_error("eigen-solve did not converge");
        for (long i = 0; i < M.rows(); ++i) out[i] = es.eigenvalues()(i);
        const double fro = std::max(M.norm(), 1e-300);
        double worst = 0.0;
        const long n = M.rows();
        for (long idx : {0L, n / 4, n / 2, (3 * n) / 4, n - 1}) {
            Eigen::VectorXd v = es.eigenvectors().col(idx);
            worst = std::max(worst, (M * v - es.eigenvalues()(idx) * v).norm() / fro);
        }
        *audit_residual = worst;
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw std::runtime_error("eigen-solve did not converge");
        for (long i = 0; i < M.rows(); ++i) out[i] = es.eigenvalues()(i);
    }
    return out;
}

inline std::vector<double> spectral_moments(const std::vector<double>& eig, int k_max) {
    std::vector<double> m(k_max, 0.0);
    for (double l : eig) {
        double pw = 1.0;
        for (int k = 0; k < k_max; ++k) {
            pw *= l;
            m[k] += pw;
        }
    }
    for (auto& v : m) v /= static_cast<double>(eig.size());
    return m;
}

// (1/p) tr M^k by repeated multiplication, for spot checks.
inline std::vector<double> trace_moments(const Eigen::MatrixXd& Y, int k_max) {
    Eigen::MatrixXd M = Y * Y.transpose();
    Eigen::MatrixXd P = M;
    std::vector<double> out;
    for (int k = 1; k <= k_max; ++k) {
        out.push_back(P.trace() / static_cast<double>(M.rows()));
        P = P * M;
    }
    return out;
}

inline SpectrumSample run_trial(const SimConfig& cfg, long trial) {
    SpectrumSample s;
    s.trial = trial;
    s.trial_seed = trial_seed(cfg.seed, trial);
    Eigen::MatrixXd Y = build_features(cfg, trial);
    s.frobenius2 = kahan_frobenius2(Y);
    s.eigenvalues = gram_eigenvalues(Y, cfg.audit ? &s.audit_residual : nullptr);
    s.moments = spectral_moments(s.eigenvalues, cfg.k_max);
    s.min_eig = s.eigenvalues.front();
    s.max_eig = s.eigenvalues.back();
    return s;
}

struct Histogram {
    std::vector<double> lo, hi;
    std::vector<long> count;
    std::vector<double> density;
};

// Equal-width bins on [0, 1.05 max lambda]; density = count / (total * width).
inline Histogram histogram(const std::vector<SpectrumSample>& samples, int bins) {
    if (bins < 2) throw std::invalid_argument("histogram needs at least two bins");
    double top = 0.0;
    long total = 0;
    for (auto& s : samples) {
        for (double l : s.eigenvalues) top = std::max(top, l);
        total += static_cast<long>(s.eigenvalues.size());
    }
    if (total == 0) throw std::invalid_argument("histogram of an empty sample");
    double upper = top > 0.0 ? 1.05 * top : 1.0;
    const double width = upper / bins;
    Histogram h;
    h.count.assign(bins, 0);
    for (auto& s : samples)
        for (double l : s.eigenvalues) {
            long b = static_cast<long>(std::floor(std::max(l, 0.0) / width));
            b = std::clamp<long>(b, 0, bins - 1);
            ++h.count[b];
        }
    for (int b = 0; b < bins; ++b) {
        h.lo.push_back(b * width);
        h.hi.push_back((b + 1) * width);
        h.density.push_back(static_cast<double>(h.count[b]) / (static_cast<double>(total) * width));
    }
    return h;
}

struct SimulationReport {
    std::vector<SpectrumSample> samples;
    std::vector<double> mean, stderr_, variance;  // per k
    Histogram hist;
    double worst_psd = 0.0;    // max over trials of max(0, -min_eig) / max(1, max_eig)
    double worst_trace = 0.0;  // max relative |sum lambda - ||Y||_F^2|
    double worst_audit = 0.0;
};

inline SimulationReport run_trials(const SimConfig& cfg) {
    cfg.validate();
    SimulationReport rep;
    rep.samples.resize(static_cast<std::size_t>(cfg.trials));
    parallel_for(static_cast<std::size_t>(cfg.trials),
                 [&](std::size_t t) { rep.samples[t] = run_trial(cfg, static_cast<long>(t)); });
    const long T = cfg.trials;
    rep.mean.assign(cfg.k_max, 0.0);
    rep.variance.assign(cfg.k_max, 0.0);
    rep.stderr_.assign(cfg.k_max, 0.0);
    for (auto& s : rep.samples)
        for (int k = 0; k < cfg.k_max; ++k) rep.mean[k] += s.moments[k] / T;
    for (auto& s : rep.samples)
        for (int k = 0; k < cfg.k_max; ++k) {
            double d = s.moments[k] - rep.mean[k];
            rep.variance[k] += T > 1 ? d * d / (T - 1) : 0.0;
        }
    for (int k = 0; k < cfg.k_max; ++k) rep.stderr_[k] = std::sqrt(rep.variance[k] / T);
    for (auto& s : rep.samples) {
        double scale = std::max(1.0, s.max_eig);
        rep.worst_psd = std::max(rep.worst_psd, std::max(0.0, -s.min_eig) / scale);
        double tr = 0.0;
        for (double l : s.eigenvalues) tr += l;
        double denom = std::max(std::abs(s.frobenius2), 1e-300);
        rep.worst_trace = std::max(rep.worst_trace, s.frobenius2 == 0.0 ? std::abs(tr) : std::abs(tr - s.frobenius2) / denom);
        rep.worst_audit = std::max(rep.worst_audit, s.audit_residual);
    }
    rep.hist = histogram(rep.samples, cfg.histogram_bins);
    return rep;
}

}  // namespace ck

#endif

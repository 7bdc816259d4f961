#ifndef CK_COEFFICIENTS_HPP
#define CK_COEFFICIENTS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_pFq.hpp>

#include "ck/activations.hpp"
#include "ck/bipartite_graph.hpp"
#include "ck/errors.hpp"
#include "ck/parallel.hpp"
#include "ck/quadrature.hpp"
#include "ck/rng.hpp"
#include "ck/weight_laws.hpp"

namespace ck {

struct CoefficientValue {
    double value = 0.0;
    double error = 0.0;           // absolute error estimate (standard error for Monte Carlo)
    std::string method;           // closed_form | quadrature | monte_carlo
    std::string estimator;        // finer label: theta, stable_c2, mixture, levy, fourier, wick, zero
    long samples = 0;
    double imag_residual = 0.0;   // mean of the imaginary part of the raw estimate
    double imag_error = 0.0;      // its standard error
    bool warning = false;         // error above the requested tolerance
};

struct CoefficientConfig {
    double sigma_x = 1.0;
    long mc_outer = 4096;         // outer Monte Carlo samples
    int mc_inner = 512;           // inner X samples when no closed form exists
    std::uint64_t seed = 1;
    std::uint64_t stream_salt = 0;  // distinguishes independent engines sharing a seed
    std::string method = "auto";  // auto | levy | fourier
    double coeff_tol = 0.0;       // flag results whose error exceeds this (0 disables)
};

inline constexpr long kChunkSize = 2048;
inline constexpr double kJumpFloor = 1e-4;

namespace detail {

struct Moments {
    double sum = 0.0, sumsq = 0.0, isum = 0.0, isumsq = 0.0;
    long count = 0;
    void add(double v, double im = 0.0) {
        sum += v;
        sumsq += v * v;
        isum += im;
        isumsq += im * im;
        ++count;
    }
    void merge(const Moments& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        isum += o.isum;
        isumsq += o.isumsq;
        count += o.count;
    }
};

inline std::pair<double, double> mean_se(double sum, double sumsq, long n) {
    if (n == 0) return {0.0, 0.0};
    double mean = sum / n;
    if (n == 1) return {mean, 0.0};
    double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1));
    return {mean, std::sqrt(var / n)};
}

// Runs `samples` Monte Carlo draws in fixed chunks, each with its own stream; the chunk
// results are reduced in chunk order so the output does not depend on the worker count.
inline Moments chunked_mc(long samples, std::uint64_t seed, std::uint64_t key,
                          const std::function<void(Engine&, long, Moments&)>& chunk_fn) {
    const long nchunks = (samples + kChunkSize - 1) / kChunkSize;
    std::vector<Moments> parts(static_cast<std::size_t>(nchunks));
    parallel_for(static_cast<std::size_t>(nchunks), [&](std::size_t c) {
        Engine rng = make_engine(seed, {key, static_cast<std::uint64_t>(c)});
        long n = std::min(kChunkSize, samples - static_cast<long>(c) * kChunkSize);
        chunk_fn(rng, n, parts[c]);
    });
    Moments total;
    for (auto& p : parts) total.merge(p);
    return total;
}

inline CoefficientValue finish_mc(const Moments& m, const std::string& estimator) {
    CoefficientValue out;
    auto [mean, se] = mean_se(m.sum, m.sumsq, m.count);
    auto [imean, ise] = mean_se(m.isum, m.isumsq, m.count);
    out.value = mean;
    out.error = se;
    out.imag_residual = imean;
    out.imag_error = ise;
    out.samples = m.count;
    out.method = "monte_carlo";
    out.estimator = estimator;
    return out;
}

// Positive (alpha/2)-stable variate with Laplace transform exp(-s^beta), beta = alpha/2 < 1
// (Kanter's representation).
inline double positive_stable(double beta, Engine& rng) {
    if (beta == 1.0) return 1.0;
    const double theta = kPi * uniform_open(rng);
    const double e = standard_exponential(rng);
    return std::pow(std::sin((1.0 - beta) * theta) / e, (1.0 - beta) / beta) * std::sin(beta * theta) /
           std::pow(std::sin(theta), 1.0 / beta);
}

// Hafnian of a symmetric 2n x 2n matrix by first-row expansion.
inline double hafnian(const std::vector<std::vector<double>>& C, std::vector<int>& idx) {
    if (idx.empty()) return 1.0;
    int a = idx[0];
    double acc = 0.0;
    for (std::size_t j = 1; j < idx.size(); ++j) {
        int b = idx[j];
        std::vector<int> rest;
        for (std::size_t r = 1; r < idx.size(); ++r)
            if (r != j) rest.push_back(idx[r]);
        acc += C[a][b] * hafnian(C, rest);
    }
    return acc;
}

// Structure of a family on a graph, with local indices for vertices and edges.
struct FamilyLayout {
    std::vector<int> ws;                                  // W ids in the union of subsets
    std::vector<int> vs;                                  // V ids adjacent to the union
    std::vector<std::vector<std::pair<int, int>>> nbr;    // per w: (local v index, multiplicity)
    std::vector<std::vector<int>> K;                      // per w: subsets containing it
    std::vector<std::vector<int>> subset_w;               // per subset: local w indices
    std::vector<std::pair<int, int>> edges;               // (local w, local v)
    std::vector<int> edge_mult;
    std::vector<std::vector<int>> edge_of;                // per w: edge index per neighbour slot
};

inline FamilyLayout make_layout(const BipartiteMultigraph& g, const std::vector<VertexSet>& subsets) {
    FamilyLayout L;
    std::set<int> wset;
    for (auto& s : subsets) wset.insert(s.begin(), s.end());
    L.ws.assign(wset.begin(), wset.end());
    std::map<int, int> wi, vi;
    for (std::size_t i = 0; i < L.ws.size(); ++i) wi[L.ws[i]] = static_cast<int>(i);
    std::set<int> vset;
    for (int w : L.ws)
        for (auto& [v, m] : g.neighbors_w(w)) vset.insert(v);
    L.vs.assign(vset.begin(), vset.end());
    for (std::size_t i = 0; i < L.vs.size(); ++i) vi[L.vs[i]] = static_cast<int>(i);
    L.nbr.resize(L.ws.size());
    L.K.resize(L.ws.size());
    L.edge_of.resize(L.ws.size());
    for (std::size_t i = 0; i < L.ws.size(); ++i)
        for (auto& [v, m] : g.neighbors_w(L.ws[i])) {
            L.nbr[i].emplace_back(vi[v], m);
            L.edge_of[i].push_back(static_cast<int>(L.edges.size()));
            L.edges.emplace_back(static_cast<int>(i), vi[v]);
            L.edge_mult.push_back(m);
        }
    for (std::size_t k = 0; k < subsets.size(); ++k) {
        std::vector<int> loc;
        for (int w : sorted_set(subsets[k])) {
            loc.push_back(wi.at(w));
            L.K[wi.at(w)].push_back(static_cast<int>(k));
        }
        L.subset_w.push_back(loc);
    }
    return L;
}

}  // namespace detail

// Canonical text key of a family: the edges incident to the union and the subsets.
inline std::string family_key(const BipartiteMultigraph& g, const std::vector<VertexSet>& subsets) {
    std::set<int> wset;
    for (auto& s : subsets) wset.insert(s.begin(), s.end());
    std::ostringstream os;
    os << "E";
    for (auto& [k, m] : g.edges())
        if (wset.count(k.first)) os << ' ' << k.first << ',' << k.second << 'x' << m;
    os << " F";
    for (auto& s : subsets) {
        os << " {";
        for (int w : sorted_set(s)) os << w << ',';
        os << '}';
    }
    return os.str();
}

// Evaluates C_d(f) and C_{(W_k)}(f) for one activation, law and input scale.
class CoefficientEngine {
public:
    CoefficientEngine(Activation f, WeightLaw law, CoefficientConfig cfg)
        : f_(std::move(f)), law_(std::move(law)), cfg_(std::move(cfg)) {
        if (!(cfg_.sigma_x > 0.0)) throw ConfigError("sigma_x", "sigma_x must be positive");
        if (cfg_.mc_outer < 1) throw ConfigError("mc_outer", "mc_outer must be positive");
        if (cfg_.mc_inner < 1) throw ConfigError("mc_inner", "mc_inner must be positive");
        if (cfg_.method != "auto" && cfg_.method != "levy" && cfg_.method != "fourier")
            throw ConfigError("coeff_method", "coefficient method must be auto, levy or fourier");
    }

    const Activation& activation() const { return f_; }
    const WeightLaw& law() const { return law_; }
    const CoefficientConfig& config() const { return cfg_; }

    std::string context_key() const {
        std::ostringstream os;
        os.precision(17);
        os << f_.key() << '|' << law_.key() << "|sx=" << cfg_.sigma_x << "|n=" << cfg_.mc_outer << '/'
           << cfg_.mc_inner << "|m=" << cfg_.method;
        return os.str();
    }

    // ---- C_d(f) -------------------------------------------------------------------

    CoefficientValue c_degree(int d) {
        if (d < 2 || d % 2) throw StructuralError("C_d needs an even d >= 2");
        return cached("deg" + std::to_string(d), [&] { return compute_degree(d); });
    }

    // C_d = theta1^{d/2}: the alpha = 2 closed form.
    CoefficientValue c_degree_gauss(int d) const {
        CoefficientValue out;
        out.value = std::pow(theta1(f_, s_gauss()), d / 2);
        out.error = 0.0;
        out.method = "closed_form";
        out.estimator = "theta";
        return out;
    }

    // C_2 = (1/pi) int_0^inf (f^2)^(t) exp(-kappa t^alpha) dt.
    CoefficientValue c2_stable_quadrature() const {
        const double alpha = law_.stable_alpha();
        const double kappa = law_.kappa(cfg_.sigma_x);
        double err = 0.0;
        auto integrand = [&](double t) { return f_.fsq_hat(t) * std::exp(-kappa * std::pow(t, alpha)); };
        // Truncate where kappa T^alpha = 60. Since |(f^2)^(t)| <= (f^2)^(0), the tail is at most
        // (f^2)^(0) Gamma(1/alpha, 60) / (alpha kappa^{1/alpha}).
        const double T = std::pow(60.0 / kappa, 1.0 / alpha);
        const double tail = f_.fsq_hat(0.0) * boost::math::tgamma(1.0 / alpha, 60.0) /
                            (alpha * std::pow(kappa, 1.0 / alpha));
        double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, T, 20, 1e-12, &err);
        CoefficientValue out;
        out.value = v / kPi;
        out.error = (err + tail) / kPi + 1e-15;
        out.method = "quadrature";
        out.estimator = "stable_c2";
        if (!(err < 1e-8)) throw QuadratureError("C_2 stable quadrature did not converge", err);
        return out;
    }

    // C_d = E_V[h(V)^{d/2}], h(v) = E f^2(sqrt(v) G): S is a Gaussian scale mixture.
    CoefficientValue c_degree_mixture(int d) {
        const int half = d / 2;
        auto h = [&](double v) { return smoothed_square(v); };
        if (law_.kind() == LawKind::sparse && law_.z_law() == ZLaw::rademacher) {
            // sum_j Z_j^2 = N exactly; sum the Poisson series.
            const double q = law_.q();
            double acc = 0.0, p = std::exp(-q), tail = 1.0;
            for (int N = 0; N < 200 && tail > 1e-17; ++N) {
                acc += p * std::pow(h(N * cfg_.sigma_x * cfg_.sigma_x), half);
                tail -= p;
                p *= q / (N + 1);
            }
            CoefficientValue out;
            out.value = acc;
            out.error = 1e-15 * std::abs(acc) + std::max(tail, 0.0) * std::pow(f_.sup_norm(), d);
            out.method = "quadrature";
            out.estimator = "poisson_sum";
            return out;
        }
        const std::uint64_t key = hash_string("mix" + std::to_string(d) + context_key());
        auto m = detail::chunked_mc(cfg_.mc_outer, stream_seed(), key, [&](Engine& rng, long n, detail::Moments& acc) {
            for (long i = 0; i < n; ++i) acc.add(std::pow(h(draw_mixing_variance(rng)), half));
        });
        return detail::finish_mc(m, "mixture");
    }

    // h(v) = E f^2(sqrt(v) G). A fixed Hermite rule cannot resolve f^2 once sqrt(v) is
    // large against the width of f, so wide mixtures fall back to adaptive quadrature.
    double smoothed_square(double v) const {
        if (v <= 0.0) {
            double f0 = f_(0.0);
            return f0 * f0;
        }
        if (f_.has_gaussian_smoothing()) return f_.smoothed_power(2, 0.0, v);
        const double s = std::sqrt(v);
        if (s <= 1.0) return gaussian_expectation([&](double z) { double y = f_(z); return y * y; }, s);
        auto integrand = [&](double x) {
            double y = f_(x);
            return 2.0 * y * y * std::exp(-0.5 * x * x / v) / (s * std::sqrt(2.0 * kPi));
        };
        double err = 0.0;
        double r = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            integrand, 0.0, std::numeric_limits<double>::infinity(), 20, 1e-13, &err);
        if (!(err <= 1e-9 * std::max(1.0, std::abs(r)))) throw QuadratureError("Gaussian smoothing did not converge", err);
        return r;
    }

    // Generic gamma-space estimator of C_d with |f_hat| importance sampling.
    CoefficientValue c_degree_fourier(int d, long samples = 0) {
        if (samples <= 0) samples = cfg_.mc_outer;
        const int half = d / 2;
        const std::uint64_t key = hash_string("fdeg" + std::to_string(d) + context_key() + std::to_string(samples));
        auto m = detail::chunked_mc(samples, stream_seed(), key, [&](Engine& rng, long n, detail::Moments& acc) {
            for (long i = 0; i < n; ++i) {
                std::complex<double> w = 1.0;
                double norm2 = 0.0;
                for (int j = 0; j < half; ++j) {
                    double t1, t2;
                    w *= draw_gamma(rng, t1) * draw_gamma(rng, t2);
                    norm2 += (t1 + t2) * (t1 + t2);
                }
                std::complex<double> v = w * std::exp(law_.expected_phi_gaussian_norm2(norm2, cfg_.sigma_x));
                acc.add(v.real(), v.imag());
            }
        });
        auto out = detail::finish_mc(m, "fourier");
        flag(out);
        return out;
    }

    // ---- C_{(W_k)}(f) ---------------------------------------------------------------

    CoefficientValue c_family(const BipartiteMultigraph& g, const std::vector<VertexSet>& subsets) {
        validate_family(g, subsets);
        return cached("fam " + family_key(g, subsets), [&] { return compute_family(g, subsets); });
    }

    // Exact alpha = 2 evaluation: Wick expansion of the inner Gaussian expectations, then
    // one-dimensional Gauss-Hermite integrals per edge.
    CoefficientValue c_family_gauss(const BipartiteMultigraph& g, const std::vector<VertexSet>& subsets) const {
        const auto L = detail::make_layout(g, subsets);
        const int nE = static_cast<int>(L.edges.size());
        const int nV = static_cast<int>(L.vs.size());
        const double sw = law_.gaussian_sigma_w();
        const double s = s_gauss();
        using Poly = std::map<std::vector<int>, double>;
        Poly total{{std::vector<int>(nE, 0), 1.0}};
        for (auto& sub : L.subset_w) {
            // Polynomial in (L_e, X_v); X integrated out at the end of the subset.
            Poly P{{std::vector<int>(nE + nV, 0), 1.0}};
            for (int wl : sub) {
                Poly next;
                const auto& nb = L.nbr[wl];
                for (auto& [mono, c] : P)
                    for (std::size_t a = 0; a < nb.size(); ++a)
                        for (std::size_t b = 0; b < nb.size(); ++b) {
                            auto m2 = mono;
                            ++m2[L.edge_of[wl][a]];
                            ++m2[L.edge_of[wl][b]];
                            ++m2[nE + nb[a].first];
                            ++m2[nE + nb[b].first];
                            next[m2] += c * (-0.5 * sw * sw);
                        }
                P.swap(next);
            }
            Poly Q;
            for (auto& [mono, c] : P) {
                double xf = 1.0;
                for (int v = 0; v < nV; ++v) {
                    int e = mono[nE + v];
                    xf *= gaussian_moment(e) * std::pow(cfg_.sigma_x, e);
                    if (xf == 0.0) break;
                }
                if (xf == 0.0) continue;
                Q[std::vector<int>(mono.begin(), mono.begin() + nE)] += c * xf;
            }
            Poly next;
            for (auto& [a, ca] : total)
                for (auto& [b, cb] : Q) {
                    auto m = a;
                    for (int e = 0; e < nE; ++e) m[e] += b[e];
                    next[m] += ca * cb;
                }
            total.swap(next);
        }
        // Per-edge functional T(m, j) = E[f^m(Z) He_j(Z/s)], Z ~ N(0, s^2).
        std::map<std::pair<int, int>, double> T;
        auto tval = [&](int m, int j) {
            auto it = T.find({m, j});
            if (it != T.end()) return it->second;
            double v = gaussian_expectation([&](double z) { return std::pow(f_(z), m) * hermite_he(j, z / s); }, s);
            T[{m, j}] = v;
            return v;
        };
        double acc = 0.0, absacc = 0.0;
        for (auto& [mono, c] : total) {
            int J = 0;
            double term = c;
            for (int e = 0; e < nE; ++e) {
                J += mono[e];
                term *= tval(L.edge_mult[e], mono[e]) * std::pow(s, -mono[e]);
            }
            // (-i)^J with J even.
            if ((J / 2) % 2) term = -term;
            acc += term;
            absacc += std::abs(term);
        }
        CoefficientValue out;
        out.value = acc;
        out.error = 1e-13 * absacc + 1e-300;
        out.method = "quadrature";
        out.estimator = "wick";
        return out;
    }

    // Position-space Monte Carlo for laws with a Levy measure: X ~ N(0, sigma_x^2) per
    // subset, S_w from exp(E_X Phi), and one Levy jump per (w, subset) pair evaluated by
    // a symmetric second difference of prod f^m.
    CoefficientValue c_family_levy(const BipartiteMultigraph& g, const std::vector<VertexSet>& subsets) {
        if (law_.is_gaussian_family())
            throw CapabilityError("Levy estimator needs a law with a nonzero Levy measure");
        const auto L = detail::make_layout(g, subsets);
        const int nW = static_cast<int>(L.ws.size());
        const int nV = static_cast<int>(L.vs.size());
        const int K = static_cast<int>(subsets.size());
        const std::uint64_t key = hash_string("levy " + family_key(g, subsets) + context_key());
        const double r_floor = kJumpFloor / cfg_.sigma_x;
        // Given its mixing variance V the smooth part is N(0, V I); integrate it out exactly when possible.
        const bool smooth_exact = f_.has_gaussian_smoothing();
        auto m = detail::chunked_mc(cfg_.mc_outer, stream_seed(), key, [&](Engine& rng, long n, detail::Moments& acc) {
            std::vector<std::vector<double>> X(K, std::vector<double>(nV));
            std::vector<double> S, y, r;
            for (long it = 0; it < n; ++it) {
                for (int k = 0; k < K; ++k)
                    for (int v = 0; v < nV; ++v) X[k][v] = cfg_.sigma_x * standard_normal(rng);
                double sample = 1.0;
                for (int w = 0; w < nW; ++w) {
                    const auto& nb = L.nbr[w];
                    const int deg = static_cast<int>(nb.size());
                    double V = 0.0;
                    if (smooth_exact) {
                        V = draw_mixing_variance(rng);
                        S.assign(deg, 0.0);
                    } else {
                        draw_smooth_part(rng, deg, S);
                    }
                    const int nk = static_cast<int>(L.K[w].size());
                    r.assign(nk, 0.0);
                    double weight = 1.0;
                    for (int j = 0; j < nk; ++j) {
                        weight *= draw_jump(rng, r[j]);
                        // Below the floor the second difference is dominated by rounding; it is
                        // quadratic in r there, so evaluate at the floor and rescale.
                        if (r[j] < r_floor) {
                            weight *= (r[j] / r_floor) * (r[j] / r_floor);
                            r[j] = r_floor;
                        }
                    }
                    // Sum over eps in {-1, 0, 1}^nk with coefficients 1/2, -1, 1/2.
                    double psi = 0.0;
                    int total = 1;
                    for (int j = 0; j < nk; ++j) total *= 3;
                    y.resize(deg);
                    for (int code = 0; code < total; ++code) {
                        int c = code;
                        double coef = 1.0;
                        for (int v = 0; v < deg; ++v) y[v] = S[v];
                        for (int j = 0; j < nk; ++j) {
                            int e = c % 3 - 1;
                            c /= 3;
                            if (e == 0) {
                                coef *= -1.0;
                                continue;
                            }
                            coef *= 0.5;
                            const auto& Xk = X[L.K[w][j]];
                            for (int v = 0; v < deg; ++v) y[v] += e * r[j] * Xk[nb[v].first];
                        }
                        double F = 1.0;
                        if (smooth_exact)
                            for (int v = 0; v < deg; ++v) F *= f_.smoothed_power(nb[v].second, y[v], V);
                        else
                            for (int v = 0; v < deg; ++v) F *= std::pow(f_(y[v]), nb[v].second);
                        psi += coef * F;
                    }
                    sample *= weight * psi;
                    if (sample == 0.0) break;
                }
                acc.add(sample);
            }
        });
        auto out = detail::finish_mc(m, "levy");
        flag(out);
        return out;
    }

    // Generic gamma-space estimator: gamma copies drawn from |f_hat|, the exponential
    // factor in closed form, and the inner expectations in closed form or by nested MC.
    CoefficientValue c_family_fourier(const BipartiteMultigraph& g, const std::vector<VertexSet>& subsets,
                                      long samples = 0) {
        if (samples <= 0) samples = cfg_.mc_outer;
        const auto L = detail::make_layout(g, subsets);
        const int nW = static_cast<int>(L.ws.size());
        const int nV = static_cast<int>(L.vs.size());
        const int nE = static_cast<int>(L.edges.size());
        const std::uint64_t key =
            hash_string("fourier " + family_key(g, subsets) + context_key() + std::to_string(samples));
        auto m = detail::chunked_mc(samples, stream_seed(), key, [&](Engine& rng, long n, detail::Moments& acc) {
            std::vector<double> Le(nE);
            std::vector<std::vector<double>> A(nW, std::vector<double>(nV, 0.0));  // A[w][v] = L_wv
            for (long it = 0; it < n; ++it) {
                std::complex<double> w8 = 1.0;
                for (int e = 0; e < nE; ++e) {
                    double sum = 0.0;
                    for (int c = 0; c < L.edge_mult[e]; ++c) {
                        double t;
                        w8 *= draw_gamma(rng, t);
                        sum += t;
                    }
                    Le[e] = sum;
                }
                for (auto& row : A) std::fill(row.begin(), row.end(), 0.0);
                std::vector<double> norm2(nW, 0.0);
                for (int e = 0; e < nE; ++e) {
                    A[L.edges[e].first][L.edges[e].second] = Le[e];
                    norm2[L.edges[e].first] += Le[e] * Le[e];
                }
                double expo = 0.0;
                for (int w = 0; w < nW; ++w) expo += law_.expected_phi_gaussian_norm2(norm2[w], cfg_.sigma_x);
                double inner = 1.0;
                for (auto& sub : L.subset_w) {
                    inner *= inner_expectation(sub, A, norm2, rng);
                    if (inner == 0.0) break;
                }
                std::complex<double> v = w8 * std::exp(expo) * inner;
                acc.add(v.real(), v.imag());
            }
        });
        auto out = detail::finish_mc(m, "fourier");
        flag(out);
        return out;
    }

    // ---- bound audit ---------------------------------------------------------------

    // Implementation bound for |C_{(W_k)}|: (||f_hat||_1 / 2 pi)^{|E|} times a law factor,
    // (2q)^{sum |W_k|} for sparse laws and prod_k (sigma sigma_x)^{alpha |W_k|} beta_{alpha |W_k|}
    // prod_w (|K(w)| / (kappa e))^{|K(w)|} for stable laws.
    double family_bound(const BipartiteMultigraph& g, const std::vector<VertexSet>& subsets) const {
        if (f_.is_zero()) return 0.0;
        if (!f_.has_fourier()) return std::numeric_limits<double>::infinity();
        const auto L = detail::make_layout(g, subsets);
        int ncopies = 0;
        for (int m : L.edge_mult) ncopies += m;
        double b = std::pow(f_.fhat_l1() / (2.0 * kPi), ncopies);
        int total = 0;
        for (auto& s : L.subset_w) total += static_cast<int>(s.size());
        if (law_.kind() == LawKind::sparse) return b * std::pow(2.0 * law_.q(), total);
        const double alpha = law_.stable_alpha();
        const double sig = law_.stable_sigma();
        const double kappa = law_.kappa(cfg_.sigma_x);
        for (auto& s : L.subset_w) {
            int k = static_cast<int>(s.size());
            b *= std::pow(sig * cfg_.sigma_x, alpha * k) * beta_alpha(alpha * k);
        }
        for (auto& Kw : L.K) {
            double kw = static_cast<double>(Kw.size());
            if (kw > 0) b *= std::pow(kw / (kappa * std::exp(1.0)), kw);
        }
        return b;
    }

    double degree_bound(int d) const {
        if (f_.is_zero()) return 0.0;
        if (!f_.has_fourier()) return std::numeric_limits<double>::infinity();
        return std::min(std::pow(f_.fhat_l1() / (2.0 * kPi), d), std::pow(f_.sup_norm(), d));
    }

    static bool bound_audit(const CoefficientValue& v, double bound) {
        return std::abs(v.value) <= bound + 3.0 * v.error + 1e-14;
    }

    std::size_t cache_size() const {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        return cache_.size();
    }

    // Cached coefficients whose error exceeds coeff_tol, as "key: value +- error" lines.
    std::vector<std::string> warnings() const {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        std::vector<std::string> out;
        for (auto& [key, v] : cache_)
            if (v.warning) {
                char buf[96];
                std::snprintf(buf, sizeof buf, ": %.6g +- %.2g", v.value, v.error);
                out.push_back(key + buf);
            }
        return out;
    }

private:
    double s_gauss() const { return law_.gaussian_sigma_w() * cfg_.sigma_x; }
    std::uint64_t stream_seed() const { return derive_seed(cfg_.seed, {cfg_.stream_salt}); }

    void flag(CoefficientValue& v) const {
        if (cfg_.coeff_tol > 0.0 && v.error > cfg_.coeff_tol) v.warning = true;
    }

    template <class Fn>
    CoefficientValue cached(const std::string& key, Fn&& fn) {
        {
            std::lock_guard<std::mutex> lock(cache_mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        CoefficientValue v = fn();
        std::lock_guard<std::mutex> lock(cache_mutex_);
        cache_[key] = v;
        return v;
    }

    CoefficientValue zero_value() const {
        CoefficientValue out;
        out.method = "closed_form";
        out.estimator = "zero";
        return out;
    }

    CoefficientValue compute_degree(int d) {
        if (f_.is_zero()) return zero_value();
        if (cfg_.method == "fourier") return c_degree_fourier(d);
        if (law_.is_gaussian_family()) return c_degree_gauss(d);
        if (!f_.has_fourier())
            throw CapabilityError("C_d for a heavy-tailed law needs a bounded activation with a Fourier transform");
        if (law_.kind() == LawKind::stable && d == 2 && cfg_.method == "auto") return c2_stable_quadrature();
        auto out = c_degree_mixture(d);
        flag(out);
        return out;
    }

    CoefficientValue compute_family(const BipartiteMultigraph& g, const std::vector<VertexSet>& subsets) {
        if (f_.is_zero()) return zero_value();
        if (cfg_.method == "fourier") return c_family_fourier(g, subsets);
        if (law_.is_gaussian_family()) return c_family_gauss(g, subsets);
        if (!f_.has_fourier())
            throw CapabilityError("C_W for a heavy-tailed law needs a bounded activation with a Fourier transform");
        return c_family_levy(g, subsets);
    }

    void validate_family(const BipartiteMultigraph& g, const std::vector<VertexSet>& subsets) const {
        if (subsets.empty()) throw StructuralError("C_W needs at least one subset");
        for (auto& s : subsets) {
            if (s.size() < 2) throw StructuralError("C_W subsets need at least two W vertices");
            if (!is_connected(induced_subgraph(g, s))) throw StructuralError("C_W subset induces a disconnected graph");
        }
    }

    // Variance V with S = sqrt(V) G for the isotropic law of exp(E_X Phi(<t, X>)).
    double draw_mixing_variance(Engine& rng) const {
        if (law_.kind() == LawKind::sparse) {
            int N = poisson(rng, law_.q());
            double v = 0.0;
            for (int j = 0; j < N; ++j) {
                double z = law_.sample_mark(rng);
                v += z * z;
            }
            return v * cfg_.sigma_x * cfg_.sigma_x;
        }
        const double alpha = law_.stable_alpha();
        const double tau = std::sqrt(2.0) * std::pow(law_.kappa(cfg_.sigma_x), 1.0 / alpha);
        return detail::positive_stable(alpha / 2.0, rng) * tau * tau;
    }

    // S in R^deg with characteristic function exp(E_X Phi(<t, X>)).
    void draw_smooth_part(Engine& rng, int deg, std::vector<double>& S) const {
        S.assign(deg, 0.0);
        if (law_.kind() == LawKind::sparse) {
            int N = poisson(rng, law_.q());
            for (int j = 0; j < N; ++j) {
                double z = law_.sample_mark(rng);
                for (int v = 0; v < deg; ++v) S[v] += z * cfg_.sigma_x * standard_normal(rng);
            }
            return;
        }
        const double sd = std::sqrt(draw_mixing_variance(rng));
        for (int v = 0; v < deg; ++v) S[v] = sd * standard_normal(rng);
    }

    // Jump size r > 0 and importance weight for the symmetrised Levy measure on (0, inf).
    double draw_jump(Engine& rng, double& r) const {
        if (law_.kind() == LawKind::sparse) {
            r = std::abs(law_.sample_mark(rng));
            return law_.q();
        }
        const double alpha = law_.alpha();
        const double c_alpha = std::tgamma(1.0 + alpha) * std::sin(kPi * alpha / 2.0) / kPi;
        double dens;
        if (rng() >> 63) {
            r = std::pow(uniform_open(rng), 1.0 / (2.0 - alpha));
            dens = 0.5 * (2.0 - alpha) * std::pow(r, 1.0 - alpha);
        } else {
            r = std::pow(uniform_open(rng), -1.0 / alpha);
            dens = 0.5 * alpha * std::pow(r, -1.0 - alpha);
        }
        return 2.0 * c_alpha * std::pow(law_.sigma(), alpha) * std::pow(r, -1.0 - alpha) / dens;
    }

    // One gamma copy: returns f_hat(t) / (2 pi p(t)) for t drawn from p ~ |f_hat|.
    std::complex<double> draw_gamma(Engine& rng, double& t) const {
        if (f_.base() == ActivationBase::gauss_odd) {
            double a = std::sqrt(-4.0 * std::log(uniform_open(rng)));
            double sign = (rng() >> 63) ? 1.0 : -1.0;
            t = sign * a * f_.scale();
            double mag = f_.fhat_l1() / (2.0 * kPi);
            double s = f_.amplitude() >= 0 ? sign : -sign;
            return {0.0, -s * mag};
        }
        const FourierTable& tab = f_.fourier_table();
        const double half = tab.cdf.back();
        double u = uniform_open(rng) * half;
        auto it = std::upper_bound(tab.cdf.begin(), tab.cdf.end(), u);
        std::size_t cell = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - tab.cdf.begin())) - 1;
        if (cell >= tab.F.size() - 1) cell = tab.F.size() - 2;
        double a = (cell + uniform_open(rng)) * tab.h;
        double sign = (rng() >> 63) ? 1.0 : -1.0;
        t = sign * a;
        double mass = tab.cdf[cell + 1] - tab.cdf[cell];
        double p = mass / (tab.h * 2.0 * half);
        double F = tab.interp(t);
        return {0.0, -F / (2.0 * kPi * p)};
    }

    // E_X[prod_{w in sub} Phi(<L_w, X>)] for X i.i.d. N(0, sigma_x^2).
    double inner_expectation(const std::vector<int>& sub, const std::vector<std::vector<double>>& A,
                             const std::vector<double>& norm2, Engine& rng) const {
        const double sx2 = cfg_.sigma_x * cfg_.sigma_x;
        if (sub.size() == 1) return law_.expected_phi_gaussian_norm2(norm2[sub[0]], cfg_.sigma_x);
        const int nV = static_cast<int>(A.empty() ? 0 : A[0].size());
        auto dot = [&](int a, int b) {
            double s = 0.0;
            for (int v = 0; v < nV; ++v) s += A[a][v] * A[b][v];
            return s;
        };
        if (law_.is_gaussian_family()) {
            const double sw = law_.gaussian_sigma_w();
            const int n = static_cast<int>(sub.size());
            std::vector<std::vector<double>> C(2 * n, std::vector<double>(2 * n));
            for (int i = 0; i < 2 * n; ++i)
                for (int j = 0; j < 2 * n; ++j) C[i][j] = sx2 * dot(sub[i / 2], sub[j / 2]);
            std::vector<int> idx(2 * n);
            for (int i = 0; i < 2 * n; ++i) idx[i] = i;
            return std::pow(-0.5 * sw * sw, n) * detail::hafnian(C, idx);
        }
        if (law_.kind() == LawKind::stable && sub.size() == 2) {
            const double alpha = law_.alpha();
            const double n1 = norm2[sub[0]], n2 = norm2[sub[1]];
            if (n1 == 0.0 || n2 == 0.0) return 0.0;
            double rho2 = dot(sub[0], sub[1]);
            rho2 = std::min(1.0, rho2 * rho2 / (n1 * n2));
            const double c = std::pow(2.0, alpha) * std::pow(std::tgamma((alpha + 1.0) / 2.0), 2) / kPi;
            double F = boost::math::hypergeometric_pFq({-alpha / 2.0, -alpha / 2.0}, {0.5}, rho2);
            double mom = c * std::pow(sx2 * sx2 * n1 * n2, alpha / 2.0) * F;
            return std::pow(law_.sigma(), 2.0 * alpha) * mom;
        }
        // Nested Gaussian Monte Carlo.
        double acc = 0.0;
        std::vector<double> x(nV);
        for (int it = 0; it < cfg_.mc_inner; ++it) {
            for (int v = 0; v < nV; ++v) x[v] = cfg_.sigma_x * standard_normal(rng);
            double prod = 1.0;
            for (int w : sub) {
                double l = 0.0;
                for (int v = 0; v < nV; ++v) l += A[w][v] * x[v];
                prod *= law_.phi(l);
            }
            acc += prod;
        }
        return acc / cfg_.mc_inner;
    }

    Activation f_;
    WeightLaw law_;
    CoefficientConfig cfg_;
    mutable std::mutex cache_mutex_;
    std::map<std::string, CoefficientValue> cache_;
};

}  // namespace ck

#endif

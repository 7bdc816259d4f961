#ifndef CK_MOMENTS_HPP
#define CK_MOMENTS_HPP

#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ck/activations.hpp"
#include "ck/bipartite_graph.hpp"
#include "ck/coefficients.hpp"
#include "ck/errors.hpp"
#include "ck/partitions.hpp"
#include "ck/weight_laws.hpp"

namespace ck {

inline constexpr int kMainCap = 6;
inline constexpr int kOracleCap = 4;
inline constexpr int kGaussCap = 10;

// A value with an absolute error bar; errors propagate linearly.
struct Value {
    double v = 0.0;
    double e = 0.0;
};
inline Value operator+(Value a, Value b) { return {a.v + b.v, a.e + b.e}; }
inline Value operator*(Value a, Value b) {
    return {a.v * b.v, a.e * std::abs(b.v) + b.e * std::abs(a.v) + a.e * b.e};
}
inline Value scale(Value a, double c) { return {a.v * c, a.e * std::abs(c)}; }
inline Value from_coeff(const CoefficientValue& c) { return {c.value, c.error}; }

struct ModelParams {
    double phi = 1.0;
    double psi = 1.0;
    Activation activation = Activation::builtin("gauss_odd");
    WeightLaw law = WeightLaw::gaussian(1.0);
    double sigma_x = 1.0;
    CoefficientConfig coeff;  // sigma_x inside is overwritten by the field above

    void validate() const {
        if (!(phi > 0.0)) throw ConfigError("phi", "phi must be positive");
        if (!(psi > 0.0)) throw ConfigError("psi", "psi must be positive");
        if (!(sigma_x > 0.0)) throw ConfigError("sigma_x", "sigma_x must be positive");
    }
    CoefficientConfig coeff_config(std::uint64_t salt) const {
        CoefficientConfig c = coeff;
        c.sigma_x = sigma_x;
        c.stream_salt = salt;
        return c;
    }
};

// Per-term record of a moment breakdown.
struct TermRecord {
    std::string label;      // partition(s) indexing the term
    int phi_power = 0;
    int psi_power = 0;      // exponent of psi (negative powers for 1/psi)
    int S = 0;
    int R = 0;
    std::vector<int> block_sizes;
    double value = 0.0;
    double error = 0.0;
    std::string note;
};

// Route A block factor sum_{mu in P(n)} psi^{n-|mu|} C(G^mu) for a 2n-cycle.
struct MuTerm {
    std::string mu;
    bool noncrossing = true;
    int psi_power = 0;
    int R_mu = 0;
    int S_mu = 0;
    double coefficient = 0.0;
    double coefficient_error = 0.0;
    int p_terms = 0;               // partitions P of [R_mu] with connected merged graphs
    double nonsingleton_p = 0.0;   // contribution of P other than the partition of singletons
    double nonsingleton_p_error = 0.0;
};

struct BlockFactor {
    int n = 0;
    double value = 0.0;
    double error = 0.0;
    std::vector<MuTerm> mu_terms;
};

struct MomentEntry {
    int k = 0;
    double value = 0.0;
    double error = 0.0;
    std::vector<TermRecord> terms;
};

struct MomentReport {
    std::string engine;
    std::vector<MomentEntry> moments;
    std::vector<BlockFactor> block_factors;  // route A only
    std::vector<std::string> warnings;
    double theta1 = 0.0, theta2 = 0.0;       // route B only
};

struct Tau0Result {
    double value = 0.0;
    double error = 0.0;
    bool admissible = false;
    int R = 0;
    int S = 0;
    int decompositions = 0;
};

inline std::string partition_label_v(const Partition& p) { return "pi=" + p.to_string(); }

// Limiting injective trace of a connected graph. Non-admissible graphs give exactly 0.
inline Tau0Result tau0_limit(const BipartiteMultigraph& g, double phi, double psi, CoefficientEngine& eng) {
    Tau0Result res;
    BlockDecomposition bd = classify(g);
    res.admissible = bd.admissible;
    res.R = bd.R;
    res.S = bd.S;
    if (!bd.admissible) return res;
    const int E = g.num_edges();
    const int V = static_cast<int>(g.v_vertices().size());
    const int W = static_cast<int>(g.w_vertices().size());
    const double pref = std::pow(phi, E / 2 - V) / std::pow(psi, W - 1);
    Value acc{pref, 0.0};
    std::set<int> in_big;
    for (std::size_t b = 0; b < bd.block_w.size(); ++b) {
        if (bd.block_w[b].size() < 2) continue;
        in_big.insert(bd.block_w[b].begin(), bd.block_w[b].end());
        auto decomps = enumerate_admissible_decompositions(bd.blocks[b], bd.block_w[b]);
        Value sum;
        for (auto& fam : decomps) sum = sum + from_coeff(eng.c_family(bd.blocks[b], fam));
        res.decompositions += static_cast<int>(decomps.size());
        acc = acc * sum;
    }
    for (int w : g.w_vertices())
        if (!in_big.count(w)) acc = acc * from_coeff(eng.c_degree(g.deg_w(w)));
    res.value = acc.v;
    res.error = acc.e;
    return res;
}

// Route A: the noncrossing-partition formula over V with block factors over P(W).
class MainEngine {
public:
    // w_intersection keeps a merged block only if its subsets chain through shared W
    // vertices. induced accepts any block whose union induces a connected subgraph; it
    // admits unions of disjoint subsets and disagrees with route B from k = 6 on.
    enum class Connectivity { induced, w_intersection };

    MainEngine(const ModelParams& params, Connectivity conn = Connectivity::w_intersection)
        : params_(params), eng_(params.activation, params.law, params.coeff_config(0xA)), conn_(conn) {
        params_.validate();
    }

    CoefficientEngine& coefficients() { return eng_; }

    // sum_{P in P([R])} C_{(merged W^P)} over partitions whose merged graphs are connected.
    Value mu_coefficient(int n, const Partition& mu, MuTerm& rec) {
        if (mu.is_one_block()) {
            auto c = eng_.c_degree(2 * n);
            rec.p_terms = 0;
            return from_coeff(c);
        }
        CycleSubsets cs = w_mu_finest(n, mu);
        const int R = static_cast<int>(cs.large.size());
        rec.R_mu = R;
        rec.S_mu = static_cast<int>(cs.singles.size());
        if (R == 0) throw StructuralError("finest partition of a non-trivial mu has no large subset");
        Value total, nonsingle;
        for (auto& P : enumerate_set_partitions(R)) {
            std::vector<VertexSet> fam;
            bool ok = true;
            for (auto& blk : P.blocks()) {
                VertexSet u;
                for (int idx : blk) u.insert(u.end(), cs.large[idx - 1].begin(), cs.large[idx - 1].end());
                u = sorted_set(u);
                if (!merged_connected(cs, blk, u)) {
                    ok = false;
                    break;
                }
                fam.push_back(u);
            }
            if (!ok) continue;
            ++rec.p_terms;
            Value c = from_coeff(eng_.c_family(cs.graph, fam));
            total = total + c;
            if (!P.is_singletons()) nonsingle = nonsingle + c;
        }
        rec.nonsingleton_p = nonsingle.v;
        rec.nonsingleton_p_error = nonsingle.e;
        return total;
    }

    BlockFactor block_factor(int n) {
        auto it = factors_.find(n);
        if (it != factors_.end()) return it->second;
        BlockFactor bf;
        bf.n = n;
        Value acc;
        for (auto& mu : enumerate_set_partitions(n)) {
            MuTerm rec;
            rec.mu = mu.to_string();
            rec.noncrossing = is_noncrossing(mu);
            rec.psi_power = n - mu.size();
            Value c = mu_coefficient(n, mu, rec);
            rec.coefficient = c.v;
            rec.coefficient_error = c.e;
            acc = acc + scale(c, std::pow(params_.psi, rec.psi_power));
            bf.mu_terms.push_back(rec);
        }
        bf.value = acc.v;
        bf.error = acc.e;
        factors_[n] = bf;
        return bf;
    }

    MomentEntry moment(int k) {
        if (k < 1) throw StructuralError("moments need k >= 1");
        if (k > kMainCap) throw CapabilityError("route A is capped at k = " + std::to_string(kMainCap));
        MomentEntry ent;
        ent.k = k;
        Value c2 = from_coeff(eng_.c_degree(2));
        Value total;
        for (auto& pi : enumerate_noncrossing(k)) {
            CycleSubsets cs = w_pi_subsets(k, pi);
            PartitionStats st = partition_stats(pi);
            if (st.S != static_cast<int>(cs.singles.size()) || st.R != static_cast<int>(cs.large.size()))
                throw StructuralError("W^pi construction disagrees with partition statistics for " + pi.to_string());
            TermRecord t;
            t.label = partition_label_v(pi);
            t.phi_power = k - pi.size();
            t.psi_power = -(k - 1);
            t.S = st.S;
            t.R = st.R;
            Value term{std::pow(params_.phi, t.phi_power) / std::pow(params_.psi, k - 1), 0.0};
            for (int i = 0; i < st.S; ++i) term = term * c2;
            for (auto& sub : cs.large) {
                int n = static_cast<int>(sub.size());
                t.block_sizes.push_back(n);
                BlockFactor bf = block_factor(n);
                term = term * Value{bf.value, bf.error};
            }
            t.value = term.v;
            t.error = term.e;
            total = total + term;
            ent.terms.push_back(t);
        }
        ent.value = 0.0;
        for (auto& t : ent.terms) ent.value += t.value;
        ent.error = total.e;
        return ent;
    }

    MomentReport run(int k_max) {
        MomentReport rep;
        rep.engine = "main";
        for (int k = 1; k <= k_max; ++k) rep.moments.push_back(moment(k));
        for (auto& [n, bf] : factors_) rep.block_factors.push_back(bf);
        rep.warnings = eng_.warnings();
        return rep;
    }

private:
    bool merged_connected(const CycleSubsets& cs, const std::vector<int>& blk, const VertexSet& u) const {
        if (conn_ == Connectivity::induced) return is_connected(induced_subgraph(cs.graph, u));
        // Subsets of the block must be linked through shared W vertices.
        std::vector<VertexSet> sub;
        for (int idx : blk) sub.push_back(cs.large[idx - 1]);
        auto mr = merge_family(cs.graph, sub);
        return mr.merged_subsets.size() == 1;
    }

    ModelParams params_;
    CoefficientEngine eng_;
    Connectivity conn_;
    std::map<int, BlockFactor> factors_;
};

// Route B: the alpha = 2 closed form in theta1, theta2.
class GaussEngine {
public:
    // wrap selects the b(pi) convention; WrapRule::omit is only for the mutation harness.
    explicit GaussEngine(const ModelParams& params, WrapRule wrap = WrapRule::include)
        : params_(params), wrap_(wrap) {
        params_.validate();
        if (!params_.law.is_gaussian_family()) throw CapabilityError("route B needs a Gaussian (alpha = 2) law");
        const double s = params_.law.gaussian_sigma_w() * params_.sigma_x;
        t1_ = theta1(params_.activation, s);
        t2_ = theta2(params_.activation, s);
    }

    double theta1_value() const { return t1_; }
    double theta2_value() const { return t2_; }

    double block_factor(int n) {
        auto it = factors_.find(n);
        if (it != factors_.end()) return it->second;
        double acc = 0.0;
        for (auto& mu : enumerate_noncrossing(n)) {
            int S = partition_stats(mu, wrap_).S;
            acc += std::pow(params_.psi, n - mu.size()) * std::pow(t1_, S) * std::pow(t2_, n - S);
        }
        factors_[n] = acc;
        return acc;
    }

    MomentEntry moment(int k) {
        if (k < 1) throw StructuralError("moments need k >= 1");
        if (k > kGaussCap) throw CapabilityError("route B is capped at k = " + std::to_string(kGaussCap));
        MomentEntry ent;
        ent.k = k;
        for (auto& pi : enumerate_noncrossing(k)) {
            PartitionStats st = partition_stats(pi, wrap_);
            CycleSubsets cs = w_pi_subsets(k, pi);
            TermRecord t;
            t.label = partition_label_v(pi);
            t.phi_power = k - pi.size();
            t.psi_power = -(k - 1);
            t.S = st.S;
            t.R = st.R;
            double term = std::pow(params_.phi, t.phi_power) / std::pow(params_.psi, k - 1) * std::pow(t1_, st.S);
            for (auto& sub : cs.large) {
                t.block_sizes.push_back(static_cast<int>(sub.size()));
                term *= block_factor(static_cast<int>(sub.size()));
            }
            t.value = term;
            ent.terms.push_back(t);
        }
        for (auto& t : ent.terms) ent.value += t.value;
        // Quadrature error of theta's is far below this floor.
        ent.error = 1e-12 * std::abs(ent.value);
        return ent;
    }

    MomentReport run(int k_max) {
        MomentReport rep;
        rep.engine = "gauss";
        rep.theta1 = t1_;
        rep.theta2 = t2_;
        for (int k = 1; k <= k_max; ++k) rep.moments.push_back(moment(k));
        return rep;
    }

private:
    ModelParams params_;
    WrapRule wrap_;
    double t1_ = 0.0, t2_ = 0.0;
    std::map<int, double> factors_;
};

// Route C: sum of tau0 over every quotient of the 2k-cycle.
class OracleEngine {
public:
    explicit OracleEngine(const ModelParams& params)
        : params_(params), eng_(params.activation, params.law, params.coeff_config(0xC)) {
        params_.validate();
    }

    CoefficientEngine& coefficients() { return eng_; }

    MomentEntry moment(int k) {
        if (k < 1) throw StructuralError("moments need k >= 1");
        if (k > kOracleCap) throw CapabilityError("route C is capped at k = " + std::to_string(kOracleCap));
        MomentEntry ent;
        ent.k = k;
        const auto cyc = cycle_graph(k);
        Value total;
        auto parts = enumerate_set_partitions(k);
        for (auto& pi : parts)
            for (auto& mu : parts) {
                auto g = quotient(cyc, pi, mu);
                Tau0Result r = tau0_limit(g, params_.phi, params_.psi, eng_);
                if (!r.admissible) continue;
                TermRecord t;
                t.label = "pi=" + pi.to_string() + " mu=" + mu.to_string();
                t.phi_power = g.num_edges() / 2 - static_cast<int>(g.v_vertices().size());
                t.psi_power = -(static_cast<int>(g.w_vertices().size()) - 1);
                t.S = r.S;
                t.R = r.R;
                t.value = r.value;
                t.error = r.error;
                t.note = std::to_string(r.decompositions) + " decompositions";
                total = total + Value{r.value, r.error};
                ent.terms.push_back(t);
            }
        for (auto& t : ent.terms) ent.value += t.value;
        ent.error = total.e;
        return ent;
    }

    MomentReport run(int k_max) {
        MomentReport rep;
        rep.engine = "oracle";
        for (int k = 1; k <= k_max; ++k) rep.moments.push_back(moment(k));
        rep.warnings = eng_.warnings();
        return rep;
    }

private:
    ModelParams params_;
    CoefficientEngine eng_;
};

struct HankelResult {
    bool psd = true;
    double min_eig = 0.0;
    double min_eig_shifted = 0.0;
    double tolerance = 0.0;
    double tolerance_shifted = 0.0;
};

// Stieltjes condition: [m_{i+j}] and [m_{i+j+1}] positive semidefinite within error bars.
inline HankelResult hankel_check(const MomentReport& rep) {
    std::vector<double> m{1.0}, e{0.0};
    for (auto& ent : rep.moments) {
        m.push_back(ent.value);
        e.push_back(ent.error);
    }
    const int kmax = static_cast<int>(rep.moments.size());
    if (kmax < 2) throw StructuralError("hankel_check needs k_max >= 2");
    auto check = [&](int shift, double& min_eig, double& tol) {
        int n = (kmax - shift) / 2 + 1;
        Eigen::MatrixXd H(n, n), Er(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                H(i, j) = m[i + j + shift];
                Er(i, j) = e[i + j + shift];
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
        min_eig = es.eigenvalues().minCoeff();
        tol = Er.norm() + 1e-12 * std::max(1.0, H.norm());
        return min_eig >= -tol;
    };
    HankelResult r;
    bool a = check(0, r.min_eig, r.tolerance);
    bool b = check(1, r.min_eig_shifted, r.tolerance_shifted);
    r.psd = a && b;
    return r;
}

}  // namespace ck

#endif

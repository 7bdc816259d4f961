#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "ck/cli.hpp"

namespace ck::cli {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

SuiteResult suite_partitions() {
    for (int k = 1; k <= 8; ++k) {
        if (enumerate_set_partitions(k).size() != bell_number(k))
            return {"partitions", false, "Bell count differs at k = " + std::to_string(k)};
        if (enumerate_noncrossing(k).size() != catalan_number(k))
            return {"partitions", false, "Catalan count differs at k = " + std::to_string(k)};
    }
    Partition ex(10, {{1, 3, 5}, {2, 4}, {6, 7, 9}, {8, 10}});
    if (nearest_neighbor_pairs(ex) != PairSet{{6, 7}}) return {"partitions", false, "b of the worked example"};
    if (noncrossing_links(ex) != PairSet{{1, 5}, {6, 7}}) return {"partitions", false, "c of the worked example"};
    return {"partitions", true, "counts for k <= 8 and the worked example"};
}

// Two independent derivations of S and R must agree: partition statistics and the W^pi
// construction, then route B built on those statistics against the quotient oracle.
SuiteResult suite_b_convention(WrapRule wrap) {
    for (int k = 1; k <= 6; ++k)
        for (auto& pi : enumerate_noncrossing(k)) {
            PartitionStats st = partition_stats(pi, wrap);
            CycleSubsets cs = w_pi_subsets(k, pi);
            if (st.S != static_cast<int>(cs.singles.size()) || st.R != static_cast<int>(cs.large.size()))
                return {"b-convention", false, "W^pi construction disagrees at " + pi.to_string()};
        }
    ModelParams p;
    p.activation = Activation::builtin("gauss_odd");
    p.law = WeightLaw::gaussian(1.0);
    GaussEngine b(p, wrap);
    OracleEngine c(p);
    for (int k = 1; k <= 3; ++k) {
        double vb = b.moment(k).value, vc = c.moment(k).value;
        if (std::abs(vb - vc) > 1e-9 * std::max(1.0, std::abs(vc)))
            return {"b-convention", false, "route B " + num(vb) + " vs oracle " + num(vc) + " at k = " + std::to_string(k)};
    }
    return {"b-convention", true, "statistics, W^pi and routes B/C agree"};
}

SuiteResult suite_blocks() {
    for (int k = 1; k <= 5; ++k) {
        auto g = cycle_graph(k);
        auto bd = classify(g);
        if (k == 1) {
            // The 2-cycle on one W and one V vertex is a double edge: no large block.
            if (!bd.admissible) return {"blocks", false, "double edge not admissible"};
            continue;
        }
        if (!bd.admissible || bd.blocks.size() != 1) return {"blocks", false, "cycle of length " + std::to_string(2 * k)};
        if (enumerate_admissible_decompositions(bd.blocks[0], bd.block_w[0]).size() != 1)
            return {"blocks", false, "simple cycle does not have exactly one decomposition"};
    }
    return {"blocks", true, "cycles are single admissible blocks with one decomposition"};
}

SuiteResult suite_identity() {
    long checked = 0;
    for (int k = 1; k <= 3; ++k) {
        auto cyc = cycle_graph(k);
        auto parts = enumerate_set_partitions(k);
        for (auto& pi : parts)
            for (auto& mu : parts) {
                auto g = quotient(cyc, pi, mu);
                Rational r = rho(g);
                for (auto& fam : enumerate_w_class_families(g)) {
                    long sum = 0;
                    for (auto& s : fam) sum += static_cast<long>(s.size()) - 1;
                    if (Rational(sum, 1) != r) return {"identity", false, "sum (|W_i| - 1) differs from rho"};
                    ++checked;
                }
            }
    }
    return {"identity", true, std::to_string(checked) + " families for k <= 3"};
}

SuiteResult suite_coefficients() {
    const Activation f = Activation::builtin("gauss_odd");
    const WeightLaw law = WeightLaw::gaussian(1.0);
    CoefficientEngine eng(f, law, CoefficientConfig{});
    const double t1 = theta1(f, 1.0), t2 = theta2(f, 1.0);
    for (int d : {2, 4, 6}) {
        double c = eng.c_degree(d).value, want = std::pow(t1, d / 2);
        if (std::abs(c - want) > 1e-10 * want) return {"coefficients", false, "C_" + std::to_string(d)};
    }
    for (int n : {2, 3}) {
        VertexSet all;
        for (int w = 1; w <= n; ++w) all.push_back(w);
        double c = eng.c_family(cycle_graph(n), {all}).value, want = std::pow(t2, n);
        if (std::abs(c - want) > 1e-10 * want) return {"coefficients", false, "cycle C_W at |W| = " + std::to_string(n)};
    }
    return {"coefficients", true, "C_d and cycle C_W against theta1, theta2"};
}

SuiteResult suite_engines() {
    ModelParams p;
    p.phi = 2.0;
    p.psi = 0.5;
    p.activation = Activation::builtin("gauss_odd");
    p.law = WeightLaw::gaussian(1.0);
    MainEngine a(p);
    GaussEngine b(p);
    for (int k = 1; k <= 4; ++k) {
        auto ma = a.moment(k);
        double vb = b.moment(k).value;
        if (std::abs(ma.value - vb) > std::max(1e-9 * std::abs(vb), 3.0 * ma.error))
            return {"engines", false, "route A vs B at k = " + std::to_string(k)};
    }
    p.activation = Activation::builtin("identity");
    p.phi = p.psi = 1.0;
    GaussEngine id(p);
    if (std::abs(id.moment(1).value - 1.0) > 1e-12 || std::abs(id.moment(2).value - 3.0) > 1e-12)
        return {"engines", false, "identity activation does not give m = [1, 3]"};
    return {"engines", true, "routes A/B agree for k <= 4; identity gives m_1 = 1, m_2 = 3"};
}

SuiteResult suite_spectrum() {
    SimConfig cfg;
    cfg.n = cfg.m = cfg.p = 48;
    cfg.trials = 3;
    cfg.seed = 11;
    cfg.law = WeightLaw::stable(1.0, 1.0);
    SimulationReport rep = run_trials(cfg);
    if (rep.worst_psd > 1e-8) return {"spectrum", false, "PSD violation " + num(rep.worst_psd)};
    if (rep.worst_trace > 1e-8) return {"spectrum", false, "trace mismatch " + num(rep.worst_trace)};
    const double sup = cfg.activation.sup_norm();
    for (auto& s : rep.samples)
        if (s.moments[0] > sup * sup) return {"spectrum", false, "m_1 above sup-norm bound"};
    Eigen::MatrixXd Y = build_features(cfg, 0);
    auto base = gram_eigenvalues(Y);
    Y.col(5) = -Y.col(5);
    if (gram_eigenvalues(Y) != base) return {"spectrum", false, "sign flip of a column changed the spectrum"};
    auto tm = trace_moments(Y, 3);
    auto sm = spectral_moments(base, 3);
    for (int k = 0; k < 3; ++k)
        if (std::abs(tm[k] - sm[k]) > 1e-6 * std::abs(tm[k])) return {"spectrum", false, "trace moments"};
    return {"spectrum", true, "PSD, trace, sup-norm, sign flip and trace moments"};
}

SuiteResult suite_hankel() {
    ModelParams p;
    p.activation = Activation::builtin("sin_gauss");
    p.law = WeightLaw::gaussian(1.3);
    auto rep = GaussEngine(p).run(4);
    HankelResult h = hankel_check(rep);
    return {"hankel", h.psd, "min eigenvalue " + num(h.min_eig)};
}

}  // namespace

std::vector<SuiteResult> selftest(WrapRule wrap) {
    std::vector<std::function<SuiteResult()>> suites{suite_partitions,
                                                     [wrap] { return suite_b_convention(wrap); },
                                                     suite_blocks,
                                                     suite_identity,
                                                     suite_coefficients,
                                                     suite_engines,
                                                     suite_spectrum,
                                                     suite_hankel};
    std::vector<SuiteResult> out;
    for (auto& s : suites) {
        try {
            out.push_back(s());
        } catch (const std::exception& e) {
            out.push_back({"suite", false, std::string("exception: ") + e.what()});
        }
    }
    return out;
}

}  // namespace ck::cli

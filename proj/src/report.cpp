#include "ck/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ck::report {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

nlohmann::json term_json(const TermRecord& t) {
    return {{"label", t.label},         {"phi_power", t.phi_power},   {"psi_power", t.psi_power},
            {"S", t.S},                 {"R", t.R},                   {"block_sizes", t.block_sizes},
            {"value", t.value},         {"error", t.error},           {"note", t.note}};
}

nlohmann::json mu_json(const MuTerm& m) {
    return {{"mu", m.mu},
            {"noncrossing", m.noncrossing},
            {"psi_power", m.psi_power},
            {"R_mu", m.R_mu},
            {"S_mu", m.S_mu},
            {"coefficient", m.coefficient},
            {"coefficient_error", m.coefficient_error},
            {"p_terms", m.p_terms},
            {"nonsingleton_p", m.nonsingleton_p},
            {"nonsingleton_p_error", m.nonsingleton_p_error}};
}

std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace

nlohmann::json to_json(const MomentReport& rep) {
    nlohmann::json j;
    j["engine"] = rep.engine;
    j["moments"] = nlohmann::json::array();
    for (auto& e : rep.moments) {
        nlohmann::json m{{"k", e.k}, {"value", e.value}, {"error", e.error}};
        m["terms"] = nlohmann::json::array();
        double sum = 0.0;
        for (auto& t : e.terms) {
            m["terms"].push_back(term_json(t));
            sum += t.value;
        }
        m["breakdown_sum"] = sum;
        j["moments"].push_back(m);
    }
    if (!rep.block_factors.empty()) {
        j["block_factors"] = nlohmann::json::array();
        for (auto& bf : rep.block_factors) {
            nlohmann::json b{{"n", bf.n}, {"value", bf.value}, {"error", bf.error}};
            b["mu_terms"] = nlohmann::json::array();
            for (auto& m : bf.mu_terms) b["mu_terms"].push_back(mu_json(m));
            j["block_factors"].push_back(b);
        }
    }
    if (rep.engine == "gauss") {
        j["theta1"] = rep.theta1;
        j["theta2"] = rep.theta2;
    }
    j["warnings"] = rep.warnings;
    return j;
}

nlohmann::json to_json(const Histogram& h) {
    return {{"bin_lo", h.lo}, {"bin_hi", h.hi}, {"count", h.count}, {"density", h.density}};
}

std::string moments_csv(const MomentReport& rep) {
    std::ostringstream os;
    os << "k,m_k,err,engine\n";
    for (auto& e : rep.moments) os << e.k << ',' << fmt(e.value) << ',' << fmt(e.error) << ',' << rep.engine << '\n';
    return os.str();
}

namespace {

int max_k(const std::vector<MomentReport>& reps) {
    int k = 0;
    for (auto& r : reps)
        for (auto& e : r.moments) k = std::max(k, e.k);
    return k;
}

const MomentEntry* find_k(const MomentReport& r, int k) {
    for (auto& e : r.moments)
        if (e.k == k) return &e;
    return nullptr;
}

}  // namespace

std::vector<std::optional<double>> max_pairwise_deviation(const std::vector<MomentReport>& reps) {
    const int K = max_k(reps);
    std::vector<std::optional<double>> out(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) {
        std::vector<double> vals;
        for (auto& r : reps)
            if (auto* e = find_k(r, k)) vals.push_back(e->value);
        if (vals.size() < 2) continue;
        double d = 0.0;
        for (std::size_t a = 0; a < vals.size(); ++a)
            for (std::size_t b = a + 1; b < vals.size(); ++b) d = std::max(d, std::abs(vals[a] - vals[b]));
        out[k - 1] = d;
    }
    return out;
}

std::string moments_csv_wide(const std::vector<MomentReport>& reps) {
    std::ostringstream os;
    os << 'k';
    for (auto& r : reps) os << ',' << r.engine << ',' << r.engine << "_err";
    os << ",max_pairwise_dev\n";
    const auto dev = max_pairwise_deviation(reps);
    for (int k = 1; k <= max_k(reps); ++k) {
        os << k;
        for (auto& r : reps) {
            if (auto* e = find_k(r, k))
                os << ',' << fmt(e->value) << ',' << fmt(e->error);
            else
                os << ",,";
        }
        os << ',' << opt(dev[k - 1]) << '\n';
    }
    return os.str();
}

std::string histogram_csv(const Histogram& h) {
    std::ostringstream os;
    os << "bin_lo,bin_hi,count,density\n";
    for (std::size_t b = 0; b < h.count.size(); ++b)
        os << fmt(h.lo[b]) << ',' << fmt(h.hi[b]) << ',' << h.count[b] << ',' << fmt(h.density[b]) << '\n';
    return os.str();
}

std::string moment_table_csv(const std::vector<MomentRow>& rows) {
    std::ostringstream os;
    os << "k,mean,stderr,theory,theory_err,z_score\n";
    for (auto& r : rows)
        os << r.k << ',' << fmt(r.mean) << ',' << fmt(r.stderr_) << ',' << opt(r.theory) << ',' << opt(r.theory_err)
           << ',' << opt(r.z_score) << '\n';
    return os.str();
}

double z_score(double empirical, double stderr_, double theory, double theory_err) {
    const double diff = std::abs(empirical - theory);
    const double scale = std::sqrt(theory_err * theory_err + stderr_ * stderr_);
    if (diff == 0.0) return 0.0;
    if (scale == 0.0) return std::numeric_limits<double>::infinity();
    return diff / scale;
}

std::string eigenvalues_csv(const SpectrumSample& s) {
    std::ostringstream os;
    os << "lambda\n";
    for (double l : s.eigenvalues) os << fmt(l) << '\n';
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace ck::report

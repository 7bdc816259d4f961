#ifndef CK_QUADRATURE_HPP
#define CK_QUADRATURE_HPP

#include <cmath>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ck/errors.hpp"

namespace ck {

inline constexpr int kHermiteNodes = 200;

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;  // sum to 1
};

// Gauss-Hermite rule for the standard normal weight (probabilists' Hermite
// polynomials), from the eigen-decomposition of the Jacobi matrix.
inline const GaussRule& gauss_hermite_rule(int n = kHermiteNodes) {
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    if (n < 1) throw std::invalid_argument("Gauss-Hermite rule needs at least one node");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(static_cast<double>(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success) throw QuadratureError("Gauss-Hermite eigen-solve failed", 0.0);
    GaussRule rule;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        double v0 = es.eigenvectors()(0, i);
        rule.nodes.push_back(es.eigenvalues()(i));
        rule.weights.push_back(v0 * v0);
        total += v0 * v0;
    }
    for (auto& w : rule.weights) w /= total;
    return cache.emplace(n, std::move(rule)).first->second;
}

// E[g(s Z)] for Z ~ N(0, 1).
template <class F>
double gaussian_expectation(F&& g, double s, int n = kHermiteNodes) {
    const GaussRule& rule = gauss_hermite_rule(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * g(s * rule.nodes[i]);
    return acc;
}

// Probabilists' Hermite polynomial He_j(x).
inline double hermite_he(int j, double x) {
    if (j == 0) return 1.0;
    double a = 1.0, b = x;
    for (int i = 1; i < j; ++i) {
        double c = x * b - i * a;
        a = b;
        b = c;
    }
    return b;
}

// (n-1)!! for even n (Gaussian moment E Z^n), 0 for odd n.
inline double gaussian_moment(int n) {
    if (n % 2) return 0.0;
    double r = 1.0;
    for (int i = n - 1; i > 1; i -= 2) r *= i;
    return r;
}

}  // namespace ck

#endif

#ifndef CK_BIPARTITE_GRAPH_HPP
#define CK_BIPARTITE_GRAPH_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ck/errors.hpp"
#include "ck/partitions.hpp"

namespace ck {

using VertexSet = std::vector<int>;  // sorted ids

// Exact rational with small denominators, used for rho(G) = |W|+|V|-|E|/2-1.
struct Rational {
    long num = 0;
    long den = 1;

    Rational() = default;
    Rational(long n, long d = 1) : num(n), den(d) {
        if (den < 0) num = -num, den = -den;
        long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) num /= g, den /= g;
    }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string to_string() const {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }
};

// Finite bipartite multigraph with vertex classes W and V. Edges are keyed by
// (w, v) and carry an integer multiplicity m(e) >= 1; |E| counts multiplicity.
class BipartiteMultigraph {
public:
    void add_w(int id, std::string label = {}, std::vector<int> origin = {}) {
        if (w_label_.count(id)) throw StructuralError("duplicate W vertex " + std::to_string(id));
        w_.push_back(id);
        w_label_[id] = label.empty() ? "w" + std::to_string(id) : std::move(label);
        w_origin_[id] = origin.empty() ? std::vector<int>{id} : std::move(origin);
    }
    void add_v(int id, std::string label = {}, std::vector<int> origin = {}) {
        if (v_label_.count(id)) throw StructuralError("duplicate V vertex " + std::to_string(id));
        v_.push_back(id);
        v_label_[id] = label.empty() ? "v" + std::to_string(id) : std::move(label);
        v_origin_[id] = origin.empty() ? std::vector<int>{id} : std::move(origin);
    }
    void add_edge(int w, int v, int multiplicity = 1) {
        if (!w_label_.count(w) || !v_label_.count(v))
            throw StructuralError("edge endpoint does not exist");
        if (multiplicity < 1) throw StructuralError("edge multiplicity must be >= 1");
        edges_[{w, v}] += multiplicity;
    }

    const std::vector<int>& w_vertices() const { return w_; }
    const std::vector<int>& v_vertices() const { return v_; }
    const std::map<std::pair<int, int>, int>& edges() const { return edges_; }
    bool has_w(int id) const { return w_label_.count(id) > 0; }
    bool has_v(int id) const { return v_label_.count(id) > 0; }
    const std::string& w_label(int id) const { return w_label_.at(id); }
    const std::string& v_label(int id) const { return v_label_.at(id); }
    const std::vector<int>& w_origin(int id) const { return w_origin_.at(id); }
    const std::vector<int>& v_origin(int id) const { return v_origin_.at(id); }

    int multiplicity(int w, int v) const {
        auto it = edges_.find({w, v});
        return it == edges_.end() ? 0 : it->second;
    }
    int num_edges() const {
        int s = 0;
        for (auto& [key, m] : edges_) s += m;
        return s;
    }
    int deg_w(int w) const {
        int s = 0;
        for (auto& [key, m] : edges_)
            if (key.first == w) s += m;
        return s;
    }
    int deg_v(int v) const {
        int s = 0;
        for (auto& [key, m] : edges_)
            if (key.second == v) s += m;
        return s;
    }
    // (v, multiplicity) pairs adjacent to w, ordered by v id.
    std::vector<std::pair<int, int>> neighbors_w(int w) const {
        std::vector<std::pair<int, int>> out;
        for (auto& [key, m] : edges_)
            if (key.first == w) out.emplace_back(key.second, m);
        return out;
    }
    std::vector<std::pair<int, int>> neighbors_v(int v) const {
        std::vector<std::pair<int, int>> out;
        for (auto& [key, m] : edges_)
            if (key.second == v) out.emplace_back(key.first, m);
        return out;
    }

    // Compact text form used as a cache key: sorted edge list with multiplicities.
    std::string key() const {
        std::ostringstream os;
        os << "W";
        for (int w : w_) os << ' ' << w;
        os << " V";
        for (int v : v_) os << ' ' << v;
        os << " E";
        for (auto& [k, m] : edges_) os << ' ' << k.first << ',' << k.second << 'x' << m;
        return os.str();
    }

    std::string to_dot(const std::string& name = "G") const {
        std::ostringstream os;
        os << "graph " << name << " {\n";
        for (int w : w_) os << "  w_" << w << " [label=\"" << w_label(w) << "\", shape=circle];\n";
        for (int v : v_)
            os << "  v_" << v << " [label=\"" << v_label(v) << "\", shape=circle, style=filled];\n";
        for (auto& [k, m] : edges_)
            os << "  w_" << k.first << " -- v_" << k.second << " [label=\"" << m << "\"];\n";
        os << "}\n";
        return os.str();
    }

private:
    std::vector<int> w_, v_;
    std::map<int, std::string> w_label_, v_label_;
    std::map<int, std::vector<int>> w_origin_, v_origin_;
    std::map<std::pair<int, int>, int> edges_;
};

// Simple bipartite cycle of length 2k: edges (w_i, v_i) and (w_{i+1}, v_i), indices mod k.
// For k = 1 this is a single edge of multiplicity 2.
inline BipartiteMultigraph cycle_graph(int k) {
    if (k < 1) throw StructuralError("cycle_graph needs k >= 1");
    BipartiteMultigraph g;
    for (int i = 1; i <= k; ++i) g.add_w(i);
    for (int i = 1; i <= k; ++i) g.add_v(i);
    for (int i = 1; i <= k; ++i) {
        g.add_edge(i, i);
        g.add_edge(i % k + 1, i);
    }
    return g;
}

// Identifies V vertices per `pi` and W vertices per `mu`. Partition element i refers to
// the i-th vertex in the graph's ordered vertex list. Multiplicities accumulate.
inline BipartiteMultigraph quotient(const BipartiteMultigraph& g, const Partition& pi, const Partition& mu) {
    const auto& W = g.w_vertices();
    const auto& V = g.v_vertices();
    if (pi.ground_size() != static_cast<int>(V.size()) || mu.ground_size() != static_cast<int>(W.size()))
        throw StructuralError("quotient: partition sizes do not match the vertex sets");
    BipartiteMultigraph q;
    std::map<int, int> wmap, vmap;
    int tilde = 0;
    for (int b = 0; b < mu.size(); ++b) {
        std::vector<int> origin;
        for (int x : mu.blocks()[b])
            for (int o : g.w_origin(W[x - 1])) origin.push_back(o);
        std::sort(origin.begin(), origin.end());
        std::string label = mu.blocks()[b].size() == 1 ? g.w_label(W[mu.blocks()[b][0] - 1])
                                                        : "w~" + std::to_string(++tilde);
        q.add_w(b + 1, label, origin);
        for (int x : mu.blocks()[b]) wmap[W[x - 1]] = b + 1;
    }
    tilde = 0;
    for (int b = 0; b < pi.size(); ++b) {
        std::vector<int> origin;
        for (int x : pi.blocks()[b])
            for (int o : g.v_origin(V[x - 1])) origin.push_back(o);
        std::sort(origin.begin(), origin.end());
        std::string label = pi.blocks()[b].size() == 1 ? g.v_label(V[pi.blocks()[b][0] - 1])
                                                        : "v~" + std::to_string(++tilde);
        q.add_v(b + 1, label, origin);
        for (int x : pi.blocks()[b]) vmap[V[x - 1]] = b + 1;
    }
    for (auto& [k, m] : g.edges()) q.add_edge(wmap.at(k.first), vmap.at(k.second), m);
    return q;
}

// G(W_i): the W-vertices of the subset, every V vertex adjacent to them, and every
// edge incident to the subset.
inline BipartiteMultigraph induced_subgraph(const BipartiteMultigraph& g, const VertexSet& wsub) {
    if (wsub.empty()) throw StructuralError("induced_subgraph: empty W subset");
    std::set<int> ws(wsub.begin(), wsub.end());
    std::set<int> vs;
    for (int w : ws) {
        if (!g.has_w(w)) throw StructuralError("induced_subgraph: unknown W vertex " + std::to_string(w));
        for (auto& [v, m] : g.neighbors_w(w)) vs.insert(v);
    }
    BipartiteMultigraph h;
    for (int w : g.w_vertices())
        if (ws.count(w)) h.add_w(w, g.w_label(w), g.w_origin(w));
    for (int v : g.v_vertices())
        if (vs.count(v)) h.add_v(v, g.v_label(v), g.v_origin(v));
    for (auto& [k, m] : g.edges())
        if (ws.count(k.first)) h.add_edge(k.first, k.second, m);
    return h;
}

inline bool is_connected(const BipartiteMultigraph& g) {
    const int nw = static_cast<int>(g.w_vertices().size());
    const int nv = static_cast<int>(g.v_vertices().size());
    if (nw + nv == 0) return true;
    std::map<int, int> widx, vidx;
    for (int i = 0; i < nw; ++i) widx[g.w_vertices()[i]] = i;
    for (int i = 0; i < nv; ++i) vidx[g.v_vertices()[i]] = nw + i;
    std::vector<std::vector<int>> adj(nw + nv);
    for (auto& [k, m] : g.edges()) {
        int a = widx.at(k.first), b = vidx.at(k.second);
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<char> seen(nw + nv, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int y : adj[x])
            if (!seen[y]) seen[y] = 1, ++count, stack.push_back(y);
    }
    return count == nw + nv;
}

inline Rational rho(const BipartiteMultigraph& g) {
    if (!is_connected(g)) throw StructuralError("rho: graph is not connected");
    long twice = 2L * static_cast<long>(g.w_vertices().size()) + 2L * static_cast<long>(g.v_vertices().size()) -
                 g.num_edges() - 2L;
    return Rational(twice, 2);
}

// Degree of v inside G(W_i): total multiplicity of edges from v into the subset.
inline int deg_v_in(const BipartiteMultigraph& g, const VertexSet& wsub, int v) {
    int s = 0;
    for (int w : wsub) s += g.multiplicity(w, v);
    return s;
}

inline VertexSet neighbors_of_set(const BipartiteMultigraph& g, const VertexSet& wsub) {
    std::set<int> vs;
    for (int w : wsub)
        for (auto& [v, m] : g.neighbors_w(w)) vs.insert(v);
    return VertexSet(vs.begin(), vs.end());
}

// W-vertices (resp. V-vertices) that belong to at least two of the given subgraphs.
inline VertexSet shared_w(const std::vector<VertexSet>& subsets) {
    std::map<int, int> count;
    for (auto& s : subsets)
        for (int w : s) ++count[w];
    VertexSet out;
    for (auto& [w, c] : count)
        if (c >= 2) out.push_back(w);
    return out;
}
inline VertexSet shared_v(const BipartiteMultigraph& g, const std::vector<VertexSet>& subsets) {
    std::map<int, int> count;
    for (auto& s : subsets)
        for (int v : neighbors_of_set(g, s)) ++count[v];
    VertexSet out;
    for (auto& [v, c] : count)
        if (c >= 2) out.push_back(v);
    return out;
}

inline VertexSet sorted_set(VertexSet s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

struct MergeResult {
    std::vector<VertexSet> merged_subsets;          // pairwise disjoint
    std::vector<BipartiteMultigraph> merged_graphs;  // G(merged subset), duplicates dropped
    std::vector<std::vector<int>> groups;           // indices of the input subsets per merged subset
};

// Groups subsets by connected components of their W-intersection graph and merges each group.
inline MergeResult merge_family(const BipartiteMultigraph& g, const std::vector<VertexSet>& subsets) {
    const int K = static_cast<int>(subsets.size());
    for (auto& s : subsets)
        if (!is_connected(induced_subgraph(g, s)))
            throw StructuralError("merge_family: induced subgraph is not connected");
    std::vector<int> parent(K);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j) {
            bool meet = false;
            for (int w : subsets[i])
                if (std::find(subsets[j].begin(), subsets[j].end(), w) != subsets[j].end()) meet = true;
            if (meet) parent[find(i)] = find(j);
        }
    std::map<int, std::vector<int>> comp;
    for (int i = 0; i < K; ++i) comp[find(i)].push_back(i);
    std::vector<std::vector<int>> groups;
    for (auto& [root, idx] : comp) groups.push_back(idx);
    std::sort(groups.begin(), groups.end());
    MergeResult res;
    for (auto& grp : groups) {
        VertexSet u;
        for (int i : grp) u.insert(u.end(), subsets[i].begin(), subsets[i].end());
        u = sorted_set(u);
        res.merged_subsets.push_back(u);
        res.merged_graphs.push_back(induced_subgraph(g, u));
        res.groups.push_back(grp);
    }
    return res;
}

struct BlockDecomposition {
    std::vector<VertexSet> block_w;             // W-set of each block
    std::vector<BipartiteMultigraph> blocks;    // G(W_B)
    VertexSet separating_vertices;              // V vertices in two or more blocks
    bool is_block_tree = false;
    bool admissible = false;
    int R = 0;  // blocks with |W_B| >= 2
    int S = 0;  // |W| - sum of |W_B| over those blocks
    std::string reason;  // why the graph is not admissible (empty if admissible)
};

namespace detail {

// Edge-biconnected components (Tarjan) of the multigraph with parallel edges expanded.
// Returns, for each component, the set of node indices it touches.
inline std::vector<std::set<int>> biconnected_components(int nnodes, const std::vector<std::pair<int, int>>& elist) {
    std::vector<std::vector<std::pair<int, int>>> adj(nnodes);  // (neighbor, edge id)
    for (int e = 0; e < static_cast<int>(elist.size()); ++e) {
        adj[elist[e].first].emplace_back(elist[e].second, e);
        adj[elist[e].second].emplace_back(elist[e].first, e);
    }
    std::vector<int> disc(nnodes, -1), low(nnodes, 0);
    std::vector<int> estack;
    std::vector<std::set<int>> comps;
    int timer = 0;
    std::function<void(int, int)> dfs = [&](int u, int parent_edge) {
        disc[u] = low[u] = timer++;
        for (auto [v, e] : adj[u]) {
            if (e == parent_edge) continue;
            if (disc[v] == -1) {
                estack.push_back(e);
                dfs(v, e);
                low[u] = std::min(low[u], low[v]);
                if (low[v] >= disc[u]) {
                    std::set<int> comp;
                    while (true) {
                        int f = estack.back();
                        estack.pop_back();
                        comp.insert(elist[f].first);
                        comp.insert(elist[f].second);
                        if (f == e) break;
                    }
                    comps.push_back(std::move(comp));
                }
            } else if (disc[v] < disc[u]) {
                estack.push_back(e);
                low[u] = std::min(low[u], disc[v]);
            }
        }
    };
    for (int s = 0; s < nnodes; ++s)
        if (disc[s] == -1) {
            dfs(s, -1);
            if (adj[s].empty()) comps.push_back({s});
        }
    return comps;
}

}  // namespace detail

inline constexpr int kBlockTreeSubsetCap = 20;

// Block structure with separating vertices in V, block-tree test and admissibility.
inline BlockDecomposition classify(const BipartiteMultigraph& g) {
    if (!is_connected(g)) throw StructuralError("classify: graph is not connected");
    const auto& W = g.w_vertices();
    const auto& V = g.v_vertices();
    const int nw = static_cast<int>(W.size());
    const int nv = static_cast<int>(V.size());
    std::map<int, int> widx, vidx;
    for (int i = 0; i < nw; ++i) widx[W[i]] = i;
    for (int i = 0; i < nv; ++i) vidx[V[i]] = nw + i;
    std::vector<std::pair<int, int>> elist;
    for (auto& [k, m] : g.edges())
        for (int r = 0; r < m; ++r) elist.emplace_back(widx.at(k.first), vidx.at(k.second));
    auto comps = detail::biconnected_components(nw + nv, elist);

    // Glue components that share a W vertex: W vertices never separate blocks.
    const int C = static_cast<int>(comps.size());
    std::vector<int> parent(C);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    std::map<int, int> owner;  // W node -> component
    for (int c = 0; c < C; ++c)
        for (int node : comps[c])
            if (node < nw) {
                auto it = owner.find(node);
                if (it == owner.end())
                    owner[node] = c;
                else
                    parent[find(c)] = find(it->second);
            }
    std::map<int, std::set<int>> group_w;
    for (auto& [node, c] : owner) group_w[find(c)].insert(W[node]);

    BlockDecomposition out;
    for (auto& [root, ws] : group_w) out.block_w.emplace_back(ws.begin(), ws.end());
    std::sort(out.block_w.begin(), out.block_w.end(),
              [&](const VertexSet& a, const VertexSet& b) { return widx.at(a.front()) < widx.at(b.front()); });
    for (auto& ws : out.block_w) out.blocks.push_back(induced_subgraph(g, ws));

    std::map<int, int> vcount;
    for (auto& b : out.blocks)
        for (int v : b.v_vertices()) ++vcount[v];
    for (int v : V)
        if (vcount[v] >= 2) out.separating_vertices.push_back(v);

    // Block tree: for any k >= 2 blocks, at most k-1 V vertices are shared among them.
    const int nb = static_cast<int>(out.blocks.size());
    out.is_block_tree = true;
    if (nb <= kBlockTreeSubsetCap) {
        for (std::uint32_t mask = 0; mask < (1u << nb) && out.is_block_tree; ++mask) {
            int k = __builtin_popcount(mask);
            if (k < 2) continue;
            std::vector<VertexSet> sel;
            for (int b = 0; b < nb; ++b)
                if (mask & (1u << b)) sel.push_back(out.block_w[b]);
            if (static_cast<int>(shared_v(g, sel).size()) > k - 1) out.is_block_tree = false;
        }
    } else {
        // Equivalent tree count on the block/separator incidence graph.
        int incid = 0;
        for (auto& [v, c] : vcount)
            if (c >= 2) incid += c - 1;
        out.is_block_tree = incid == nb - 1;
    }

    out.admissible = out.is_block_tree;
    if (!out.is_block_tree) out.reason = "not a block tree";
    for (std::size_t b = 0; b < out.blocks.size() && out.admissible; ++b) {
        for (int w : out.block_w[b])
            if (g.deg_w(w) % 2 != 0) {
                out.admissible = false;
                out.reason = "odd degree at " + g.w_label(w);
            }
        for (int v : out.blocks[b].v_vertices())
            if (deg_v_in(g, out.block_w[b], v) != 2) {
                out.admissible = false;
                out.reason = "V vertex " + g.v_label(v) + " has block degree != 2";
            }
    }
    int covered = 0;
    for (auto& ws : out.block_w)
        if (ws.size() >= 2) ++out.R, covered += static_cast<int>(ws.size());
    out.S = nw - covered;
    return out;
}

inline constexpr int kDecompositionCap = 8;

namespace detail {

inline bool violates_shared_bound(const std::vector<VertexSet>& fam) {
    // True iff some sub-collection of size k >= 2 shares more than k-1 W vertices.
    const int K = static_cast<int>(fam.size());
    for (std::uint32_t mask = 0; mask < (1u << K); ++mask) {
        int k = __builtin_popcount(mask);
        if (k < 2) continue;
        std::vector<VertexSet> sel;
        for (int i = 0; i < K; ++i)
            if (mask & (1u << i)) sel.push_back(fam[i]);
        if (static_cast<int>(shared_w(sel).size()) > k - 1) return true;
    }
    return false;
}

inline bool violates_shared_bound_with_last(const std::vector<VertexSet>& fam) {
    // Same as above but only sub-collections that contain the last member.
    const int K = static_cast<int>(fam.size());
    if (K < 2) return false;
    for (std::uint32_t mask = 0; mask < (1u << (K - 1)); ++mask) {
        int k = __builtin_popcount(mask) + 1;
        if (k < 2) continue;
        std::vector<VertexSet> sel{fam.back()};
        for (int i = 0; i < K - 1; ++i)
            if (mask & (1u << i)) sel.push_back(fam[i]);
        if (static_cast<int>(shared_w(sel).size()) > k - 1) return true;
    }
    return false;
}

inline bool intersects(const VertexSet& a, const VertexSet& b) {
    for (int x : a)
        if (std::binary_search(b.begin(), b.end(), x)) return true;
    return false;
}

}  // namespace detail

// Checks conditions (a)-(f) of an admissible decomposition of the block W_B.
inline bool is_admissible_decomposition(const BipartiteMultigraph& g, const VertexSet& w_block,
                                        const std::vector<VertexSet>& fam) {
    if (fam.empty()) return false;
    const VertexSet wb = sorted_set(w_block);
    VertexSet uni;
    for (auto& s : fam) {
        if (s.size() < 2) return false;                                  // (c)
        for (int w : s)
            if (!std::binary_search(wb.begin(), wb.end(), w)) return false;
        if (!is_connected(induced_subgraph(g, s))) return false;         // (d)
        uni.insert(uni.end(), s.begin(), s.end());
    }
    if (sorted_set(uni) != wb) return false;                             // (a)
    const int K = static_cast<int>(fam.size());
    if (K >= 2)
        for (int i = 0; i < K; ++i) {
            bool meets = false;
            for (int j = 0; j < K; ++j)
                if (j != i && detail::intersects(sorted_set(fam[i]), sorted_set(fam[j]))) meets = true;
            if (!meets) return false;                                    // (b)
        }
    for (int v : neighbors_of_set(g, wb)) {
        bool ok = false;
        for (auto& s : fam)
            if (deg_v_in(g, s, v) >= 2) ok = true;
        if (!ok) return false;                                           // (e)
    }
    std::vector<VertexSet> sorted_fam;
    for (auto& s : fam) sorted_fam.push_back(sorted_set(s));
    return !detail::violates_shared_bound(sorted_fam);                  // (f)
}

// All families {W_1..W_K} satisfying (a)-(f) for the block W_B, by backtracking over
// connected candidate subsets. Families are returned with members in candidate order.
inline std::vector<std::vector<VertexSet>> enumerate_admissible_decompositions(const BipartiteMultigraph& g,
                                                                                const VertexSet& w_block,
                                                                                int cap = kDecompositionCap) {
    const VertexSet wb = sorted_set(w_block);
    const int n = static_cast<int>(wb.size());
    if (n < 2) throw StructuralError("admissible decompositions need |W_B| >= 2");
    if (n > cap)
        throw EnumerationLimitError("admissible decomposition enumeration for |W_B|=" + std::to_string(n) +
                                    " exceeds cap " + std::to_string(cap));
    // Candidates: connected subsets of size >= 2, largest first so {W_B} comes first.
    std::vector<VertexSet> cand;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) < 2) continue;
        VertexSet s;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) s.push_back(wb[i]);
        if (is_connected(induced_subgraph(g, s))) cand.push_back(s);
    }
    std::stable_sort(cand.begin(), cand.end(),
                     [](const VertexSet& a, const VertexSet& b) { return a.size() > b.size(); });
    const VertexSet vb = neighbors_of_set(g, wb);

    std::vector<std::vector<VertexSet>> out;
    std::vector<VertexSet> fam;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (!fam.empty() && is_admissible_decomposition(g, wb, fam)) out.push_back(fam);
        for (std::size_t c = start; c < cand.size(); ++c) {
            fam.push_back(cand[c]);
            if (!detail::violates_shared_bound_with_last(fam)) rec(c + 1);
            fam.pop_back();
        }
    };
    rec(0);
    return out;
}

// Result of building the finest partition of W associated with a partition of the
// cycle's V or W vertices. `graph` is the corresponding quotient of cycle_graph(k);
// subsets are W ids of that graph; `subsets` keeps construction order.
struct CycleSubsets {
    BipartiteMultigraph graph;
    std::vector<VertexSet> subsets;
    std::vector<VertexSet> large;    // |W_i| >= 2
    std::vector<VertexSet> singles;  // |W_i| == 1
};

namespace detail {

inline void split_sizes(CycleSubsets& out) {
    for (auto& s : out.subsets) (s.size() >= 2 ? out.large : out.singles).push_back(s);
}

}  // namespace detail

// Finest partition W^pi for a noncrossing partition pi of V on the 2k-cycle. Each
// consecutive pair (v_a, v_b) of a block yields {w_{a+1}, ..., w_b} minus the W vertices
// of nested pairs; the leftover W vertices form one more subset.
inline CycleSubsets w_pi_subsets(int k, const Partition& pi) {
    if (pi.ground_size() != k) throw StructuralError("w_pi_subsets: partition size mismatch");
    if (!is_noncrossing(pi)) throw StructuralError("w_pi_subsets: partition of V must be noncrossing");
    CycleSubsets out;
    out.graph = quotient(cycle_graph(k), pi, Partition::singletons(k));
    const PairSet links = noncrossing_links(pi);
    std::vector<char> used(k + 1, 0);
    for (auto [a, b] : links) {
        VertexSet s;
        for (int w = a + 1; w <= b; ++w) {
            bool nested = false;
            for (auto [c, d] : links)
                if (a < c && d < b && c < w && w <= d) nested = true;
            if (!nested) s.push_back(w);
        }
        for (int w : s) used[w] = 1;
        out.subsets.push_back(s);
    }
    VertexSet rest;
    for (int w = 1; w <= k; ++w)
        if (!used[w]) rest.push_back(w);
    if (!rest.empty()) out.subsets.push_back(rest);
    detail::split_sizes(out);
    return out;
}

// Finest partition of W^mu for an arbitrary partition mu of W on the 2k-cycle: every
// pair (a, b) of c(mu) yields the merged vertex of its block together with the positions
// strictly between a and b that are not strictly inside a nested pair of c(mu); the
// positions not strictly inside any pair form the last subset. Positions are replaced by
// the merged vertex of their block (ids of the quotient graph).
inline CycleSubsets w_mu_finest(int k, const Partition& mu) {
    if (mu.ground_size() != k) throw StructuralError("w_mu_finest: partition size mismatch");
    CycleSubsets out;
    out.graph = quotient(cycle_graph(k), Partition::singletons(k), mu);
    const PairSet links = noncrossing_links(mu);
    auto strictly_inside_other = [&](int x, int a, int b) {
        for (auto [c, d] : links)
            if (!(c == a && d == b) && a <= c && d <= b && c < x && x < d) return true;
        return false;
    };
    auto id_of = [&](int pos) { return mu.block_of(pos) + 1; };
    for (auto [a, b] : links) {
        VertexSet s{id_of(a)};
        for (int x = a + 1; x < b; ++x)
            if (!strictly_inside_other(x, a, b)) s.push_back(id_of(x));
        out.subsets.push_back(sorted_set(s));
    }
    VertexSet rest;
    for (int x = 1; x <= k; ++x) {
        bool inside = false;
        for (auto [c, d] : links)
            if (c < x && x < d) inside = true;
        if (!inside) rest.push_back(id_of(x));
    }
    out.subsets.push_back(sorted_set(rest));
    detail::split_sizes(out);
    return out;
}

struct WClassResult {
    bool member = false;
    int failed_condition = 0;  // 1..7, or 0 when member
};

// Membership of a family {W_1..W_r} in the class W_r (conditions 1-7). Leftover W vertices
// are completed as one singleton piece each.
inline WClassResult in_w_class(const BipartiteMultigraph& g, const std::vector<VertexSet>& fam_in) {
    WClassResult res;
    auto fail = [&](int c) {
        res.member = false;
        res.failed_condition = c;
        return res;
    };
    if (fam_in.empty()) return fail(1);
    std::vector<VertexSet> fam;
    for (auto& s : fam_in) fam.push_back(sorted_set(s));
    const int r = static_cast<int>(fam.size());
    for (auto& s : fam)
        if (s.empty() || !is_connected(induced_subgraph(g, s))) return fail(1);
    std::set<int> covered;
    for (auto& s : fam) covered.insert(s.begin(), s.end());
    for (auto& [k, m] : g.edges())
        if (!covered.count(k.first) && m != 2) return fail(2);
    for (auto& s : fam)
        for (int w : s)
            if (g.deg_w(w) < 2) return fail(3);
    std::set<int> vcov;
    for (auto& s : fam)
        for (int v : neighbors_of_set(g, s)) vcov.insert(v);
    for (int v : vcov) {
        bool ok = false;
        for (auto& s : fam)
            if (deg_v_in(g, s, v) >= 2) ok = true;
        if (!ok) return fail(4);
    }
    const VertexSet shared = shared_w(fam);
    std::vector<int> I, Ic;
    for (int i = 0; i < r; ++i) {
        bool has = false;
        for (int w : shared)
            if (std::binary_search(fam[i].begin(), fam[i].end(), w)) has = true;
        (has ? I : Ic).push_back(i);
    }
    std::vector<VertexSet> famI;
    for (int i : I) famI.push_back(fam[i]);
    std::vector<VertexSet> merged;
    if (!famI.empty()) merged = merge_family(g, famI).merged_subsets;
    for (int i : Ic)
        for (int v : neighbors_of_set(g, fam[i]))
            if (deg_v_in(g, fam[i], v) != 2) return fail(5);
    for (auto& s : merged)
        for (int v : neighbors_of_set(g, s))
            if (deg_v_in(g, s, v) != 2) return fail(5);
    if (famI.size() >= 2 && detail::violates_shared_bound(famI)) return fail(6);
    std::vector<VertexSet> pieces = merged;
    for (int i : Ic) pieces.push_back(fam[i]);
    for (int w : g.w_vertices())
        if (!covered.count(w)) pieces.push_back({w});
    const int np = static_cast<int>(pieces.size());
    if (np > kBlockTreeSubsetCap) throw EnumerationLimitError("in_w_class: too many pieces");
    for (std::uint32_t mask = 0; mask < (1u << np); ++mask) {
        int k = __builtin_popcount(mask);
        if (k < 2) continue;
        std::vector<VertexSet> sel;
        for (int i = 0; i < np; ++i)
            if (mask & (1u << i)) sel.push_back(pieces[i]);
        if (static_cast<int>(shared_v(g, sel).size()) > k - 1) return fail(7);
    }
    res.member = true;
    return res;
}

// All collections of distinct nonempty W-subsets that belong to the class W_r. The search is
// over 2^(2^|W| - 1) collections, so |W| is capped.
inline std::vector<std::vector<VertexSet>> enumerate_w_class_families(const BipartiteMultigraph& g, int max_w = 4) {
    const auto& W = g.w_vertices();
    const int nw = static_cast<int>(W.size());
    if (nw > max_w)
        throw EnumerationLimitError("enumerate_w_class_families: |W| = " + std::to_string(nw) + " exceeds cap " +
                                    std::to_string(max_w));
    std::vector<VertexSet> subsets;
    for (std::uint32_t mask = 1; mask < (1u << nw); ++mask) {
        VertexSet s;
        for (int i = 0; i < nw; ++i)
            if (mask & (1u << i)) s.push_back(W[i]);
        subsets.push_back(s);
    }
    const int ns = static_cast<int>(subsets.size());
    std::vector<std::vector<VertexSet>> out;
    for (std::uint64_t sel = 1; sel < (std::uint64_t{1} << ns); ++sel) {
        std::vector<VertexSet> fam;
        for (int i = 0; i < ns; ++i)
            if (sel & (std::uint64_t{1} << i)) fam.push_back(subsets[i]);
        if (in_w_class(g, fam).member) out.push_back(std::move(fam));
    }
    return out;
}

}  // namespace ck

#endif

#ifndef CK_TESTS_FIGURE_GRAPHS_HPP
#define CK_TESTS_FIGURE_GRAPHS_HPP

#include <utility>
#include <vector>

#include "ck/bipartite_graph.hpp"

namespace ck_test {

using ck::BipartiteMultigraph;

// Graph of the first figure: an 8-cycle on w1..w4 and, glued at v1, a 12-cycle on w5..w10
// sharing w5 with a 6-cycle on w5, w11, w12. The 6-cycle's V labels are v11, v12, v13.
inline BipartiteMultigraph figure_one_graph() {
    BipartiteMultigraph g;
    for (int w = 1; w <= 12; ++w) g.add_w(w);
    for (int v : {1, 2, 3, 4, 5, 6, 7, 9, 10, 11, 12, 13}) g.add_v(v);
    auto cyc = [&](const std::vector<std::pair<char, int>>& seq) {
        for (std::size_t i = 0; i < seq.size(); ++i) {
            auto a = seq[i], b = seq[(i + 1) % seq.size()];
            if (a.first == 'w') g.add_edge(a.second, b.second);
            else g.add_edge(b.second, a.second);
        }
    };
    cyc({{'v', 1}, {'w', 1}, {'v', 4}, {'w', 4}, {'v', 3}, {'w', 3}, {'v', 2}, {'w', 2}});
    cyc({{'w', 5}, {'v', 10}, {'w', 10}, {'v', 9}, {'w', 9}, {'v', 1}, {'w', 8}, {'v', 7}, {'w', 7}, {'v', 6},
         {'w', 6}, {'v', 5}});
    cyc({{'w', 11}, {'v', 13}, {'w', 5}, {'v', 12}, {'w', 12}, {'v', 11}});
    return g;
}

// Graph of the second figure: an 8-cycle v2 w2 v1 w5 v4 w4 v3 w3, a 4-cycle w3 v5 w6 v6,
// a double edge w1 - v1, and w7 joined to v5, v7, v8 by double edges.
inline BipartiteMultigraph figure_two_graph() {
    BipartiteMultigraph g;
    for (int w = 1; w <= 7; ++w) g.add_w(w);
    for (int v = 1; v <= 8; ++v) g.add_v(v);
    for (auto [w, v] : std::vector<std::pair<int, int>>{{2, 2}, {2, 1}, {5, 1}, {5, 4}, {4, 4}, {4, 3}, {3, 3}, {3, 2}})
        g.add_edge(w, v);
    for (auto [w, v] : std::vector<std::pair<int, int>>{{3, 5}, {6, 5}, {6, 6}, {3, 6}}) g.add_edge(w, v);
    g.add_edge(1, 1, 2);
    for (int v : {5, 7, 8}) g.add_edge(7, v, 2);
    return g;
}

}  // namespace ck_test

#endif

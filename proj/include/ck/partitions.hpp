#ifndef CK_PARTITIONS_HPP
#define CK_PARTITIONS_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ck/errors.hpp"

namespace ck {

// A partition of the cyclically ordered set {1, ..., k}. Elements are 1-based.
// Blocks are kept sorted internally and ordered by their minimum element.
class Partition {
public:
    Partition() = default;

    Partition(int k, std::vector<std::vector<int>> blocks) : k_(k), blocks_(std::move(blocks)) {
        normalize();
    }

    // Builds a partition from a restricted-growth string (0-based labels).
    static Partition from_rgs(const std::vector<int>& rgs) {
        int nblocks = 0;
        for (int label : rgs) nblocks = std::max(nblocks, label + 1);
        std::vector<std::vector<int>> blocks(nblocks);
        for (std::size_t i = 0; i < rgs.size(); ++i) blocks[rgs[i]].push_back(static_cast<int>(i) + 1);
        return Partition(static_cast<int>(rgs.size()), std::move(blocks));
    }

    static Partition one_block(int k) {
        std::vector<int> all(k);
        for (int i = 0; i < k; ++i) all[i] = i + 1;
        return Partition(k, {all});
    }

    static Partition singletons(int k) {
        std::vector<std::vector<int>> blocks;
        for (int i = 1; i <= k; ++i) blocks.push_back({i});
        return Partition(k, std::move(blocks));
    }

    int ground_size() const { return k_; }
    int size() const { return static_cast<int>(blocks_.size()); }
    const std::vector<std::vector<int>>& blocks() const { return blocks_; }

    // Index of the block that contains element x (1-based element).
    int block_of(int x) const { return block_of_[x]; }
    bool same_block(int x, int y) const { return block_of_[x] == block_of_[y]; }

    bool is_one_block() const { return blocks_.size() == 1; }
    bool is_singletons() const { return static_cast<int>(blocks_.size()) == k_; }

    // Restricted-growth string, the canonical key used for ordering.
    std::vector<int> rgs() const {
        std::vector<int> out(k_);
        for (int x = 1; x <= k_; ++x) out[x - 1] = block_of_[x];
        return out;
    }

    std::string to_string() const {
        std::string s = "{";
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            if (b) s += ",";
            s += "{";
            for (std::size_t i = 0; i < blocks_[b].size(); ++i) {
                if (i) s += ",";
                s += std::to_string(blocks_[b][i]);
            }
            s += "}";
        }
        return s + "}";
    }

    bool operator==(const Partition& o) const { return k_ == o.k_ && blocks_ == o.blocks_; }
    bool operator<(const Partition& o) const { return rgs() < o.rgs(); }

private:
    void normalize() {
        if (k_ < 0) throw StructuralError("partition ground size must be nonnegative");
        for (auto& b : blocks_) {
            if (b.empty()) throw StructuralError("partition blocks must be nonempty");
            std::sort(b.begin(), b.end());
        }
        std::sort(blocks_.begin(), blocks_.end(),
                  [](const std::vector<int>& a, const std::vector<int>& b) { return a.front() < b.front(); });
        block_of_.assign(k_ + 1, -1);
        int covered = 0;
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            for (int x : blocks_[b]) {
                if (x < 1 || x > k_) throw StructuralError("partition element out of range: " + std::to_string(x));
                if (block_of_[x] != -1) throw StructuralError("partition blocks overlap at " + std::to_string(x));
                block_of_[x] = static_cast<int>(b);
                ++covered;
            }
        }
        if (covered != k_) throw StructuralError("partition blocks do not cover 1..k");
    }

    int k_ = 0;
    std::vector<std::vector<int>> blocks_;
    std::vector<int> block_of_;
};

// Ordered pairs of ground indices, e.g. b(pi) or c(pi).
using PairSet = std::vector<std::pair<int, int>>;

inline constexpr int kDefaultPartitionCap = 10;

inline void check_partition_cap(int k, int cap) {
    if (k < 1) throw StructuralError("partition enumeration needs k >= 1");
    if (k > cap)
        throw EnumerationLimitError("partition enumeration for k=" + std::to_string(k) +
                                    " exceeds cap " + std::to_string(cap));
}

// All set partitions of {1..k}, in lexicographic order of restricted-growth strings.
inline std::vector<Partition> enumerate_set_partitions(int k, int cap = kDefaultPartitionCap) {
    check_partition_cap(k, cap);
    std::vector<Partition> out;
    std::vector<int> a(k, 0), maxprefix(k, 0);
    // a[i] <= 1 + max(a[0..i-1]); iterate like an odometer.
    while (true) {
        out.push_back(Partition::from_rgs(a));
        int i = k - 1;
        while (i > 0 && a[i] == maxprefix[i] + 1) --i;
        if (i == 0) break;
        ++a[i];
        for (int j = i + 1; j < k; ++j) {
            a[j] = 0;
            maxprefix[j] = std::max(maxprefix[j - 1], a[j - 1]);
        }
    }
    return out;
}

// True iff there are no i1 < j1 < i2 < j2 with i1 ~ i2, j1 ~ j2 in different blocks.
inline bool is_noncrossing(const Partition& p) {
    const int k = p.ground_size();
    // For every pair of blocks, their interleaving pattern must not contain abab.
    for (std::size_t a = 0; a < p.blocks().size(); ++a) {
        for (std::size_t b = a + 1; b < p.blocks().size(); ++b) {
            // Walk 1..k recording the sequence of labels a/b with repeats collapsed.
            std::vector<int> seq;
            for (int x = 1; x <= k; ++x) {
                int blk = p.block_of(x);
                int lab = blk == static_cast<int>(a) ? 0 : (blk == static_cast<int>(b) ? 1 : -1);
                if (lab < 0) continue;
                if (seq.empty() || seq.back() != lab) seq.push_back(lab);
            }
            // Collapsed sequences of length >= 4 contain a crossing (xyxy).
            if (seq.size() >= 4) return false;
        }
    }
    return true;
}

inline std::vector<Partition> enumerate_noncrossing(int k, int cap = kDefaultPartitionCap) {
    std::vector<Partition> out;
    for (auto& p : enumerate_set_partitions(k, cap))
        if (is_noncrossing(p)) out.push_back(std::move(p));
    return out;
}

// b(pi): cyclic nearest-neighbour pairs (i, i+1) lying in a common block, including
// the wrap pair (k, 1). For the one-block partition this has exactly k pairs
// (for k = 2 both (1,2) and (2,1); for k = 1 the pair (1,1)).
// WrapRule::omit drops the wrap pair; it exists only for the selftest mutation harness.
enum class WrapRule { include, omit };

inline PairSet nearest_neighbor_pairs(const Partition& p, WrapRule wrap = WrapRule::include) {
    const int k = p.ground_size();
    PairSet out;
    for (int i = 1; i < k; ++i)
        if (p.same_block(i, i + 1)) out.emplace_back(i, i + 1);
    if (wrap == WrapRule::include && k >= 1 && p.same_block(k, 1)) out.emplace_back(k, 1);
    return out;
}

// True iff (i, l) (same block, i < l) is crossed by a pair (p, q) from another block.
inline bool pair_crossed_by_other_block(const Partition& p, int i, int l) {
    const int own = p.block_of(i);
    bool inside = false, outside = false;
    // (i,l) is crossed by some other block B iff B has an element strictly inside
    // (i,l) and an element strictly outside [i,l].
    for (std::size_t b = 0; b < p.blocks().size(); ++b) {
        if (static_cast<int>(b) == own) continue;
        inside = outside = false;
        for (int x : p.blocks()[b]) {
            if (x > i && x < l) inside = true;
            if (x < i || x > l) outside = true;
        }
        if (inside && outside) return true;
    }
    return false;
}

// c(pi): for each i, the pair (x_i, x_j) where x_j is the smallest later element of
// the same block such that (x_i, x_j) is not crossed by a pair from another block.
inline PairSet noncrossing_links(const Partition& p) {
    const int k = p.ground_size();
    PairSet out;
    for (int i = 1; i < k; ++i) {
        for (int l = i + 1; l <= k; ++l) {
            if (!p.same_block(i, l)) continue;
            if (!pair_crossed_by_other_block(p, i, l)) {
                out.emplace_back(i, l);
                break;
            }
        }
    }
    return out;
}

struct PartitionStats {
    int S = 0;
    int R = 0;
};

// S = |b(p)| and R = |c(p)| + 1 - S. The same rule applies to partitions of V and of W.
inline PartitionStats partition_stats(const Partition& p, WrapRule wrap = WrapRule::include) {
    PartitionStats st;
    st.S = static_cast<int>(nearest_neighbor_pairs(p, wrap).size());
    st.R = static_cast<int>(noncrossing_links(p).size()) + 1 - st.S;
    return st;
}

inline std::uint64_t bell_number(int n) {
    // Bell triangle.
    std::vector<std::uint64_t> row{1};
    for (int i = 1; i <= n; ++i) {
        std::vector<std::uint64_t> next{row.back()};
        for (auto v : row) next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

inline std::uint64_t catalan_number(int n) {
    std::uint64_t c = 1;
    for (int i = 0; i < n; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
    return c;
}

}  // namespace ck

#endif

#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace formeq {

// Ordered index subsets of {0..n-1}, enumerated in lexicographic order.
// Degree-(k,k) coefficient tensors are indexed by pairs of these subsets.
using IndexSet = std::vector<int>;

inline long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

inline std::vector<IndexSet> enumerate_subsets(int n, int k) {
    std::vector<IndexSet> out;
    if (k < 0 || k > n) return out;
    IndexSet cur(k);
    for (int i = 0; i < k; ++i) cur[i] = i;
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[i] == n - k + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

// Lexicographic rank of a strictly increasing subset.
inline int subset_rank(const IndexSet& s, int n) {
    int k = static_cast<int>(s.size());
    long rank = 0;
    int prev = -1;
    for (int i = 0; i < k; ++i) {
        for (int v = prev + 1; v < s[i]; ++v) rank += binomial(n - 1 - v, k - 1 - i);
        prev = s[i];
    }
    return static_cast<int>(rank);
}

inline IndexSet subset_complement(const IndexSet& s, int n) {
    IndexSet out;
    out.reserve(n - s.size());
    size_t p = 0;
    for (int v = 0; v < n; ++v) {
        if (p < s.size() && s[p] == v) { ++p; continue; }
        out.push_back(v);
    }
    return out;
}

// Sign of the permutation sorting the concatenation (a, b); 0 if a and b overlap.
// Both a and b are strictly increasing.
inline int merge_sign(const IndexSet& a, const IndexSet& b, IndexSet& merged) {
    merged.clear();
    merged.reserve(a.size() + b.size());
    size_t i = 0, j = 0;
    long inversions = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return 0;
        if (a[i] < b[j]) {
            merged.push_back(a[i++]);
        } else {
            // b[j] jumps over the remaining elements of a
            inversions += static_cast<long>(a.size() - i);
            merged.push_back(b[j++]);
        }
    }
    while (i < a.size()) merged.push_back(a[i++]);
    while (j < b.size()) merged.push_back(b[j++]);
    return (inversions % 2 == 0) ? 1 : -1;
}

// Parity sign of the concatenated list (s, complement of s).
inline int concat_complement_sign(const IndexSet& s, int n) {
    IndexSet c = subset_complement(s, n), merged;
    return merge_sign(s, c, merged);
}

} // namespace formeq

#pragma once

// Brute-force enumeration oracles for rooted trees and lumber.

#include "ampsdp/forest.hpp"

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

namespace support {

// Parent array from the branch structure, root first.
inline void parents_of(const ampsdp::tree& t, int self, std::vector<int>& out)
{
    for (const auto& b : t.branches()) {
        const int child = static_cast<int>(out.size());
        out.push_back(self);
        parents_of(b, child, out);
    }
}

inline std::vector<int> parents_of(const ampsdp::tree& t)
{
    std::vector<int> out{-1};
    parents_of(t, 0, out);
    return out;
}

// Rooted isomorphism by trying every vertex bijection that fixes the root.
inline bool brute_isomorphic(const std::vector<int>& a, const std::vector<int>& b)
{
    if (a.size() != b.size())
        return false;
    std::vector<int> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        if (perm[0] != 0)
            continue;
        bool ok = true;
        for (std::size_t v = 1; v < a.size() && ok; ++v)
            ok = perm[static_cast<std::size_t>(a[v])] == b[static_cast<std::size_t>(perm[v])];
        if (ok)
            return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

// Bracket expressions E | R(x) | G(a, b) as parent arrays, without any canonical form.
inline std::vector<std::vector<int>> bracket_trees(int degree)
{
    if (degree == 0)
        return {{-1}};
    std::vector<std::vector<int>> out;
    for (const auto& c : bracket_trees(degree - 1)) {
        std::vector<int> p{-1};
        for (int q : c)
            p.push_back(q + 1);
        p[1] = 0;
        out.push_back(p);
    }
    for (int left = 1; left < degree; ++left)
        for (const auto& a : bracket_trees(left))
            for (const auto& b : bracket_trees(degree - left)) {
                std::vector<int> p = a;
                const int shift = static_cast<int>(a.size()) - 1;
                for (std::size_t v = 1; v < b.size(); ++v)
                    p.push_back(b[v] == 0 ? 0 : b[v] + shift);
                out.push_back(p);
            }
    return out;
}

// Isomorphism classes of bracket expressions of one degree, deduplicated by brute force.
inline std::vector<std::vector<int>> brute_classes(int degree)
{
    std::vector<std::vector<int>> reps;
    for (const auto& p : bracket_trees(degree)) {
        bool seen = false;
        for (const auto& q : reps)
            seen = seen || brute_isomorphic(p, q);
        if (!seen)
            reps.push_back(p);
    }
    return reps;
}

// Count multisets of non-empty trunk classes with total degree exactly d, using classes whose
// (degree, index) is at least `from`.
inline long count_trunk_multisets(int d, const std::vector<std::pair<int, int>>& kinds, std::size_t from)
{
    if (d == 0)
        return 1;
    long total = 0;
    for (std::size_t k = from; k < kinds.size(); ++k)
        if (kinds[k].first <= d)
            total += count_trunk_multisets(d - kinds[k].first, kinds, k);
    return total;
}

inline long brute_lumber_count(int d)
{
    std::vector<std::pair<int, int>> kinds;
    std::vector<long> trees_by_degree;
    for (int k = 0; k <= d; ++k) {
        const auto reps = brute_classes(k);
        trees_by_degree.push_back(static_cast<long>(reps.size()));
        for (std::size_t i = 0; k > 0 && i < reps.size(); ++i)
            kinds.emplace_back(k, static_cast<int>(i));
    }
    long total = 0;
    for (int base = 0; base <= d; ++base)
        for (int rest = 0; base + rest <= d; ++rest)
            total += trees_by_degree[static_cast<std::size_t>(base)] * count_trunk_multisets(rest, kinds, 0);
    return total;
}

}  // namespace support

#include "ampsdp/forest.hpp"

#include "ampsdp/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace ampsdp {

namespace {

void guard(int d)
{
    if (d < 0)
        throw input_error("degree must be non-negative");
    if (d > enumeration_degree_guard)
        throw resource_error("enumeration degree " + std::to_string(d) + " exceeds the guard "
                             + std::to_string(enumeration_degree_guard));
}

// by_degree[m] lists the trees with m edges, each list in canonical order.
std::vector<std::vector<tree>> trees_up_to(int d)
{
    std::vector<std::vector<tree>> by_degree(d + 1);
    by_degree[0].push_back(tree());
    // A branch of weight w is an edge plus a subtree with w - 1 edges.
    std::vector<tree> branches;       // all subtrees with < d edges, in order
    std::vector<int> weight;
    for (int m = 1; m <= d; ++m) {
        for (const auto& t : by_degree[m - 1]) {
            branches.push_back(t);
            weight.push_back(m);
        }
        std::vector<tree> current;
        std::vector<tree> chosen;
        // Multisets of branches with non-decreasing index and total weight m.
        std::function<void(std::size_t, int)> rec = [&](std::size_t from, int left) {
            if (left == 0) {
                current.push_back(tree::from_branches(chosen));
                return;
            }
            for (std::size_t b = from; b < branches.size(); ++b) {
                if (weight[b] > left)
                    continue;
                chosen.push_back(branches[b]);
                rec(b, left - weight[b]);
                chosen.pop_back();
            }
        };
        rec(0, m);
        std::sort(current.begin(), current.end());
        current.erase(std::unique(current.begin(), current.end()), current.end());
        by_degree[m] = std::move(current);
    }
    return by_degree;
}

}  // namespace

std::vector<tree> enumerate_trees(int degree)
{
    guard(degree);
    return trees_up_to(degree)[degree];
}

std::vector<lumber> enumerate_lumber(int d)
{
    guard(d);
    const auto by_degree = trees_up_to(d);
    std::vector<tree> nonempty;
    for (int m = 1; m <= d; ++m)
        nonempty.insert(nonempty.end(), by_degree[m].begin(), by_degree[m].end());

    std::vector<lumber> out;
    std::vector<tree> trunks;
    for (int b = 0; b <= d; ++b)
        for (const auto& base : by_degree[b]) {
            std::function<void(std::size_t, int)> rec = [&](std::size_t from, int left) {
                out.emplace_back(base, trunks);
                for (std::size_t k = from; k < nonempty.size(); ++k) {
                    if (nonempty[k].degree() > left)
                        continue;
                    trunks.push_back(nonempty[k]);
                    rec(k, left - nonempty[k].degree());
                    trunks.pop_back();
                }
            };
            rec(0, d - b);
        }
    std::sort(out.begin(), out.end(), [](const lumber& a, const lumber& b) {
        if (a.degree() != b.degree())
            return a.degree() < b.degree();
        return a.key() < b.key();
    });
    return out;
}

double lumber_count_bound(int d)
{
    return std::pow(2.0 * d + 2.0, static_cast<double>(d) * (d + 1));
}

}  // namespace ampsdp

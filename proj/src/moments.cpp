#include "ampsdp/forest.hpp"

#include "ampsdp/error.hpp"

#include <cmath>
#include <functional>
#include <map>

namespace ampsdp {

namespace {

struct labeled_graph {
    int vertices = 0;
    std::vector<std::pair<int, int>> edges;
    int free_components = 0;  // trunks, each carrying a 1/n normalization

    // Appends t with its root at `root` (or at a fresh vertex when root < 0).
    void attach(const tree& t, int root)
    {
        const auto parent = parent_array(t);
        std::vector<int> id(parent.size());
        for (std::size_t v = 0; v < parent.size(); ++v)
            id[v] = (v == 0 && root >= 0) ? root : vertices++;
        for (std::size_t v = 1; v < parent.size(); ++v)
            edges.emplace_back(id[parent[v]], id[v]);
        if (root < 0)
            ++free_components;
    }
};

double entry_moment(int m, const ensemble_spec& spec)
{
    if (m % 2)
        return 0.0;
    const double n = spec.n;
    double dfact = 1.0;
    if (spec.fam == family::gaussian)
        for (int k = m - 1; k > 1; k -= 2)
            dfact *= k;
    return dfact * std::pow(n, -0.5 * m);
}

inline constexpr int vertex_guard = 11;

double labeling_sum(const labeled_graph& g, const ensemble_spec& spec)
{
    spec.validate();
    if (g.vertices > vertex_guard)
        throw resource_error("labeling sum over " + std::to_string(g.vertices) + " vertices exceeds the guard");
    const int V = g.vertices;
    std::vector<int> block(V, 0);
    double total = 0.0;
    std::map<std::pair<int, int>, int> mult;
    std::function<void(int, int)> rec = [&](int v, int blocks) {
        if (v == V) {
            mult.clear();
            for (auto [a, b] : g.edges) {
                int x = block[a], y = block[b];
                if (x > y)
                    std::swap(x, y);
                ++mult[{x, y}];
            }
            double w = 1.0;
            for (const auto& [e, m] : mult) {
                if (m % 2)
                    return;
                w *= entry_moment(m, spec);
            }
            // Block 0 carries the pinned label; the others take distinct labels from n - 1.
            for (int b = 1; b < blocks; ++b)
                w *= static_cast<double>(spec.n - b);
            total += w;
            return;
        }
        for (int b = 0; b <= blocks && b < spec.n; ++b) {
            block[v] = b;
            rec(v + 1, std::max(blocks, b + 1));
        }
    };
    block[0] = 0;
    rec(1, 1);
    return total * std::pow(static_cast<double>(spec.n), -g.free_components);
}

}  // namespace

double tree_coordinate_expectation(const tree& t, const ensemble_spec& spec, int i)
{
    if (i < 0 || i >= spec.n)
        throw std::out_of_range("coordinate outside 0..n-1");
    if (t.degree() > expectation_degree_guard)
        throw resource_error("tree degree exceeds the labeling-sum guard");
    labeled_graph g;
    g.vertices = 1;
    g.attach(t, 0);
    return labeling_sum(g, spec);
}

double lumber_coordinate_expectation(const lumber& l, const ensemble_spec& spec)
{
    labeled_graph g;
    g.vertices = 1;
    g.attach(l.base, 0);
    for (const auto& t : l.trunks)
        g.attach(t, -1);
    return labeling_sum(g, spec);
}

double lumber_pair_expectation(const lumber& a, const lumber& b, const ensemble_spec& spec)
{
    return lumber_coordinate_expectation(hadamard(a, b), spec);
}

}  // namespace ampsdp

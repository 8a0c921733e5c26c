#include "ampsdp/forest.hpp"

#include "ampsdp/error.hpp"

#include <algorithm>
#include <functional>

namespace ampsdp {

tree::tree()
{
    static const std::shared_ptr<const node> empty_node = [] {
        auto n = std::make_shared<node>();
        n->encoding = "()";
        return std::shared_ptr<const node>(n);
    }();
    node_ = empty_node;
}

bool tree::operator<(const tree& o) const
{
    if (degree() != o.degree())
        return degree() < o.degree();
    return encoding() < o.encoding();
}

tree tree::from_branches(std::vector<tree> branches)
{
    if (branches.empty())
        return tree();
    std::sort(branches.begin(), branches.end(),
              [](const tree& a, const tree& b) { return a.encoding() < b.encoding(); });
    auto n = std::make_shared<node>();
    n->encoding = "(";
    for (const auto& b : branches) {
        n->degree += 1 + b.degree();
        n->encoding += b.encoding();
    }
    n->encoding += ")";
    n->branches = std::move(branches);
    tree t;
    t.node_ = std::move(n);
    return t;
}

tree tree::reroot(const tree& child)
{
    return from_branches({child});
}

tree tree::graft(const tree& a, const tree& b)
{
    if (a.is_empty() || b.is_empty())
        throw domain_error("graft requires two non-empty trees");
    std::vector<tree> all = a.branches();
    all.insert(all.end(), b.branches().begin(), b.branches().end());
    return from_branches(std::move(all));
}

std::string canonicalize(const tree& t)
{
    return t.encoding();
}

std::vector<int> parent_array(const tree& t)
{
    std::vector<int> parent{-1};
    std::function<void(const tree&, int)> walk = [&](const tree& node, int self) {
        for (const auto& b : node.branches()) {
            const int child = static_cast<int>(parent.size());
            parent.push_back(self);
            walk(b, child);
        }
    };
    walk(t, 0);
    return parent;
}

lumber::lumber(tree b, std::vector<tree> ts) : base(std::move(b)), trunks(std::move(ts))
{
    for (const auto& tr : trunks)
        if (tr.is_empty())
            throw domain_error("the tree should be nonempty");
    std::sort(trunks.begin(), trunks.end());
}

int lumber::degree() const
{
    int d = base.degree();
    for (const auto& t : trunks)
        d += t.degree();
    return d;
}

std::string lumber::key() const
{
    std::string k = base.encoding() + "|";
    for (const auto& t : trunks)
        k += t.encoding() + ",";
    return k;
}

bool lumber::operator<(const lumber& o) const
{
    if (!(base == o.base))
        return base < o.base;
    return std::lexicographical_compare(trunks.begin(), trunks.end(), o.trunks.begin(), o.trunks.end());
}

lumber hadamard(const lumber& a, const lumber& b)
{
    tree base;
    if (a.base.is_empty())
        base = b.base;
    else if (b.base.is_empty())
        base = a.base;
    else
        base = tree::graft(a.base, b.base);
    std::vector<tree> trunks = a.trunks;
    trunks.insert(trunks.end(), b.trunks.begin(), b.trunks.end());
    return lumber(base, std::move(trunks));
}

lumber reroot(const lumber& l)
{
    return lumber(tree::reroot(l.base), l.trunks);
}

lumber to_trunk(const lumber& l)
{
    std::vector<tree> trunks = l.trunks;
    if (!l.base.is_empty())
        trunks.push_back(l.base);
    return lumber(tree(), std::move(trunks));
}

std::string describe(const tree& t)
{
    if (t.is_empty())
        return "E";
    if (t.branches().size() == 1)
        return "R(" + describe(t.branches()[0]) + ")";
    std::string s = "G(";
    for (std::size_t i = 0; i < t.branches().size(); ++i)
        s += (i ? "," : "") + std::string("R(") + describe(t.branches()[i]) + ")";
    return s + ")";
}

std::string describe(const lumber& l)
{
    std::string s = describe(l.base);
    for (const auto& t : l.trunks)
        s += "*k[" + describe(t) + "]";
    return s;
}

}  // namespace ampsdp

#include "symbolic.hpp"

#include <algorithm>

namespace ampsdp::detail {

int form_table::add(sparse_form f)
{
    std::sort(f.begin(), f.end());
    sparse_form merged;
    for (const auto& [k, c] : f) {
        if (!merged.empty() && merged.back().first == k)
            merged.back().second += c;
        else
            merged.emplace_back(k, c);
    }
    forms_.push_back(std::move(merged));
    return static_cast<int>(forms_.size()) - 1;
}

int form_table::unit(int k)
{
    const auto it = units_.find(k);
    if (it != units_.end())
        return it->second;
    const int id = add({{k, 1.0}});
    units_.emplace(k, id);
    return id;
}

int poly2::form(form_table& ft) const
{
    if (lin_form < 0)
        lin_form = ft.add(sparse_form(lin.begin(), lin.end()));
    return lin_form;
}

void accumulate(poly2& into, const poly2& a, double s)
{
    into.c += s * a.c;
    for (const auto& [k, c] : a.lin)
        into.lin[k] += s * c;
    for (const auto& q : a.quad)
        into.quad.push_back({s * q.coef, q.u, q.w});
    into.lin_form = -1;
}

std::optional<poly2> multiply(const poly2& a, const poly2& b, form_table& ft)
{
    if (a.degree() + b.degree() > 2)
        return std::nullopt;
    poly2 r;
    r.c = a.c * b.c;
    if (b.c != 0.0)
        for (const auto& [k, c] : a.lin)
            r.lin[k] += b.c * c;
    if (a.c != 0.0)
        for (const auto& [k, c] : b.lin)
            r.lin[k] += a.c * c;
    for (const auto& q : a.quad)
        if (b.c != 0.0)
            r.quad.push_back({b.c * q.coef, q.u, q.w});
    for (const auto& q : b.quad)
        if (a.c != 0.0)
            r.quad.push_back({a.c * q.coef, q.u, q.w});
    if (!a.lin.empty() && !b.lin.empty())
        r.quad.push_back({1.0, a.form(ft), b.form(ft)});
    return r;
}

const std::vector<poly2>* xhat_algebra::tree_coords(const tree& t)
{
    const auto it = trees_.find(t.encoding());
    if (it != trees_.end())
        return it->second ? &*it->second : nullptr;

    const int n = basis_.n();
    std::optional<std::vector<poly2>> out;
    if (t.degree() <= 2) {
        std::vector<poly2> vals(static_cast<std::size_t>(n));
        for (auto& p : vals)
            p.c = 1.0;
        bool ok = true;
        for (const auto& b : t.branches()) {
            const auto* sub = tree_coords(b);
            if (!sub) {
                ok = false;
                break;
            }
            std::vector<poly2> rb(static_cast<std::size_t>(n));
            for (int i = 0; i < n && ok; ++i) {
                for (int j = 0; j < n; ++j) {
                    const poly2& bj = (*sub)[j];
                    if (!bj.quad.empty()) {
                        ok = false;
                        break;
                    }
                    const int x = basis_.xhat(i, j);
                    if (bj.c != 0.0)
                        rb[i].lin[x] += bj.c;
                    if (!bj.lin.empty())
                        rb[i].quad.push_back({1.0, ft_.unit(x), bj.form(ft_)});
                }
            }
            for (int i = 0; i < n && ok; ++i) {
                auto prod = multiply(vals[i], rb[i], ft_);
                if (!prod) {
                    ok = false;
                    break;
                }
                vals[i] = std::move(*prod);
            }
            if (!ok)
                break;
        }
        if (ok)
            out = std::move(vals);
    }
    const auto [pos, inserted] = trees_.emplace(t.encoding(), std::move(out));
    return pos->second ? &*pos->second : nullptr;
}

std::optional<poly2> xhat_algebra::trunk(const tree& t)
{
    const auto* vals = tree_coords(t);
    if (!vals)
        return std::nullopt;
    poly2 s;
    const double inv = 1.0 / basis_.n();
    for (const auto& p : *vals)
        accumulate(s, p, inv);
    return s;
}

std::optional<poly2> xhat_algebra::trunk_product(const lumber& l)
{
    poly2 s;
    s.c = 1.0;
    for (const auto& t : l.trunks) {
        auto tr = trunk(t);
        if (!tr)
            return std::nullopt;
        auto prod = multiply(s, *tr, ft_);
        if (!prod)
            return std::nullopt;
        s = std::move(*prod);
    }
    return s;
}

std::optional<std::vector<poly2>> xhat_algebra::lumber_coords(const lumber& l)
{
    const auto* base = tree_coords(l.base);
    const auto s = trunk_product(l);
    if (!base || !s)
        return std::nullopt;
    std::vector<poly2> out;
    out.reserve(base->size());
    for (const auto& p : *base) {
        auto prod = multiply(p, *s, ft_);
        if (!prod)
            return std::nullopt;
        out.push_back(std::move(*prod));
    }
    return out;
}

std::optional<poly2> xhat_algebra::pair(const lumber& a, const lumber& b)
{
    if (a.degree() + b.degree() > 2)
        return std::nullopt;
    const double inv = 1.0 / basis_.n();
    // Empty bases make the lumber a scalar, so the inner product collapses.
    if (a.base.is_empty() && b.base.is_empty()) {
        const auto sa = trunk_product(a);
        const auto sb = trunk_product(b);
        if (!sa || !sb)
            return std::nullopt;
        return multiply(*sa, *sb, ft_);
    }
    if (a.base.is_empty() || b.base.is_empty()) {
        const lumber& scalar = a.base.is_empty() ? a : b;
        const lumber& other = a.base.is_empty() ? b : a;
        const auto s = trunk_product(scalar);
        const auto vals = lumber_coords(other);
        if (!s || !vals)
            return std::nullopt;
        poly2 mean;
        for (const auto& p : *vals)
            accumulate(mean, p, inv);
        return multiply(*s, mean, ft_);
    }
    const auto va = lumber_coords(a);
    const auto vb = lumber_coords(b);
    if (!va || !vb)
        return std::nullopt;
    poly2 s;
    for (std::size_t i = 0; i < va->size(); ++i) {
        auto prod = multiply((*va)[i], (*vb)[i], ft_);
        if (!prod)
            return std::nullopt;
        accumulate(s, *prod, inv);
    }
    return s;
}

}  // namespace ampsdp::detail

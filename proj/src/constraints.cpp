#include "ampsdp/sdp.hpp"

#include "ampsdp/error.hpp"
#include "symbolic.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <map>

namespace ampsdp {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

}  // namespace

std::string to_string(lsh_mode m)
{
    return m == lsh_mode::robust ? "robust" : "nonrobust";
}

lsh_mode parse_lsh_mode(const std::string& s)
{
    if (s == "robust")
        return lsh_mode::robust;
    if (s == "nonrobust" || s == "non-robust")
        return lsh_mode::nonrobust;
    throw config_error("unknown lsh mode '" + s + "'");
}

std::string to_string(constraint_tag t)
{
    switch (t) {
    case constraint_tag::robust:
        return "robust";
    case constraint_tag::lsh:
        return "lsh";
    case constraint_tag::norm:
        return "norm";
    case constraint_tag::plumbing:
        return "plumbing";
    }
    return "plumbing";
}

monomial_basis::monomial_basis(int n, bool robust) : n_(n), robust_(robust)
{
    if (n < 1)
        throw input_error("basis needs n >= 1");
    names_.push_back("1");
    for (int i = 0; i < n; ++i)
        names_.push_back("v" + std::to_string(i));
    if (robust) {
        for (int i = 0; i < n; ++i)
            names_.push_back("W" + std::to_string(i));
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                names_.push_back("Xh" + std::to_string(i) + "_" + std::to_string(j));
    }
    for (std::size_t k = 0; k < names_.size(); ++k)
        index_.emplace(names_[k], static_cast<int>(k));
}

int monomial_basis::w(int i) const
{
    if (!robust_)
        throw input_error("W block is absent from a non-robust basis");
    return 1 + n_ + i;
}

int monomial_basis::xhat(int i, int j) const
{
    if (!robust_)
        throw input_error("Xh block is absent from a non-robust basis");
    if (i > j)
        std::swap(i, j);
    return 1 + 2 * n_ + i * n_ - i * (i - 1) / 2 + (j - i);
}

int monomial_basis::position(const std::string& name) const
{
    const auto it = index_.find(name);
    if (it == index_.end())
        throw input_error("monomial '" + name + "' is not in the basis");
    return it->second;
}

double window_violation(double value, double lo, double hi)
{
    if (!std::isfinite(value))
        return inf;
    return std::max({0.0, lo - value, value - hi});
}

double constraint_system::evaluate(const moment_constraint& c, const Eigen::MatrixXd& m) const
{
    double total = 0.0;
    for (const auto& t : c.terms) {
        const auto& u = forms[t.u];
        const auto& w = forms[t.w];
        double s = 0.0;
        for (const auto& [a, ca] : u) {
            double r = 0.0;
            for (const auto& [b, cb] : w)
                r += cb * m(a, b);
            s += ca * r;
        }
        total += t.coef * s;
    }
    return total;
}

double constraint_system::evaluate_rank_one(const moment_constraint& c, const Eigen::VectorXd& m) const
{
    auto dot = [&m](const sparse_form& f) {
        double s = 0.0;
        for (const auto& [k, v] : f)
            s += v * m[k];
        return s;
    };
    double total = 0.0;
    for (const auto& t : c.terms)
        total += t.coef * dot(forms[t.u]) * dot(forms[t.w]);
    return total;
}

bool constraint_system::constants_ok() const
{
    for (const auto& c : constants)
        if (!c.ok)
            return false;
    return true;
}

namespace {

using detail::form_table;
using detail::poly2;

moment_constraint from_poly(std::string label, constraint_tag tag, const poly2& p, double lo, double hi,
                            double slack, form_table& ft, int one)
{
    moment_constraint c;
    c.label = std::move(label);
    c.tag = tag;
    c.lo = lo;
    c.hi = hi;
    c.slack = slack;
    c.terms = p.quad;
    if (!p.lin.empty())
        c.terms.push_back({1.0, one, p.form(ft)});
    if (p.c != 0.0)
        c.terms.push_back({p.c, one, one});
    return c;
}

void add_constant(constraint_system& sys, std::string label, double value, double lo, double hi)
{
    sys.constants.push_back({std::move(label), value, lo, hi, window_violation(value, lo, hi) == 0.0});
}

}  // namespace

constraint_system build_constraint_system(const symmetric_matrix& y, double eps, const statistics_table& stats,
                                          const lsh_config& cfg)
{
    const int n = y.size();
    if (n != stats.n)
        throw input_error("statistics table was calibrated at n = " + std::to_string(stats.n) + ", matrix has n = "
                          + std::to_string(n));
    if (cfg.degree < 0 || cfg.degree > stats.d)
        throw input_error("lumber degree " + std::to_string(cfg.degree) + " exceeds the table degree "
                          + std::to_string(stats.d));
    if (!(eps >= 0.0 && eps < 1.0))
        throw input_error("eps must lie in [0, 1)");
    const bool robust = cfg.mode == lsh_mode::robust;
    const double dim = robust ? 1.0 + 2.0 * n + 0.5 * n * (n + 1.0) : 1.0 + n;
    if (dim > cfg.max_moment_dim)
        throw resource_error("moment dimension " + std::to_string(static_cast<long long>(dim))
                             + " exceeds the cap max_moment_dim = " + std::to_string(cfg.max_moment_dim));

    constraint_system sys;
    sys.n = n;
    sys.eps = eps;
    sys.mode = cfg.mode;
    sys.basis = monomial_basis(n, robust);
    form_table ft(sys.forms);
    const int one = ft.unit(0);
    const double nw = cfg.norm_window.value_or(stats.norm_window());

    sys.constraints.push_back({"pE[1] = 1", constraint_tag::plumbing, {{1.0, one, one}}, 1.0, 1.0, 0.0});

    {
        moment_constraint c{"(1/n) sum pE[v_i^2] = 1", constraint_tag::lsh, {}, 1.0 - nw, 1.0 + nw, nw};
        for (int i = 0; i < n; ++i) {
            const int f = ft.unit(sys.basis.v(i));
            c.terms.push_back({1.0 / n, f, f});
        }
        sys.constraints.push_back(std::move(c));
    }

    std::vector<int> idx;
    for (std::size_t a = 0; a < stats.lumber_list.size(); ++a)
        if (stats.lumber_list[a].degree() <= cfg.degree)
            idx.push_back(static_cast<int>(a));

    if (!robust) {
        tree_evaluator ev(y);
        std::vector<Eigen::VectorXd> vals;
        for (int a : idx)
            vals.push_back(ev.lumber_value(stats.lumber_list[a]));
        if (cfg.vectors) {
            for (std::size_t k = 0; k < idx.size(); ++k) {
                sparse_form f;
                for (int i = 0; i < n; ++i)
                    if (vals[k][i] != 0.0)
                        f.emplace_back(sys.basis.v(i), vals[k][i] / n);
                const double target = stats.vec_stats[idx[k]];
                const double c = stats.vec_window[idx[k]];
                sys.constraints.push_back({"vec " + describe(stats.lumber_list[idx[k]]), constraint_tag::lsh,
                                           {{1.0, one, ft.add(std::move(f))}}, target - c, target + c, c});
            }
        }
        if (cfg.pairs) {
            for (std::size_t a = 0; a < idx.size(); ++a)
                for (std::size_t b = a; b < idx.size(); ++b) {
                    const double target = stats.pair_stats(idx[a], idx[b]);
                    const double c = stats.pair_window(idx[a], idx[b]);
                    add_constant(sys,
                                 "pair " + describe(stats.lumber_list[idx[a]]) + " / "
                                     + describe(stats.lumber_list[idx[b]]),
                                 vals[a].dot(vals[b]) / n, target - c, target + c);
                }
        }
        if (cfg.caps) {
            for (std::size_t k = 0; k < stats.cap_trees.size(); ++k) {
                if (stats.cap_trees[k].degree() > cfg.degree)
                    continue;
                const double inf_norm = ev.tree_value(stats.cap_trees[k]).lpNorm<Eigen::Infinity>();
                add_constant(sys, "cap " + describe(stats.cap_trees[k]), std::pow(inf_norm, 4), -inf,
                             stats.infinity_caps[k]);
            }
        }
        if (cfg.opnorm) {
            const double op = y.operator_norm();
            add_constant(sys, "||Y||_op^2 <= bound", op * op, -inf, cfg.opnorm_bound);
        }
        return sys;
    }

    // Robust block.
    const auto& basis = sys.basis;
    for (int j = 0; j < n; ++j) {
        const int wj = ft.unit(basis.w(j));
        sys.constraints.push_back({"W" + std::to_string(j) + "^2 = W" + std::to_string(j), constraint_tag::robust,
                                   {{1.0, wj, wj}, {-1.0, one, wj}}, 0.0, 0.0, 0.0});
    }
    for (int j = 0; j < n; ++j) {
        const int wj = ft.unit(basis.w(j));
        for (int i = 0; i < n; ++i) {
            const int x = ft.unit(basis.xhat(i, j));
            sys.constraints.push_back({"W" + std::to_string(j) + " Xh" + std::to_string(i) + "," + std::to_string(j)
                                           + " = W" + std::to_string(j) + " Y" + std::to_string(i) + ","
                                           + std::to_string(j),
                                       constraint_tag::robust, {{1.0, wj, x}, {-y(i, j), wj, one}}, 0.0, 0.0, 0.0});
        }
    }
    const double budget = eps * n;
    sparse_form all_w;
    for (int i = 0; i < n; ++i)
        all_w.emplace_back(basis.w(i), 1.0);
    const int all_w_form = ft.add(all_w);
    sys.constraints.push_back({"sum (1 - W_i) <= eps n", constraint_tag::robust, {{1.0, one, all_w_form}},
                               n - budget, inf, 0.0});
    for (int j = 0; j < n; ++j) {
        const int wj = ft.unit(basis.w(j));
        sys.constraints.push_back({"W" + std::to_string(j) + " sum (1 - W_i) <= eps n W" + std::to_string(j),
                                   constraint_tag::robust, {{n - budget, wj, one}, {-1.0, wj, all_w_form}}, -inf,
                                   0.0, 0.0});
    }

    detail::xhat_algebra alg(basis, ft);
    if (cfg.pairs) {
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = a; b < idx.size(); ++b) {
                const auto& la = stats.lumber_list[idx[a]];
                const auto& lb = stats.lumber_list[idx[b]];
                const std::string label = "pair " + describe(la) + " / " + describe(lb);
                if (la.degree() + lb.degree() == 0)
                    continue;  // (1/n)<1,1> = 1 identically
                const auto p = alg.pair(la, lb);
                if (!p) {
                    sys.dropped.push_back({label, "needs moments of degree " + std::to_string(la.degree() + lb.degree())
                                                      + " > 2"});
                    continue;
                }
                const double target = stats.pair_stats(idx[a], idx[b]);
                const double c = stats.pair_window(idx[a], idx[b]);
                sys.constraints.push_back(from_poly(label, constraint_tag::lsh, *p, target - c, target + c, c, ft, one));
            }
    }
    if (cfg.vectors) {
        for (int a : idx) {
            const auto& l = stats.lumber_list[a];
            const std::string label = "vec " + describe(l);
            const auto vals = l.degree() <= 1 ? alg.lumber_coords(l) : std::nullopt;
            if (!vals) {
                sys.dropped.push_back({label, "needs moments of degree " + std::to_string(l.degree() + 1) + " > 2"});
                continue;
            }
            poly2 s;
            for (int i = 0; i < n; ++i) {
                poly2 vi;
                vi.lin[basis.v(i)] = 1.0;
                accumulate(s, *detail::multiply((*vals)[i], vi, ft), 1.0 / n);
            }
            const double target = stats.vec_stats[a];
            const double c = stats.vec_window[a];
            sys.constraints.push_back(from_poly(label, constraint_tag::lsh, s, target - c, target + c, c, ft, one));
        }
    }
    if (cfg.caps) {
        for (std::size_t k = 0; k < stats.cap_trees.size(); ++k) {
            const auto& t = stats.cap_trees[k];
            if (t.degree() > cfg.degree)
                continue;
            const std::string label = "cap " + describe(t);
            const auto* vals = t.degree() <= 1 ? alg.tree_coords(t) : nullptr;
            if (!vals) {
                sys.dropped.push_back({label, "needs moments of degree " + std::to_string(2 * t.degree()) + " > 2"});
                continue;
            }
            const double bound = std::sqrt(stats.infinity_caps[k]);
            for (int i = 0; i < n; ++i) {
                const auto sq = detail::multiply((*vals)[i], (*vals)[i], ft);
                sys.constraints.push_back(from_poly(label + " at " + std::to_string(i), constraint_tag::lsh, *sq,
                                                    -inf, bound, 0.0, ft, one));
            }
        }
    }
    if (cfg.opnorm) {
        gram_lmi lmi;
        lmi.label = "bound Id - pE[Xh^2] >= 0";
        lmi.bound = cfg.opnorm_bound;
        for (int j = 0; j < n; ++j) {
            std::vector<int> g(static_cast<std::size_t>(n));
            for (int p = 0; p < n; ++p)
                g[p] = basis.xhat(p, j);
            lmi.groups.push_back(std::move(g));
        }
        sys.lmis.push_back(std::move(lmi));
    }
    return sys;
}

Eigen::VectorXd witness_vector(const constraint_system& sys, const symmetric_matrix& x,
                               const std::vector<int>& corrupted_rows, const Eigen::VectorXd& v)
{
    const int n = sys.n;
    if (x.size() != n || v.size() != n)
        throw input_error("witness: dimension mismatch");
    Eigen::VectorXd m = Eigen::VectorXd::Zero(sys.moment_dim());
    m[0] = 1.0;
    for (int i = 0; i < n; ++i)
        m[sys.basis.v(i)] = v[i];
    if (sys.basis.robust()) {
        for (int i = 0; i < n; ++i)
            m[sys.basis.w(i)] = 1.0;
        for (int i : corrupted_rows)
            m[sys.basis.w(i)] = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                m[sys.basis.xhat(i, j)] = x(i, j);
    }
    return m;
}

std::string to_json(const constraint_system& sys)
{
    using nlohmann::json;
    json out;
    out["n"] = sys.n;
    out["eps"] = sys.eps;
    out["mode"] = to_string(sys.mode);
    out["moment_dim"] = sys.moment_dim();
    json basis = json::array();
    for (int k = 0; k < sys.moment_dim(); ++k)
        basis.push_back(sys.basis.name(k));
    out["basis"] = basis;
    json cons = json::array();
    for (const auto& c : sys.constraints) {
        std::map<std::pair<int, int>, double> entries;
        for (const auto& t : c.terms)
            for (const auto& [a, ca] : sys.forms[t.u])
                for (const auto& [b, cb] : sys.forms[t.w])
                    entries[{std::min(a, b), std::max(a, b)}] += t.coef * ca * cb;
        json functional = json::array();
        for (const auto& [ab, coef] : entries)
            if (coef != 0.0)
                functional.push_back({ab.first, ab.second, coef});
        json item = {{"label", c.label}, {"tag", to_string(c.tag)}, {"functional", functional}, {"slack", c.slack}};
        item["lo"] = std::isfinite(c.lo) ? json(c.lo) : json(nullptr);
        item["hi"] = std::isfinite(c.hi) ? json(c.hi) : json(nullptr);
        if (c.lo == c.hi)
            item["target"] = c.lo;
        else if (std::isfinite(c.lo) && std::isfinite(c.hi))
            item["target"] = 0.5 * (c.lo + c.hi);
        cons.push_back(item);
    }
    out["constraints"] = cons;
    json psd = json::array();
    psd.push_back({{"label", "moment matrix"}, {"kind", "identity"}});
    for (const auto& l : sys.lmis)
        psd.push_back({{"label", l.label}, {"kind", "bound minus gram"}, {"bound", l.bound}, {"groups", l.groups}});
    out["psd_blocks"] = psd;
    json consts = json::array();
    for (const auto& c : sys.constants) {
        json item = {{"label", c.label}, {"value", c.value}, {"ok", c.ok}};
        item["lo"] = std::isfinite(c.lo) ? json(c.lo) : json(nullptr);
        item["hi"] = std::isfinite(c.hi) ? json(c.hi) : json(nullptr);
        consts.push_back(item);
    }
    out["constant_checks"] = consts;
    json dropped = json::array();
    for (const auto& d : sys.dropped)
        dropped.push_back({{"label", d.label}, {"reason", d.reason}});
    out["dropped"] = dropped;
    return out.dump(1);
}

}  // namespace ampsdp

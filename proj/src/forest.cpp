#include "ampsdp/forest.hpp"

#include "ampsdp/error.hpp"

#include <json.hpp>

#include <cmath>

namespace ampsdp {

forest forest::constant(double c)
{
    forest f;
    f.add(lumber(), c);
    return f;
}

forest forest::single(const lumber& l, double coef)
{
    forest f;
    f.add(l, coef);
    return f;
}

int forest::degree() const
{
    int d = 0;
    for (const auto& [l, c] : terms_)
        d = std::max(d, l.degree());
    return d;
}

double forest::max_abs_coef() const
{
    double m = 0.0;
    for (const auto& [l, c] : terms_)
        m = std::max(m, std::abs(c));
    return m;
}

bool forest::is_scalar() const
{
    for (const auto& [l, c] : terms_)
        if (!l.base.is_empty())
            return false;
    return true;
}

void forest::add(const lumber& l, double coef)
{
    if (!std::isfinite(coef))
        throw numerical_error("non-finite forest coefficient");
    if (coef == 0.0)
        return;
    auto [it, inserted] = terms_.emplace(l, coef);
    if (!inserted) {
        it->second += coef;
        if (it->second == 0.0)
            terms_.erase(it);
    }
}

forest& forest::operator+=(const forest& o)
{
    for (const auto& [l, c] : o.terms_)
        add(l, c);
    return *this;
}

forest& forest::operator-=(const forest& o)
{
    for (const auto& [l, c] : o.terms_)
        add(l, -c);
    return *this;
}

forest& forest::operator*=(double s)
{
    if (s == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& [l, c] : terms_)
        c *= s;
    return *this;
}

forest forest::hadamard(const forest& o) const
{
    forest out;
    for (const auto& [a, ca] : terms_)
        for (const auto& [b, cb] : o.terms_)
            out.add(ampsdp::hadamard(a, b), ca * cb);
    return out;
}

forest forest::reroot() const
{
    forest out;
    for (const auto& [l, c] : terms_)
        out.add(ampsdp::reroot(l), c);
    return out;
}

forest forest::trunk() const
{
    forest out;
    for (const auto& [l, c] : terms_)
        out.add(to_trunk(l), c);
    return out;
}

const Eigen::VectorXd& tree_evaluator::tree_value(const tree& t)
{
    auto it = trees_.find(t.encoding());
    if (it != trees_.end())
        return it->second;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(x_.size());
    for (const auto& b : t.branches())
        v.array() *= x_.multiply(tree_value(b)).array();
    return trees_.emplace(t.encoding(), std::move(v)).first->second;
}

double tree_evaluator::trunk_value(const tree& t)
{
    if (t.is_empty())
        throw domain_error("the tree should be nonempty");
    auto it = trunks_.find(t.encoding());
    if (it != trunks_.end())
        return it->second;
    const double k = tree_value(t).sum() / static_cast<double>(x_.size());
    trunks_.emplace(t.encoding(), k);
    return k;
}

Eigen::VectorXd tree_evaluator::lumber_value(const lumber& l)
{
    double scale = 1.0;
    for (const auto& t : l.trunks)
        scale *= trunk_value(t);
    return scale * tree_value(l.base);
}

Eigen::VectorXd tree_evaluator::forest_value(const forest& f)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x_.size());
    for (const auto& [l, c] : f.terms()) {
        double scale = c;
        for (const auto& t : l.trunks)
            scale *= trunk_value(t);
        out += scale * tree_value(l.base);
    }
    return out;
}

Eigen::VectorXd evaluate_tree(const tree& t, const symmetric_matrix& x)
{
    tree_evaluator ev(x);
    return ev.tree_value(t);
}

double trunk_value(const tree& t, const symmetric_matrix& x)
{
    tree_evaluator ev(x);
    return ev.trunk_value(t);
}

Eigen::VectorXd evaluate_lumber(const lumber& l, const symmetric_matrix& x)
{
    tree_evaluator ev(x);
    return ev.lumber_value(l);
}

Eigen::VectorXd evaluate_forest(const forest& f, const symmetric_matrix& x)
{
    tree_evaluator ev(x);
    return ev.forest_value(f);
}

namespace {

using nlohmann::json;

json tree_json(const tree& t)
{
    if (t.is_empty())
        return "E";
    const auto& br = t.branches();
    if (br.size() == 1)
        return json::array({"R", tree_json(br[0])});
    std::vector<tree> rest(br.begin() + 1, br.end());
    return json::array({"G", tree_json(tree::reroot(br[0])), tree_json(tree::from_branches(rest))});
}

tree parse_tree(const json& j)
{
    if (j.is_string()) {
        if (j.get<std::string>() != "E")
            throw input_error("unknown tree atom " + j.dump());
        return tree();
    }
    if (!j.is_array() || j.empty() || !j[0].is_string())
        throw input_error("malformed tree encoding " + j.dump());
    const std::string tag = j[0];
    if (tag == "R" && j.size() == 2)
        return tree::reroot(parse_tree(j[1]));
    if (tag == "G" && j.size() == 3)
        return tree::graft(parse_tree(j[1]), parse_tree(j[2]));
    throw input_error("malformed tree encoding " + j.dump());
}

}  // namespace

std::string to_json(const tree& t)
{
    return tree_json(t).dump();
}

std::string to_json(const forest& f)
{
    json terms = json::array();
    for (const auto& [l, c] : f.terms()) {
        json trunks = json::array();
        for (const auto& t : l.trunks)
            trunks.push_back(tree_json(t));
        terms.push_back(json::array({c, tree_json(l.base), trunks}));
    }
    return terms.dump();
}

tree tree_from_json(const std::string& s)
{
    return parse_tree(json::parse(s));
}

forest forest_from_json(const std::string& s)
{
    const json j = json::parse(s);
    if (!j.is_array())
        throw input_error("forest must be a JSON array of terms");
    forest f;
    for (const auto& term : j) {
        if (!term.is_array() || term.size() != 3 || !term[2].is_array())
            throw input_error("malformed forest term " + term.dump());
        std::vector<tree> trunks;
        for (const auto& t : term[2])
            trunks.push_back(parse_tree(t));
        f.add(lumber(parse_tree(term[1]), std::move(trunks)), term[0].get<double>());
    }
    return f;
}

}  // namespace ampsdp

#pragma once

#include "ampsdp/forest.hpp"
#include "ampsdp/sdp.hpp"

#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

namespace ampsdp::detail {

class form_table {
public:
    explicit form_table(std::vector<sparse_form>& forms) : forms_(forms) {}

    int add(sparse_form f);
    int unit(int k);

private:
    std::vector<sparse_form>& forms_;
    std::unordered_map<int, int> units_;
};

// Polynomial of degree <= 2 in the basis monomials: c + lin + sum of bilinear terms.
struct poly2 {
    double c = 0.0;
    std::map<int, double> lin;
    std::vector<bilinear_term> quad;
    mutable int lin_form = -1;

    int degree() const { return !quad.empty() ? 2 : (lin.empty() ? 0 : 1); }
    int form(form_table& ft) const;
};

void accumulate(poly2& into, const poly2& a, double s = 1.0);
// Nullopt when the product has degree above 2.
std::optional<poly2> multiply(const poly2& a, const poly2& b, form_table& ft);

// Tree and lumber coordinates as polynomials in the Xh block of the basis.
class xhat_algebra {
public:
    xhat_algebra(const monomial_basis& basis, form_table& ft) : basis_(basis), ft_(ft) {}

    const std::vector<poly2>* tree_coords(const tree& t);
    std::optional<poly2> trunk(const tree& t);
    // Scalar part of a lumber (product of trunks).
    std::optional<poly2> trunk_product(const lumber& l);
    std::optional<std::vector<poly2>> lumber_coords(const lumber& l);
    // (1/n) <L1, L2>
    std::optional<poly2> pair(const lumber& a, const lumber& b);

private:
    const monomial_basis& basis_;
    form_table& ft_;
    std::unordered_map<std::string, std::optional<std::vector<poly2>>> trees_;
};

}  // namespace ampsdp::detail

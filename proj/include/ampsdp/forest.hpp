#pragma once

#include "ampsdp/denoiser.hpp"
#include "ampsdp/ensembles.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace ampsdp {

// Rooted tree kept in canonical form: the root's branches (subtrees hanging below
// each root edge) are sorted by their encodings, so grafting is flattened.
class tree {
public:
    tree();  // Empty

    static tree empty() { return tree(); }
    static tree reroot(const tree& child);
    static tree graft(const tree& a, const tree& b);
    static tree from_branches(std::vector<tree> branches);

    const std::vector<tree>& branches() const { return node_->branches; }
    int degree() const { return node_->degree; }
    bool is_empty() const { return node_->branches.empty(); }
    // AHU encoding: "(" + sorted child encodings + ")"; Empty is "()".
    const std::string& encoding() const { return node_->encoding; }

    bool operator==(const tree& o) const { return encoding() == o.encoding(); }
    bool operator<(const tree& o) const;

private:
    struct node {
        std::vector<tree> branches;
        int degree = 0;
        std::string encoding;
    };
    std::shared_ptr<const node> node_;
};

std::string canonicalize(const tree& t);

// Parent array of a tree in preorder; parent[0] = -1 for the root.
std::vector<int> parent_array(const tree& t);

struct lumber {
    tree base;
    std::vector<tree> trunks;  // sorted, non-empty

    lumber() = default;
    explicit lumber(tree b, std::vector<tree> ts = {});

    int degree() const;
    std::string key() const;
    bool operator<(const lumber& o) const;
    bool operator==(const lumber& o) const { return key() == o.key(); }
};

// Entrywise product of lumber values.
lumber hadamard(const lumber& a, const lumber& b);
// X times a lumber value.
lumber reroot(const lumber& l);
// Scalar lumber (Empty base) equal to (1/n) <l(X), 1>.
lumber to_trunk(const lumber& l);

class forest {
public:
    forest() = default;
    static forest constant(double c);
    static forest single(const lumber& l, double coef = 1.0);

    const std::map<lumber, double>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }
    int degree() const;
    double max_abs_coef() const;
    // True when every term has an Empty base, i.e. the forest is a scalar times 1.
    bool is_scalar() const;

    void add(const lumber& l, double coef);
    forest& operator+=(const forest& o);
    forest& operator-=(const forest& o);
    forest& operator*=(double s);
    friend forest operator+(forest a, const forest& b) { return a += b; }
    friend forest operator-(forest a, const forest& b) { return a -= b; }
    friend forest operator*(double s, forest a) { return a *= s; }

    forest hadamard(const forest& o) const;
    forest reroot() const;
    forest trunk() const;

private:
    std::map<lumber, double> terms_;
};

// Memoizing evaluator of trees and trunks at one matrix.
class tree_evaluator {
public:
    explicit tree_evaluator(const symmetric_matrix& x) : x_(x) {}

    const Eigen::VectorXd& tree_value(const tree& t);
    double trunk_value(const tree& t);
    Eigen::VectorXd lumber_value(const lumber& l);
    Eigen::VectorXd forest_value(const forest& f);

private:
    const symmetric_matrix& x_;
    std::unordered_map<std::string, Eigen::VectorXd> trees_;
    std::unordered_map<std::string, double> trunks_;
};

Eigen::VectorXd evaluate_tree(const tree& t, const symmetric_matrix& x);
double trunk_value(const tree& t, const symmetric_matrix& x);
Eigen::VectorXd evaluate_lumber(const lumber& l, const symmetric_matrix& x);
Eigen::VectorXd evaluate_forest(const forest& f, const symmetric_matrix& x);

inline constexpr int enumeration_degree_guard = 6;

// All rooted trees with exactly `degree` edges, in canonical order.
std::vector<tree> enumerate_trees(int degree);
// All canonical lumber of degree <= d, ordered by (degree, key).
std::vector<lumber> enumerate_lumber(int d);
double lumber_count_bound(int d);

struct compile_options {
    std::size_t max_terms = 200000;
};

struct compiled_amp {
    std::vector<forest> iterates;  // x^0..x^t
    double max_abs_coef = 0.0;
};

compiled_amp compile_amp_iterates(const denoiser_family& fam, int t, const compile_options& opt = {});
forest compile_amp_forest(const denoiser_family& fam, int t, const compile_options& opt = {});

// Exact E[T(X)_i] by the labeling sum over vertex identifications.
inline constexpr int expectation_degree_guard = 6;
double tree_coordinate_expectation(const tree& t, const ensemble_spec& spec, int i = 0);
// E[L(X)_i] and E[(1/n)<L1(X), L2(X)>] by the same labeling sum over all components.
double lumber_coordinate_expectation(const lumber& l, const ensemble_spec& spec);
double lumber_pair_expectation(const lumber& a, const lumber& b, const ensemble_spec& spec);

std::string to_json(const tree& t);
std::string to_json(const forest& f);
tree tree_from_json(const std::string& s);
forest forest_from_json(const std::string& s);
std::string describe(const tree& t);
std::string describe(const lumber& l);

}  // namespace ampsdp

#pragma once

#include "ampsdp/calibration.hpp"
#include "ampsdp/ensembles.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ampsdp {

enum class lsh_mode { nonrobust, robust };
enum class constraint_tag { robust, lsh, norm, plumbing };

std::string to_string(lsh_mode m);
lsh_mode parse_lsh_mode(const std::string& s);
std::string to_string(constraint_tag t);

// Degree-1 monomials 1 | v_0..v_{n-1} | W_0..W_{n-1} | Xh_ij (i <= j); robust mode uses all
// blocks, non-robust mode only 1 and v.
class monomial_basis {
public:
    monomial_basis() = default;
    monomial_basis(int n, bool robust);

    int n() const { return n_; }
    int size() const { return static_cast<int>(names_.size()); }
    bool robust() const { return robust_; }
    int one() const { return 0; }
    int v(int i) const { return 1 + i; }
    int w(int i) const;
    int xhat(int i, int j) const;
    const std::string& name(int k) const { return names_.at(k); }
    int position(const std::string& name) const;

private:
    int n_ = 0;
    bool robust_ = false;
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
};

// Linear functional over the basis: sum of coef * monomial.
using sparse_form = std::vector<std::pair<int, double>>;

// coef * pE[form_u * form_w]
struct bilinear_term {
    double coef = 0.0;
    int u = 0;
    int w = 0;
};

// lo <= sum of terms <= hi; lo == hi for equalities.
struct moment_constraint {
    std::string label;
    constraint_tag tag = constraint_tag::plumbing;
    std::vector<bilinear_term> terms;
    double lo = 0.0;
    double hi = 0.0;
    double slack = 0.0;  // half-width of the window around its center, 0 for equalities
};

// bound * Id - sum_j M[g_j, g_j] must be PSD (groups index the basis).
struct gram_lmi {
    std::string label;
    double bound = 5.0;
    std::vector<std::vector<int>> groups;
};

struct constant_check {
    std::string label;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool ok = false;
};

struct dropped_constraint {
    std::string label;
    std::string reason;
};

struct lsh_config {
    lsh_mode mode = lsh_mode::nonrobust;
    int degree = 2;                    // lumber degree, at most the table degree
    bool pairs = true;
    bool vectors = true;
    bool caps = true;
    bool opnorm = true;
    double opnorm_bound = 5.0;
    std::optional<double> norm_window;  // defaults to eta/48 from the table
    int max_moment_dim = 4000;
};

struct constraint_system {
    int n = 0;
    double eps = 0.0;
    lsh_mode mode = lsh_mode::nonrobust;
    monomial_basis basis;
    std::vector<sparse_form> forms;
    std::vector<moment_constraint> constraints;
    std::vector<gram_lmi> lmis;
    std::vector<constant_check> constants;
    std::vector<dropped_constraint> dropped;

    int moment_dim() const { return basis.size(); }
    double evaluate(const moment_constraint& c, const Eigen::MatrixXd& m) const;
    // Value at the integral point m m^T.
    double evaluate_rank_one(const moment_constraint& c, const Eigen::VectorXd& m) const;
    bool constants_ok() const;
};

double window_violation(double value, double lo, double hi);

constraint_system build_constraint_system(const symmetric_matrix& y, double eps, const statistics_table& stats,
                                          const lsh_config& cfg);

// The integral point (1, v, W, Xh): Xh = x, W = clean-row indicators, v given.
Eigen::VectorXd witness_vector(const constraint_system& sys, const symmetric_matrix& x,
                               const std::vector<int>& corrupted_rows, const Eigen::VectorXd& v);

struct residual_report {
    double pe_one = 0.0;
    double min_eigenvalue = 0.0;
    double max_violation = 0.0;       // over windowed constraints
    double lmi_violation = 0.0;       // largest eigenvalue excess over the bound
    std::string worst;
    double by_tag[4] = {0.0, 0.0, 0.0, 0.0};
    bool constants_ok = true;  // informational: constant checks never gate feasibility

    double total() const;
    bool passes(double tol) const;
};

struct pseudo_expectation {
    Eigen::MatrixXd moments;
    residual_report residuals;
};

// Re-evaluates every constraint from the moment matrix alone.
residual_report audit(const constraint_system& sys, const Eigen::MatrixXd& m);
// Exact substitution of an integral point; min_eigenvalue is 0 by construction.
residual_report audit_rank_one(const constraint_system& sys, const Eigen::VectorXd& m);

enum class solver_kind { automatic, projection, factorized };
enum class solve_status { feasible, infeasible, indeterminate };

std::string to_string(solver_kind k);
solver_kind parse_solver_kind(const std::string& s);
std::string to_string(solve_status s);

struct solver_config {
    solver_kind kind = solver_kind::automatic;
    long max_iters = 5000;
    double tolerance = 1e-6;
    std::uint64_t seed = 1;
    int rank = 32;
    int projection_dim_limit = 400;
    std::optional<Eigen::VectorXd> init;  // integral starting point
};

struct solve_result {
    solve_status status = solve_status::indeterminate;
    pseudo_expectation pe;
    long iterations = 0;
    std::vector<double> trace;  // violation history
    std::string solver;
    std::string message;
};

solve_result solve_feasibility(const constraint_system& sys, const solver_config& cfg);
solve_result solve_projection(const constraint_system& sys, const solver_config& cfg);
solve_result solve_factorized(const constraint_system& sys, const solver_config& cfg);

Eigen::MatrixXd extract_second_moment(const constraint_system& sys, const pseudo_expectation& pe);

struct recovery_result {
    Eigen::VectorXd v_lsh;
    double top_eigenvalue = 0.0;
    double trace = 0.0;
    std::optional<double> correlation;
    long iterations = 0;
    double residual = 0.0;
};

Eigen::VectorXd round_top_eigenvector(const Eigen::MatrixXd& m, double* top_eigenvalue = nullptr);
double correlation(const Eigen::VectorXd& u, const Eigen::VectorXd& w);
recovery_result recover(const constraint_system& sys, const solve_result& res,
                        const std::optional<Eigen::VectorXd>& reference = std::nullopt);

std::string to_json(const constraint_system& sys);
std::string to_json(const residual_report& r);

}  // namespace ampsdp

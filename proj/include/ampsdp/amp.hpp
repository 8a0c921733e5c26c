#pragma once

#include "ampsdp/denoiser.hpp"
#include "ampsdp/ensembles.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ampsdp {

struct amp_trace {
    int n = 0;
    // iterates[0] = x^{-1}, iterates[s + 1] = x^s.
    std::vector<Eigen::VectorXd> iterates;
    // onsager[s][j - 1] = b_{s,j}, the coefficients used to form x^{s+1}.
    std::vector<std::vector<double>> onsager;
    double normalization = 1.0;

    int steps() const { return static_cast<int>(iterates.size()) - 2; }
    const Eigen::VectorXd& x(int s) const { return iterates.at(s + 1); }
    // x^0..x^s, the argument list of f^s.
    std::vector<Eigen::VectorXd> prefix(int s) const;
    // Final iterate divided by the normalization.
    Eigen::VectorXd output() const { return x(steps()) / normalization; }
};

inline constexpr double divergence_bound = 1e6;

// mean_sq_norm, when given, is the expected (1/n)||x^t||^2 used to normalize the output.
amp_trace amp_run(const symmetric_matrix& x, const denoiser_family& fam, int t,
                  std::optional<double> mean_sq_norm = std::nullopt);

double onsager_coeff(const amp_trace& trace, const denoiser_family& fam, int t, int j);

// f^s(x^s, ..., x^0) at the stored iterates.
Eigen::VectorXd denoised(const amp_trace& trace, const denoiser_family& fam, int s);

// Largest ||x^{s+1} - (X f^s - sum_j b_{s,j} f^{j-1})|| / ||x^{s+1}|| over the trace.
double recursion_residual(const symmetric_matrix& x, const amp_trace& trace, const denoiser_family& fam);

enum class problem_kind { nnpca, sk };

std::string to_string(problem_kind k);
problem_kind parse_problem(const std::string& s);

struct problem_spec {
    problem_kind kind = problem_kind::nnpca;
};

Eigen::VectorXd round_to_feasible(const Eigen::VectorXd& x, const problem_spec& prob);
double objective(const symmetric_matrix& x, const Eigen::VectorXd& v);

struct state_evolution_table {
    int t = 0;
    Eigen::MatrixXd Q;  // Q(i-1, j-1) = E[f^{i-1} f^{j-1}]
    long mc_samples = 0;
    std::uint64_t seed = 0;
};

// Monte Carlo realization of the Gaussian process (U^0 = 1, U^1, ..., U^t).
class se_process {
public:
    se_process(long mc_samples, std::uint64_t seed);

    // Appends f^s for s = steps(): evaluates it on the samples and draws U^{s+1}.
    void extend(const denoiser& f);

    int steps() const { return steps_; }
    long samples() const { return mc_; }
    const Eigen::MatrixXd& Q() const { return q_; }
    // Column s holds the samples of U^s.
    const Eigen::MatrixXd& U() const { return u_; }
    const Eigen::MatrixXd& F() const { return f_; }
    state_evolution_table table() const;

private:
    long mc_;
    std::uint64_t seed_;
    int steps_ = 0;
    Eigen::MatrixXd u_, f_, q_, l_, z_;
};

state_evolution_table state_evolution(const denoiser_family& fam, int t, long mc_samples, std::uint64_t seed);

struct sk_iamp_options {
    int steps = 20;
    double offset = 0.5;       // terminal time is 1 + offset / steps
    double drift_c = 0.5;      // gamma(t) = drift_c / (1 - t + drift_a)
    double drift_a = 0.1;
    int grid_points = 2401;
    int quadrature_nodes = 41;
    long mc_samples = 100000;
    std::uint64_t seed = 7;
};

// Incremental family f^0..f^K for the SK problem. phi_k = d/dx Phi(t_k, x) where Phi solves
// d_t Phi + (1/2) d_xx Phi + (gamma/2) (d_x Phi)^2 = 0 backward from Phi = |x|, and the field
// z^k is driven by normalized AMP increments; increment normalizers come from state evolution.
denoiser_family make_sk_iamp_family(const sk_iamp_options& opt);

// Probabilists' Gauss-Hermite rule: nodes and weights summing to one.
void gauss_hermite(int m, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace ampsdp

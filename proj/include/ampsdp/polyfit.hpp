#pragma once

#include "ampsdp/amp.hpp"
#include "ampsdp/denoiser.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace ampsdp {

// Polynomial approximation of f^s over (u^0, ..., u^s) with u^0 = 1 and
// (u^1, ..., u^s) ~ N(0, covariance).
struct poly_approx {
    int step = 0;
    int requested_degree = 0;
    int degree = 0;
    std::vector<monomial> terms;  // exps over u^0..u^s; exps[0] is always 0
    Eigen::MatrixXd covariance;
    double l2_error = 0.0;        // held-out estimate of E[(f - p)^2]
    double l2_se = 0.0;
    double train_error = 0.0;     // mean squared residual on the fitting samples
    long mc_samples = 0;
    std::vector<std::string> warnings;

    denoiser as_denoiser() const;
};

// Columns with |R_ii| below this fraction of the largest trigger the degree-reduction fallback.
inline constexpr double polyfit_condition_floor = 1e-10;

poly_approx fit_denoiser_polynomial(const denoiser& f, int s, int degree, const Eigen::MatrixXd& cov,
                                    long mc_samples, std::uint64_t seed);

struct polyfit_report {
    std::vector<double> step_errors;   // held-out l2 error per step
    std::vector<double> discrepancy;   // (1/sqrt n) ||x^t - xhat^t|| per fresh instance
    std::vector<std::string> warnings;
    bool unchanged = false;            // input family was already polynomial
};

struct polyfit_family {
    denoiser_family family;
    std::vector<poly_approx> fits;
    polyfit_report report;
};

struct discrepancy_options {
    int n = 500;
    int instances = 3;
    std::uint64_t seed = 11;
    family fam = family::gaussian;
};

polyfit_family approximate_amp_with_polynomials(const denoiser_family& fam, int t, int degree_cap,
                                                const state_evolution_table& se, long mc_samples,
                                                std::uint64_t seed, const discrepancy_options& disc = {});

// (1/sqrt n) ||x^t(fam) - x^t(approx)|| on one matrix.
double iterate_discrepancy(const symmetric_matrix& x, const denoiser_family& fam, const denoiser_family& approx, int t);

class degree_insufficient_error : public std::runtime_error {
public:
    degree_insufficient_error(const std::string& what, std::vector<std::pair<int, double>> curve)
        : std::runtime_error(what), curve_(std::move(curve)) {}
    const std::vector<std::pair<int, double>>& curve() const { return curve_; }

private:
    std::vector<std::pair<int, double>> curve_;
};

// Doubling search over degrees 1, 2, 4, ... up to degree_cap for the first whose mean
// end-to-end discrepancy is at most delta.
polyfit_family search_polynomial_degree(const denoiser_family& fam, int t, int degree_cap, double delta,
                                        const state_evolution_table& se, long mc_samples, std::uint64_t seed,
                                        const discrepancy_options& disc = {});

std::string to_json(const poly_approx& p);

}  // namespace ampsdp

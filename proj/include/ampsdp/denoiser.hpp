#pragma once

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ampsdp {

enum class denoiser_kind { polynomial, relu, tanh_scaled, iamp_field };
enum class denoiser_arity { last_iterate_only, all_iterates };

std::string to_string(denoiser_kind k);
std::string to_string(denoiser_arity a);

// exps[j] is the power of the iterate x^j.
struct monomial {
    double coef = 0.0;
    std::vector<int> exps;
};

// Tabulated schedule shared by the steps of an incremental (IAMP) family.
// The field z^k follows z^k = z^{k-1} + gamma[k-1] phi_{k-1}(z^{k-1}) dt_k + sqrt(dt_k) dW_k with
// dW_k = (x^k - [k >= 3] x^{k-1}) / inc[k] and z^1 = sqrt(t_1) x^1; step k outputs phi_k(z^k).
struct iamp_schedule {
    std::vector<double> times;   // t_0 = 0, ..., t_K
    std::vector<double> gamma;   // drift coefficient on [t_k, t_{k+1})
    std::vector<double> inc;     // increment normalizers, inc[k] for k >= 2
    double lo = -12.0, hi = 12.0;
    std::vector<std::vector<double>> phi, dphi;  // phi[k] sampled on the uniform grid

    double interp(const std::vector<double>& f, double x) const;
    // Field value z^k and dz^k/du^j for j = 0..k at one coordinate.
    double field(const double* u, int k, std::vector<double>* grad) const;
};

// One entrywise denoiser f^s(x^s, ..., x^0).
//
// polynomial / last_iterate_only: sum_k coeffs[k] (x^s)^k
// polynomial / all_iterates:      sum of monomials over x^0..x^s
// relu:                           max(x^s, 0), derivative 1{x^s > 0}
// tanh_scaled / last_iterate_only: tanh(scale * x^s)
// tanh_scaled / all_iterates:      tanh(scale * sum_j weights[j] x^j)
// iamp_field:                      phi_k(z^k) from a shared iamp_schedule, k = step
struct denoiser {
    denoiser_kind kind = denoiser_kind::polynomial;
    denoiser_arity arity = denoiser_arity::last_iterate_only;
    std::vector<double> coeffs;
    std::vector<monomial> terms;
    double scale = 1.0;
    std::vector<double> weights;
    std::shared_ptr<const iamp_schedule> schedule;
    int step = 0;

    static denoiser polynomial(std::vector<double> coeffs);
    static denoiser polynomial(std::vector<monomial> terms);
    static denoiser relu();
    static denoiser tanh_scaled(double scale);
    static denoiser tanh_scaled(double scale, std::vector<double> weights);
    static denoiser iamp_field(std::shared_ptr<const iamp_schedule> schedule, int step);

    // u points at (u^0, ..., u^s).
    double value(const double* u, int s) const;
    double partial(const double* u, int s, int j) const;

    // Vector forms over iterates x^0..x^s.
    Eigen::VectorXd apply(std::span<const Eigen::VectorXd> xs) const;
    Eigen::VectorXd partial(std::span<const Eigen::VectorXd> xs, int j) const;

    int degree() const;  // polynomial degree, -1 for non-polynomial kinds
    bool is_polynomial() const { return kind == denoiser_kind::polynomial; }
    bool depends_on(int j, int s) const;
    void validate(int s) const;
};

struct denoiser_family {
    std::vector<denoiser> steps;
    std::string label;

    int size() const { return static_cast<int>(steps.size()); }
    const denoiser& operator[](int s) const { return steps.at(s); }
    bool polynomial() const;
    int max_poly_degree() const;
    void validate() const;

    static denoiser_family repeat(const denoiser& f, int count, std::string label = {});
};

}  // namespace ampsdp

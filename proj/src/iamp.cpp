#include "ampsdp/amp.hpp"

#include "ampsdp/error.hpp"

#include <algorithm>
#include <cmath>

namespace ampsdp {

void gauss_hermite(int m, std::vector<double>& nodes, std::vector<double>& weights)
{
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite recurrence.
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
    for (int k = 1; k < m; ++k)
        jac(k, k - 1) = jac(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    nodes.resize(m);
    weights.resize(m);
    for (int k = 0; k < m; ++k) {
        nodes[k] = es.eigenvalues()[k];
        weights[k] = es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
    }
}

namespace {

// One backward step of length dt with constant drift coefficient g (Cole-Hopf).
void backward_step(const iamp_schedule& sch, std::vector<double>& big_phi, std::vector<double>& phi, double dt,
                   double g, const std::vector<double>& nodes, const std::vector<double>& weights)
{
    const std::size_t m = big_phi.size();
    const double h = (sch.hi - sch.lo) / static_cast<double>(m - 1);
    std::vector<double> np(m), nd(m), vals(nodes.size()), ders(nodes.size());
    const double root = std::sqrt(dt);
    for (std::size_t i = 0; i < m; ++i) {
        const double x = sch.lo + h * static_cast<double>(i);
        double top = -1e300;
        for (std::size_t q = 0; q < nodes.size(); ++q) {
            const double y = x + root * nodes[q];
            vals[q] = sch.interp(big_phi, y);
            ders[q] = sch.interp(phi, y);
            top = std::max(top, vals[q]);
        }
        if (g <= 1e-12) {
            double a = 0.0, b = 0.0;
            for (std::size_t q = 0; q < nodes.size(); ++q) {
                a += weights[q] * vals[q];
                b += weights[q] * ders[q];
            }
            np[i] = a;
            nd[i] = b;
        } else {
            double z = 0.0, b = 0.0;
            for (std::size_t q = 0; q < nodes.size(); ++q) {
                const double e = weights[q] * std::exp(g * (vals[q] - top));
                z += e;
                b += e * ders[q];
            }
            np[i] = top + std::log(z) / g;
            nd[i] = b / z;
        }
    }
    big_phi.swap(np);
    phi.swap(nd);
}

std::vector<double> gradient(const std::vector<double>& f, double h)
{
    const std::size_t m = f.size();
    std::vector<double> d(m);
    d[0] = (f[1] - f[0]) / h;
    d[m - 1] = (f[m - 1] - f[m - 2]) / h;
    for (std::size_t i = 1; i + 1 < m; ++i)
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    return d;
}

}  // namespace

denoiser_family make_sk_iamp_family(const sk_iamp_options& opt)
{
    const int K = opt.steps;
    if (K < 1)
        throw config_error("sk iamp needs at least one step");
    if (opt.grid_points < 3 || opt.quadrature_nodes < 2)
        throw config_error("sk iamp grid too coarse");
    auto sch = std::make_shared<iamp_schedule>();
    const double delta = 1.0 / K;
    for (int k = 0; k <= K; ++k)
        sch->times.push_back(k * delta);
    for (int k = 0; k <= K; ++k)
        sch->gamma.push_back(opt.drift_c / (1.0 - sch->times[k] + opt.drift_a));
    sch->inc.assign(K + 1, 1.0);

    std::vector<double> nodes, weights;
    gauss_hermite(opt.quadrature_nodes, nodes, weights);
    const int m = opt.grid_points;
    const double h = (sch->hi - sch->lo) / (m - 1);
    std::vector<double> big_phi(m), phi(m);
    for (int i = 0; i < m; ++i) {
        const double x = sch->lo + h * i;
        big_phi[i] = std::abs(x);
        phi[i] = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
    }
    sch->phi.resize(K + 1);
    sch->dphi.resize(K + 1);
    backward_step(*sch, big_phi, phi, opt.offset * delta, 0.0, nodes, weights);
    sch->phi[K] = phi;
    for (int k = K - 1; k >= 0; --k) {
        backward_step(*sch, big_phi, phi, delta, sch->gamma[k], nodes, weights);
        sch->phi[k] = phi;
    }
    for (int k = 0; k <= K; ++k)
        sch->dphi[k] = gradient(sch->phi[k], h);

    denoiser_family fam;
    fam.label = "sk_iamp";
    fam.steps.push_back(denoiser::polynomial(std::vector<double>{1.0}));
    se_process proc(opt.mc_samples, opt.seed);
    proc.extend(fam.steps.back());
    for (int k = 1; k <= K; ++k) {
        if (k >= 2) {
            // Variance of the k-th increment x^k - [k >= 3] x^{k-1} under state evolution.
            const auto& q = proc.Q();
            double var = q(k - 1, k - 1);
            if (k >= 3)
                var += q(k - 2, k - 2) - 2.0 * q(k - 1, k - 2);
            sch->inc[k] = std::sqrt(std::max(var, 1e-12));
        }
        fam.steps.push_back(denoiser::iamp_field(sch, k));
        if (k < K)
            proc.extend(fam.steps.back());
    }
    return fam;
}

}  // namespace ampsdp

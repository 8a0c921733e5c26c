#include "ampsdp/amp.hpp"

#include "ampsdp/error.hpp"
#include "ampsdp/rng.hpp"

#include <cmath>

namespace ampsdp {

se_process::se_process(long mc_samples, std::uint64_t seed) : mc_(mc_samples), seed_(seed)
{
    if (mc_samples < 2)
        throw input_error("state evolution needs at least two samples");
    u_ = Eigen::MatrixXd::Ones(mc_, 1);
    f_.resize(mc_, 0);
    q_.resize(0, 0);
    l_.resize(0, 0);
}

void se_process::extend(const denoiser& f)
{
    const int s = steps_;
    f.validate(s);
    Eigen::VectorXd fs(mc_);
    for (long m = 0; m < mc_; ++m) {
        const Eigen::RowVectorXd row = u_.row(m);
        fs[m] = f.value(row.data(), s);
    }
    if (!fs.allFinite())
        throw numerical_error("state evolution: non-finite denoiser value at step " + std::to_string(s));
    f_.conservativeResize(Eigen::NoChange, s + 1);
    f_.col(s) = fs;

    // Q(s, j) = E[f^s f^j], extended by one row and column.
    const double inv = 1.0 / static_cast<double>(mc_);
    q_.conservativeResize(s + 1, s + 1);
    for (int j = 0; j <= s; ++j) {
        q_(s, j) = f_.col(s).dot(f_.col(j)) * inv;
        q_(j, s) = q_(s, j);
    }

    // Next Cholesky row: U^{s+1} = sum_j L(s, j) z_j.
    l_.conservativeResize(s + 1, s + 1);
    l_.row(s).setZero();
    l_.col(s).setZero();
    const double scale = std::max(1.0, q_.diagonal().maxCoeff());
    for (int j = 0; j < s; ++j) {
        const double pivot = l_(j, j);
        if (pivot <= 1e-12 * std::sqrt(scale))
            continue;
        l_(s, j) = (q_(s, j) - l_.row(s).head(j).dot(l_.row(j).head(j))) / pivot;
    }
    const double rest = q_(s, s) - l_.row(s).head(s).squaredNorm();
    if (rest < -1e-8 * scale)
        throw numerical_error("state evolution covariance is not positive semidefinite");
    l_(s, s) = rest > 0 ? std::sqrt(rest) : 0.0;

    const keyed_rng gen = keyed_rng(seed_).derive(static_cast<std::uint64_t>(s));
    u_.conservativeResize(Eigen::NoChange, s + 2);
    Eigen::VectorXd z(mc_);
    for (long m = 0; m < mc_; ++m)
        z[m] = gen.normal(static_cast<std::uint64_t>(m));
    // Keep the noise draws so later steps reuse them through L.
    if (z_.cols() < s + 1)
        z_.conservativeResize(mc_, s + 1);
    z_.col(s) = z;
    u_.col(s + 1) = z_.leftCols(s + 1) * l_.row(s).transpose();
    ++steps_;
}

state_evolution_table se_process::table() const
{
    state_evolution_table tab;
    tab.t = steps_;
    tab.Q = q_;
    tab.mc_samples = mc_;
    tab.seed = seed_;
    return tab;
}

state_evolution_table state_evolution(const denoiser_family& fam, int t, long mc_samples, std::uint64_t seed)
{
    if (t < 0)
        throw input_error("state evolution needs t >= 0");
    if (fam.size() < t)
        throw input_error("denoiser family shorter than the requested number of steps");
    se_process proc(mc_samples, seed);
    for (int s = 0; s < t; ++s)
        proc.extend(fam[s]);
    auto tab = proc.table();
    if (t > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tab.Q, Eigen::EigenvaluesOnly);
        if (es.eigenvalues()[0] < -1e-8 * std::max(1.0, tab.Q.cwiseAbs().maxCoeff()))
            throw numerical_error("state evolution covariance is not positive semidefinite");
    }
    return tab;
}

}  // namespace ampsdp

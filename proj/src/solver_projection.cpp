#include "ampsdp/sdp.hpp"

#include "ampsdp/error.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <limits>
#include <map>

namespace ampsdp {

namespace {

// svec: upper triangle, column by column, off-diagonal entries scaled by sqrt(2).
struct svec_layout {
    int dim;
    Eigen::Index size() const { return static_cast<Eigen::Index>(dim) * (dim + 1) / 2; }
    Eigen::Index at(int a, int b) const
    {
        if (a > b)
            std::swap(a, b);
        return static_cast<Eigen::Index>(b) * (b + 1) / 2 + a;
    }
};

Eigen::VectorXd to_svec(const Eigen::MatrixXd& m, const svec_layout& l)
{
    Eigen::VectorXd x(l.size());
    for (int b = 0; b < l.dim; ++b)
        for (int a = 0; a <= b; ++a)
            x[l.at(a, b)] = a == b ? m(a, a) : std::sqrt(2.0) * m(a, b);
    return x;
}

Eigen::MatrixXd from_svec(const Eigen::VectorXd& x, const svec_layout& l)
{
    Eigen::MatrixXd m(l.dim, l.dim);
    for (int b = 0; b < l.dim; ++b)
        for (int a = 0; a <= b; ++a) {
            const double v = a == b ? x[l.at(a, b)] : x[l.at(a, b)] / std::sqrt(2.0);
            m(a, b) = v;
            m(b, a) = v;
        }
    return m;
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success)
        throw numerical_error("PSD projection: eigensolver failed");
    const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

solve_result solve_projection(const constraint_system& sys, const solver_config& cfg)
{
    if (!sys.lmis.empty())
        throw unsupported_error("projection solver does not handle gram LMI blocks; use the factorized solver");
    const int dim = sys.moment_dim();
    const svec_layout lay{dim};
    const auto m = static_cast<Eigen::Index>(sys.constraints.size());

    std::vector<Eigen::Triplet<double>> trips;
    for (Eigen::Index k = 0; k < m; ++k) {
        std::map<Eigen::Index, double> row;
        for (const auto& t : sys.constraints[k].terms)
            for (const auto& [a, ca] : sys.forms[t.u])
                for (const auto& [b, cb] : sys.forms[t.w])
                    row[lay.at(a, b)] += t.coef * ca * cb * (a == b ? 1.0 : 1.0 / std::sqrt(2.0));
        for (const auto& [col, v] : row)
            if (v != 0.0)
                trips.emplace_back(k, col, v);
    }
    Eigen::SparseMatrix<double> A(m, lay.size());
    A.setFromTriplets(trips.begin(), trips.end());
    const Eigen::MatrixXd K = Eigen::MatrixXd::Identity(m, m) + Eigen::MatrixXd(A * A.transpose());
    const Eigen::LDLT<Eigen::MatrixXd> kfac(K);
    Eigen::VectorXd lo(m), hi(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        lo[k] = sys.constraints[k].lo;
        hi[k] = sys.constraints[k].hi;
    }

    Eigen::MatrixXd z0 = Eigen::MatrixXd::Zero(dim, dim);
    if (cfg.init) {
        if (cfg.init->size() != dim)
            throw input_error("solver init has the wrong dimension");
        z0 = *cfg.init * cfg.init->transpose();
    } else {
        z0(0, 0) = 1.0;
    }
    Eigen::VectorXd z = to_svec(z0, lay);
    Eigen::VectorXd y = (A * z).cwiseMax(lo).cwiseMin(hi);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(lay.size()), w = Eigen::VectorXd::Zero(m);
    constexpr double alpha = 1.6;

    solve_result res;
    res.solver = "projection";
    Eigen::MatrixXd zmat = z0;
    double best = std::numeric_limits<double>::infinity();
    long best_at = 0;
    constexpr long check_every = 10;
    for (long it = 1; it <= cfg.max_iters; ++it) {
        const Eigen::VectorXd rhs = (z - u) + A.transpose() * (y - w);
        const Eigen::VectorXd x = rhs - A.transpose() * kfac.solve(A * rhs);
        const Eigen::VectorXd ax = A * x;
        const Eigen::VectorXd xh = alpha * x + (1.0 - alpha) * z;
        const Eigen::VectorXd axh = alpha * ax + (1.0 - alpha) * y;
        zmat = project_psd(from_svec(xh + u, lay));
        z = to_svec(zmat, lay);
        y = (axh + w).cwiseMax(lo).cwiseMin(hi);
        u += xh - z;
        w += axh - y;
        res.iterations = it;

        if (it % check_every == 0 || it == cfg.max_iters) {
            const Eigen::VectorXd az = A * z;
            double viol = 0.0;
            for (Eigen::Index k = 0; k < m; ++k)
                viol = std::max(viol, window_violation(az[k], lo[k], hi[k]));
            res.trace.push_back(viol);
            if (viol <= 0.5 * cfg.tolerance)
                break;
            if (viol < 0.99 * best) {
                best = viol;
                best_at = it;
            } else if (it - best_at >= 500 && viol > 100.0 * cfg.tolerance) {
                res.status = solve_status::infeasible;
                res.message = "violation plateaued at " + std::to_string(best);
                break;
            }
        }
    }
    zmat.triangularView<Eigen::StrictlyLower>() = zmat.transpose();
    res.pe.moments = zmat;
    res.pe.residuals = audit(sys, zmat);
    if (res.status != solve_status::infeasible) {
        if (res.pe.residuals.passes(cfg.tolerance)) {
            res.status = solve_status::feasible;
        } else {
            res.status = solve_status::indeterminate;
            res.message = "iteration cap reached with violation " + std::to_string(res.pe.residuals.total());
        }
    }
    return res;
}

}  // namespace ampsdp

#include "ampsdp/sdp.hpp"

#include "ampsdp/error.hpp"

#include <cmath>
#include <sstream>

namespace ampsdp {

Eigen::VectorXd round_top_eigenvector(const Eigen::MatrixXd& m, double* top_eigenvalue)
{
    if (m.rows() < 1 || m.rows() != m.cols())
        throw input_error("round_top_eigenvector needs a nonempty square matrix");
    if (!m.allFinite())
        throw numerical_error("round_top_eigenvector: matrix has non-finite entries");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) {
        std::ostringstream os;
        os << "round_top_eigenvector: eigensolver failed (max |entry| " << m.cwiseAbs().maxCoeff() << ", dim "
           << m.rows() << ")";
        throw numerical_error(os.str());
    }
    // Eigenvalues ascend; among ties take the lowest-index column.
    const auto& lam = es.eigenvalues();
    const Eigen::Index last = lam.size() - 1;
    const double tie = 1e-12 * std::max(1.0, std::abs(lam[last]));
    Eigen::Index pick = last;
    while (pick > 0 && lam[last] - lam[pick - 1] <= tie)
        --pick;
    Eigen::VectorXd v = es.eigenvectors().col(pick).normalized();
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v[i]) > best + 1e-12) {
            best = std::abs(v[i]);
            arg = i;
        }
    if (v[arg] < 0.0)
        v = -v;
    if (top_eigenvalue)
        *top_eigenvalue = lam[last];
    return v;
}

double correlation(const Eigen::VectorXd& u, const Eigen::VectorXd& w)
{
    if (u.size() != w.size())
        throw input_error("correlation: dimension mismatch");
    const double nu = u.squaredNorm();
    const double nw = w.squaredNorm();
    if (nu == 0.0 || nw == 0.0)
        throw domain_error("correlation of a zero vector");
    const double ip = u.dot(w);
    return std::min(1.0, ip * ip / (nu * nw));
}

recovery_result recover(const constraint_system& sys, const solve_result& res,
                        const std::optional<Eigen::VectorXd>& reference)
{
    const Eigen::MatrixXd s = extract_second_moment(sys, res.pe);
    recovery_result r;
    r.v_lsh = round_top_eigenvector(s, &r.top_eigenvalue);
    r.trace = s.trace();
    if (reference)
        r.correlation = correlation(r.v_lsh, *reference);
    r.iterations = res.iterations;
    r.residual = res.pe.residuals.total();
    return r;
}

}  // namespace ampsdp

#include "ampsdp/sdp.hpp"

#include "ampsdp/error.hpp"

#include <json.hpp>

#include <cmath>

namespace ampsdp {

std::string to_string(solver_kind k)
{
    switch (k) {
    case solver_kind::automatic:
        return "automatic";
    case solver_kind::projection:
        return "projection";
    case solver_kind::factorized:
        return "factorized";
    }
    return "automatic";
}

solver_kind parse_solver_kind(const std::string& s)
{
    if (s == "automatic" || s == "auto")
        return solver_kind::automatic;
    if (s == "projection")
        return solver_kind::projection;
    if (s == "factorized")
        return solver_kind::factorized;
    throw config_error("unknown solver '" + s + "'");
}

std::string to_string(solve_status s)
{
    switch (s) {
    case solve_status::feasible:
        return "feasible";
    case solve_status::infeasible:
        return "infeasible";
    case solve_status::indeterminate:
        return "indeterminate";
    }
    return "indeterminate";
}

double residual_report::total() const
{
    return std::max({std::abs(pe_one - 1.0), -min_eigenvalue, max_violation, lmi_violation, 0.0});
}

bool residual_report::passes(double tol) const
{
    return total() <= tol;
}

namespace {

// Largest eigenvalue of sum_j M[g_j, g_j] minus the bound.
double lmi_excess(const gram_lmi& lmi, const Eigen::MatrixXd& m)
{
    const auto k = static_cast<Eigen::Index>(lmi.groups.empty() ? 0 : lmi.groups.front().size());
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(k, k);
    for (const auto& g : lmi.groups)
        for (Eigen::Index p = 0; p < k; ++p)
            for (Eigen::Index q = 0; q < k; ++q)
                l(p, q) += m(g[p], g[q]);
    if (k == 0)
        return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff() - lmi.bound;
}

void record(residual_report& r, const moment_constraint& c, double value)
{
    const double v = window_violation(value, c.lo, c.hi);
    auto& slot = r.by_tag[static_cast<int>(c.tag)];
    slot = std::max(slot, v);
    if (v > r.max_violation) {
        r.max_violation = v;
        r.worst = c.label;
    }
}

}  // namespace

residual_report audit(const constraint_system& sys, const Eigen::MatrixXd& m)
{
    const int dim = sys.moment_dim();
    if (m.rows() != dim || m.cols() != dim)
        throw input_error("audit: moment matrix has the wrong dimension");
    residual_report r;
    r.constants_ok = sys.constants_ok();
    r.pe_one = m(0, 0);
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    if (dim <= 2500) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            throw numerical_error("audit: eigensolver failed on the moment matrix");
        r.min_eigenvalue = es.eigenvalues().minCoeff();
    } else {
        // Bracket the minimum eigenvalue by Cholesky shifts.
        double shift = 1e-12 * std::max(1.0, sym.diagonal().maxCoeff());
        while (Eigen::LLT<Eigen::MatrixXd>(sym + shift * Eigen::MatrixXd::Identity(dim, dim)).info()
               != Eigen::Success)
            shift *= 10.0;
        r.min_eigenvalue = -shift;
    }
    for (const auto& c : sys.constraints)
        record(r, c, sys.evaluate(c, m));
    for (const auto& l : sys.lmis)
        r.lmi_violation = std::max(r.lmi_violation, lmi_excess(l, m));
    r.by_tag[static_cast<int>(constraint_tag::norm)] = std::max(r.by_tag[2], r.lmi_violation);
    return r;
}

residual_report audit_rank_one(const constraint_system& sys, const Eigen::VectorXd& m)
{
    if (m.size() != sys.moment_dim())
        throw input_error("audit: point has the wrong dimension");
    residual_report r;
    r.constants_ok = sys.constants_ok();
    r.pe_one = m[0] * m[0];
    for (const auto& c : sys.constraints)
        record(r, c, sys.evaluate_rank_one(c, m));
    for (const auto& l : sys.lmis) {
        const auto k = static_cast<Eigen::Index>(l.groups.empty() ? 0 : l.groups.front().size());
        Eigen::MatrixXd a(k, static_cast<Eigen::Index>(l.groups.size()));
        for (std::size_t j = 0; j < l.groups.size(); ++j)
            for (Eigen::Index p = 0; p < k; ++p)
                a(p, static_cast<Eigen::Index>(j)) = m[l.groups[j][p]];
        if (k > 0) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a * a.transpose(), Eigen::EigenvaluesOnly);
            r.lmi_violation = std::max(r.lmi_violation, es.eigenvalues().maxCoeff() - l.bound);
        }
    }
    r.by_tag[static_cast<int>(constraint_tag::norm)] = std::max(r.by_tag[2], r.lmi_violation);
    return r;
}

solve_result solve_feasibility(const constraint_system& sys, const solver_config& cfg)
{
    if (cfg.max_iters < 1)
        throw config_error("max_iters must be positive");
    if (!(cfg.tolerance > 0.0))
        throw config_error("tolerance must be positive");
    solver_kind kind = cfg.kind;
    if (kind == solver_kind::automatic)
        kind = (sys.lmis.empty() && sys.moment_dim() <= cfg.projection_dim_limit) ? solver_kind::projection
                                                                                  : solver_kind::factorized;
    return kind == solver_kind::projection ? solve_projection(sys, cfg) : solve_factorized(sys, cfg);
}

Eigen::MatrixXd extract_second_moment(const constraint_system& sys, const pseudo_expectation& pe)
{
    if (pe.moments.rows() != sys.moment_dim() || pe.moments.cols() != sys.moment_dim())
        throw input_error("pseudo-expectation does not match the constraint system");
    const int n = sys.n;
    Eigen::MatrixXd s(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            s(i, j) = pe.moments(sys.basis.v(i), sys.basis.v(j));
    return 0.5 * (s + s.transpose());
}

std::string to_json(const residual_report& r)
{
    nlohmann::json j = {{"pe_one", r.pe_one},
                        {"min_eigenvalue", r.min_eigenvalue},
                        {"max_violation", r.max_violation},
                        {"lmi_violation", r.lmi_violation},
                        {"worst", r.worst},
                        {"constants_ok", r.constants_ok},
                        {"by_tag",
                         {{"robust", r.by_tag[0]}, {"lsh", r.by_tag[1]}, {"norm", r.by_tag[2]},
                          {"plumbing", r.by_tag[3]}}}};
    return j.dump(1);
}

}  // namespace ampsdp

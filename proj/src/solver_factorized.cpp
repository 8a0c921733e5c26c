#include "ampsdp/sdp.hpp"

#include "ampsdp/error.hpp"
#include "ampsdp/rng.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace ampsdp {

namespace {

using rmat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Augmented Lagrangian of the windowed constraints and gram LMIs at M = V V^T.
class augmented_lagrangian {
public:
    augmented_lagrangian(const constraint_system& sys, int rank)
        : sys_(sys), rank_(rank), lambda_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.constraints.size())))
    {
        for (const auto& l : sys.lmis) {
            const auto k = static_cast<Eigen::Index>(l.groups.empty() ? 0 : l.groups.front().size());
            lmi_mult_.push_back(Eigen::MatrixXd::Zero(k, k));
        }
    }

    double rho = 10.0;

    double value(const rmat& v, rmat* grad)
    {
        project_forms(v);
        double f = 0.0;
        if (grad) {
            gf_.setZero(p_.rows(), rank_);
        }
        for (std::size_t k = 0; k < sys_.constraints.size(); ++k) {
            const auto& c = sys_.constraints[k];
            const double s = constraint_value(c) + lambda_[static_cast<Eigen::Index>(k)] / rho;
            const double d = s - std::clamp(s, c.lo, c.hi);
            if (d == 0.0)
                continue;
            f += 0.5 * rho * d * d;
            if (grad) {
                const double g = rho * d;
                for (const auto& t : c.terms) {
                    gf_.row(t.u) += g * t.coef * p_.row(t.w);
                    gf_.row(t.w) += g * t.coef * p_.row(t.u);
                }
            }
        }
        if (grad) {
            grad->setZero(v.rows(), v.cols());
            for (std::size_t fi = 0; fi < sys_.forms.size(); ++fi) {
                if (gf_.row(static_cast<Eigen::Index>(fi)).isZero(0.0))
                    continue;
                for (const auto& [k, c] : sys_.forms[fi])
                    grad->row(k) += c * gf_.row(static_cast<Eigen::Index>(fi));
            }
        }
        for (std::size_t li = 0; li < sys_.lmis.size(); ++li) {
            const auto& l = sys_.lmis[li];
            Eigen::MatrixXd gram = lmi_matrix(l, v);
            gram.diagonal().array() -= l.bound;
            gram += lmi_mult_[li] / rho;
            const Eigen::MatrixXd pos = positive_part(gram);
            f += 0.5 * rho * pos.squaredNorm();
            if (grad && !pos.isZero(0.0)) {
                const Eigen::MatrixXd gm = 2.0 * rho * pos;
                for (const auto& g : l.groups) {
                    rmat a(static_cast<Eigen::Index>(g.size()), rank_);
                    for (std::size_t p = 0; p < g.size(); ++p)
                        a.row(static_cast<Eigen::Index>(p)) = v.row(g[p]);
                    const rmat ga = gm * a;
                    for (std::size_t p = 0; p < g.size(); ++p)
                        grad->row(g[p]) += ga.row(static_cast<Eigen::Index>(p));
                }
            }
        }
        return f;
    }

    // Largest constraint violation at lambda = 0.
    double violation(const rmat& v)
    {
        project_forms(v);
        double viol = 0.0;
        for (const auto& c : sys_.constraints)
            viol = std::max(viol, window_violation(constraint_value(c), c.lo, c.hi));
        for (const auto& l : sys_.lmis) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lmi_matrix(l, v), Eigen::EigenvaluesOnly);
            viol = std::max(viol, es.eigenvalues().maxCoeff() - l.bound);
        }
        return viol;
    }

    void update_multipliers(const rmat& v)
    {
        project_forms(v);
        for (std::size_t k = 0; k < sys_.constraints.size(); ++k) {
            const auto& c = sys_.constraints[k];
            auto& lam = lambda_[static_cast<Eigen::Index>(k)];
            const double s = constraint_value(c) + lam / rho;
            lam = rho * (s - std::clamp(s, c.lo, c.hi));
        }
        for (std::size_t li = 0; li < sys_.lmis.size(); ++li) {
            const auto& l = sys_.lmis[li];
            Eigen::MatrixXd gram = lmi_matrix(l, v);
            gram.diagonal().array() -= l.bound;
            lmi_mult_[li] = rho * positive_part(gram + lmi_mult_[li] / rho);
        }
    }

private:
    void project_forms(const rmat& v)
    {
        p_.setZero(static_cast<Eigen::Index>(sys_.forms.size()), rank_);
        for (std::size_t fi = 0; fi < sys_.forms.size(); ++fi)
            for (const auto& [k, c] : sys_.forms[fi])
                p_.row(static_cast<Eigen::Index>(fi)) += c * v.row(k);
    }

    double constraint_value(const moment_constraint& c) const
    {
        double s = 0.0;
        for (const auto& t : c.terms)
            s += t.coef * p_.row(t.u).dot(p_.row(t.w));
        return s;
    }

    Eigen::MatrixXd lmi_matrix(const gram_lmi& l, const rmat& v) const
    {
        const auto k = static_cast<Eigen::Index>(l.groups.empty() ? 0 : l.groups.front().size());
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
        for (const auto& g : l.groups) {
            rmat a(k, rank_);
            for (Eigen::Index p = 0; p < k; ++p)
                a.row(p) = v.row(g[p]);
            gram.noalias() += a * a.transpose();
        }
        return gram;
    }

    static Eigen::MatrixXd positive_part(const Eigen::MatrixXd& s)
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
        const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
        return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    }

    const constraint_system& sys_;
    int rank_;
    Eigen::VectorXd lambda_;
    std::vector<Eigen::MatrixXd> lmi_mult_;
    rmat p_, gf_;
};

// Limited-memory BFGS with backtracking; returns the number of iterations used.
long lbfgs(augmented_lagrangian& fn, rmat& v, long max_iters, double grad_tol)
{
    constexpr int memory = 10;
    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> hist;
    rmat g;
    double f = fn.value(v, &g);
    Eigen::Map<Eigen::VectorXd> xv(v.data(), v.size());
    long it = 0;
    for (; it < max_iters; ++it) {
        Eigen::Map<const Eigen::VectorXd> gv(g.data(), g.size());
        if (gv.lpNorm<Eigen::Infinity>() <= grad_tol)
            break;
        Eigen::VectorXd q = gv;
        std::vector<double> alpha(hist.size());
        for (int i = static_cast<int>(hist.size()) - 1; i >= 0; --i) {
            const auto& [s, y] = hist[static_cast<std::size_t>(i)];
            alpha[static_cast<std::size_t>(i)] = s.dot(q) / y.dot(s);
            q -= alpha[static_cast<std::size_t>(i)] * y;
        }
        if (!hist.empty()) {
            const auto& [s, y] = hist.back();
            q *= s.dot(y) / y.squaredNorm();
        } else {
            q /= std::max(1.0, gv.norm());
        }
        for (std::size_t i = 0; i < hist.size(); ++i) {
            const auto& [s, y] = hist[i];
            q += s * (alpha[i] - y.dot(q) / y.dot(s));
        }
        Eigen::VectorXd dir = -q;
        double slope = gv.dot(dir);
        if (!(slope < 0.0)) {
            hist.clear();
            dir = -gv / std::max(1.0, gv.norm());
            slope = gv.dot(dir);
        }
        const Eigen::VectorXd x0 = xv;
        const Eigen::VectorXd g0 = gv;
        double step = 1.0;
        double fnew = f;
        rmat gnew;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            xv = x0 + step * dir;
            fnew = fn.value(v, &gnew);
            if (std::isfinite(fnew) && fnew <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            xv = x0;
            break;
        }
        Eigen::Map<const Eigen::VectorXd> gnv(gnew.data(), gnew.size());
        Eigen::VectorXd s = xv - x0;
        Eigen::VectorXd y = gnv - g0;
        if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
            hist.emplace_back(std::move(s), std::move(y));
            if (hist.size() > memory)
                hist.pop_front();
        }
        const double prev = f;
        f = fnew;
        g = std::move(gnew);
        if (prev - f <= 1e-15 * std::max(1.0, std::abs(prev)))
            break;
    }
    return it;
}

}  // namespace

solve_result solve_factorized(const constraint_system& sys, const solver_config& cfg)
{
    const int dim = sys.moment_dim();
    const int rank = std::max(1, std::min(cfg.rank, dim));
    rmat v(dim, rank);
    rng_stream rs(keyed_rng(cfg.seed).derive(0x5d).key());
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = 0; j < v.cols(); ++j)
            v(i, j) = 1e-2 * rs.normal() / std::sqrt(static_cast<double>(dim));
    if (cfg.init) {
        if (cfg.init->size() != dim)
            throw input_error("solver init has the wrong dimension");
        v.col(0) = *cfg.init;
    } else {
        v(0, 0) = 1.0;
    }

    augmented_lagrangian al(sys, rank);
    solve_result res;
    res.solver = "factorized";
    double prev = al.violation(v);
    double best = prev;
    int stalled = 0;
    constexpr double rho_max = 1e8;
    while (res.iterations < cfg.max_iters) {
        const double grad_tol = std::max(1e-10, 1e-2 * cfg.tolerance);
        res.iterations += 1 + lbfgs(al, v, std::min<long>(500, cfg.max_iters - res.iterations), grad_tol);
        const double viol = al.violation(v);
        res.trace.push_back(viol);
        if (viol <= 0.5 * cfg.tolerance)
            break;
        al.update_multipliers(v);
        if (viol > 0.25 * prev)
            al.rho = std::min(al.rho * 4.0, rho_max);
        if (viol < 0.99 * best) {
            best = viol;
            stalled = 0;
        } else if (++stalled >= 8 && al.rho >= rho_max && viol > 100.0 * cfg.tolerance) {
            res.status = solve_status::infeasible;
            res.message = "violation plateaued at " + std::to_string(best);
            break;
        }
        prev = viol;
    }
    res.pe.moments = Eigen::MatrixXd(v) * Eigen::MatrixXd(v).transpose();
    res.pe.moments.triangularView<Eigen::StrictlyLower>() = res.pe.moments.transpose();
    res.pe.residuals = audit(sys, res.pe.moments);
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

#include "ampsdp/polyfit.hpp"

#include "ampsdp/error.hpp"
#include "ampsdp/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>

namespace ampsdp {

namespace {

// All exponent vectors over `vars` variables with total degree <= d, by degree then lexicographically.
std::vector<std::vector<int>> exponent_list(int vars, int d)
{
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(vars), 0);
    for (int total = 0; total <= d; ++total) {
        std::function<void(int, int)> rec = [&](int pos, int left) {
            if (pos == vars - 1) {
                cur[pos] = left;
                out.push_back(cur);
                return;
            }
            for (int e = left; e >= 0; --e) {
                cur[pos] = e;
                rec(pos + 1, left - e);
            }
        };
        if (vars == 0) {
            if (total == 0)
                out.push_back({});
            continue;
        }
        rec(0, total);
    }
    return out;
}

Eigen::MatrixXd gaussian_samples(const Eigen::MatrixXd& cov, long m, std::uint64_t seed)
{
    const auto k = cov.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::MatrixXd root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    rng_stream rs(seed);
    Eigen::MatrixXd z(m, k);
    for (long i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            z(i, j) = rs.normal();
    return z * root.transpose();
}

Eigen::MatrixXd design(const Eigen::MatrixXd& vals, const std::vector<std::vector<int>>& exps)
{
    Eigen::MatrixXd a(vals.rows(), static_cast<Eigen::Index>(exps.size()));
    for (std::size_t c = 0; c < exps.size(); ++c) {
        Eigen::VectorXd col = Eigen::VectorXd::Ones(vals.rows());
        for (std::size_t v = 0; v < exps[c].size(); ++v)
            for (int e = 0; e < exps[c][v]; ++e)
                col = col.cwiseProduct(vals.col(static_cast<Eigen::Index>(v)));
        a.col(static_cast<Eigen::Index>(c)) = col;
    }
    return a;
}

}  // namespace

denoiser poly_approx::as_denoiser() const
{
    bool last_only = true;
    for (const auto& m : terms)
        for (int j = 0; j < step; ++j)
            if (m.exps[j] > 0)
                last_only = false;
    if (last_only) {
        std::vector<double> coeffs(static_cast<std::size_t>(degree + 1), 0.0);
        for (const auto& m : terms)
            coeffs[static_cast<std::size_t>(m.exps[step])] += m.coef;
        return denoiser::polynomial(std::move(coeffs));
    }
    return denoiser::polynomial(terms);
}

poly_approx fit_denoiser_polynomial(const denoiser& f, int s, int degree, const Eigen::MatrixXd& cov,
                                    long mc_samples, std::uint64_t seed)
{
    if (degree < 0)
        throw input_error("polynomial degree must be non-negative");
    if (s < 0)
        throw input_error("step must be non-negative");
    if (cov.rows() != s || cov.cols() != s)
        throw input_error("covariance must be " + std::to_string(s) + " x " + std::to_string(s) + " for step "
                          + std::to_string(s));
    if (mc_samples < 2)
        throw input_error("fitting needs at least two samples");
    if (s > 0) {
        if (!cov.isApprox(cov.transpose(), 1e-12))
            throw input_error("covariance must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()))
            throw input_error("covariance must be positive semidefinite");
    }
    f.validate(s);

    poly_approx out;
    out.step = s;
    out.requested_degree = degree;
    out.covariance = cov;
    out.mc_samples = mc_samples;

    std::vector<int> vars;  // argument indices 1..s the denoiser depends on
    for (int j = 1; j <= s; ++j)
        if (f.depends_on(j, s))
            vars.push_back(j);

    const keyed_rng root(seed);
    auto draw = [&](std::uint64_t tag, Eigen::MatrixXd& args, Eigen::VectorXd& y) {
        const Eigen::MatrixXd g = s > 0 ? gaussian_samples(cov, mc_samples, root.derive(tag).key())
                                        : Eigen::MatrixXd(mc_samples, 0);
        args.resize(mc_samples, static_cast<Eigen::Index>(vars.size()));
        y.resize(mc_samples);
        std::vector<double> u(static_cast<std::size_t>(s + 1));
        u[0] = 1.0;
        for (long i = 0; i < mc_samples; ++i) {
            for (int j = 1; j <= s; ++j)
                u[j] = g(i, j - 1);
            for (std::size_t v = 0; v < vars.size(); ++v)
                args(i, static_cast<Eigen::Index>(v)) = u[vars[v]];
            y[i] = f.value(u.data(), s);
        }
    };
    Eigen::MatrixXd train, test;
    Eigen::VectorXd ytrain, ytest;
    draw(1, train, ytrain);
    draw(2, test, ytest);

    int d = vars.empty() ? 0 : degree;
    Eigen::VectorXd coef;
    std::vector<std::vector<int>> exps;
    while (true) {
        exps = exponent_list(static_cast<int>(vars.size()), d);
        const Eigen::MatrixXd a = design(train, exps);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        const Eigen::VectorXd rdiag = qr.matrixQR().diagonal().cwiseAbs();
        if (d > 0 && rdiag.minCoeff() < polyfit_condition_floor * rdiag.maxCoeff()) {
            out.warnings.push_back("ill-conditioned basis at degree " + std::to_string(d) + "; reducing to "
                                   + std::to_string(d - 1));
            --d;
            continue;
        }
        coef = qr.solve(ytrain);
        out.train_error = (a * coef - ytrain).squaredNorm() / static_cast<double>(mc_samples);
        break;
    }
    out.degree = d;
    const Eigen::VectorXd res = (design(test, exps) * coef - ytest).cwiseAbs2();
    out.l2_error = res.mean();
    const double var = (res.array() - out.l2_error).square().sum() / static_cast<double>(mc_samples - 1);
    out.l2_se = std::sqrt(var / static_cast<double>(mc_samples));
    for (std::size_t c = 0; c < exps.size(); ++c) {
        monomial m;
        m.coef = coef[static_cast<Eigen::Index>(c)];
        m.exps.assign(static_cast<std::size_t>(s + 1), 0);
        for (std::size_t v = 0; v < vars.size(); ++v)
            m.exps[vars[v]] = exps[c][v];
        out.terms.push_back(std::move(m));
    }
    if (!coef.allFinite())
        throw numerical_error("polynomial fit produced non-finite coefficients");
    return out;
}

double iterate_discrepancy(const symmetric_matrix& x, const denoiser_family& fam, const denoiser_family& approx, int t)
{
    const auto a = amp_run(x, fam, t);
    const auto b = amp_run(x, approx, t);
    return (a.x(t) - b.x(t)).norm() / std::sqrt(static_cast<double>(x.size()));
}

polyfit_family approximate_amp_with_polynomials(const denoiser_family& fam, int t, int degree_cap,
                                                const state_evolution_table& se, long mc_samples,
                                                std::uint64_t seed, const discrepancy_options& disc)
{
    if (t < 1 || fam.size() < t)
        throw input_error("family must define f^0..f^{t-1}");
    if (se.t < t || se.Q.rows() < t)
        throw input_error("state evolution table covers " + std::to_string(se.t) + " steps, need "
                          + std::to_string(t));
    polyfit_family out;
    if (fam.polynomial()) {
        out.family = fam;
        out.report.unchanged = true;
        out.report.step_errors.assign(static_cast<std::size_t>(t), 0.0);
        out.report.discrepancy.assign(static_cast<std::size_t>(disc.instances), 0.0);
        return out;
    }
    const Eigen::MatrixXd q = se.Q.topLeftCorner(t, t);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < 1.0 - 1e-9 || q.cwiseAbs().maxCoeff() > 2.0)
        out.report.warnings.push_back("state evolution covariance violates Q >= I or max |Q_ij| <= 2");

    out.family.label = fam.label + "@poly" + std::to_string(degree_cap);
    const keyed_rng root(seed);
    for (int s = 0; s < t; ++s) {
        auto fit = fit_denoiser_polynomial(fam[s], s, degree_cap, q.topLeftCorner(s, s), mc_samples,
                                           root.derive(static_cast<std::uint64_t>(s)).key());
        for (const auto& w : fit.warnings)
            out.report.warnings.push_back("step " + std::to_string(s) + ": " + w);
        out.report.step_errors.push_back(fit.l2_error);
        out.family.steps.push_back(fit.as_denoiser());
        out.fits.push_back(std::move(fit));
    }
    const ensemble_spec spec{disc.n, disc.fam, 1.0};
    const keyed_rng inst(disc.seed);
    for (int k = 0; k < disc.instances; ++k) {
        const auto x = sample_symmetric(spec, inst.derive(static_cast<std::uint64_t>(k)).key());
        out.report.discrepancy.push_back(iterate_discrepancy(x, fam, out.family, t));
    }
    return out;
}

polyfit_family search_polynomial_degree(const denoiser_family& fam, int t, int degree_cap, double delta,
                                        const state_evolution_table& se, long mc_samples, std::uint64_t seed,
                                        const discrepancy_options& disc)
{
    std::vector<std::pair<int, double>> curve;
    for (int d = 1;; d *= 2) {
        const int deg = std::min(d, degree_cap);
        auto res = approximate_amp_with_polynomials(fam, t, deg, se, mc_samples, seed, disc);
        double mean = 0.0;
        for (double x : res.report.discrepancy)
            mean += x;
        mean /= std::max<std::size_t>(1, res.report.discrepancy.size());
        curve.emplace_back(deg, mean);
        if (mean <= delta)
            return res;
        if (deg >= degree_cap)
            break;
    }
    std::string msg = "end-to-end discrepancy above " + std::to_string(delta) + " at degree cap "
                      + std::to_string(degree_cap) + ":";
    for (const auto& [d, e] : curve)
        msg += " " + std::to_string(d) + "->" + std::to_string(e);
    throw degree_insufficient_error(msg, curve);
}

std::string to_json(const poly_approx& p)
{
    nlohmann::json exps = nlohmann::json::array(), coefs = nlohmann::json::array();
    for (const auto& m : p.terms) {
        exps.push_back(m.exps);
        coefs.push_back(m.coef);
    }
    nlohmann::json cov = nlohmann::json::array();
    for (Eigen::Index i = 0; i < p.covariance.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < p.covariance.cols(); ++j)
            row.push_back(p.covariance(i, j));
        cov.push_back(row);
    }
    nlohmann::json j = {{"step", p.step},         {"degree", p.degree},     {"requested_degree", p.requested_degree},
                        {"exponents", exps},      {"coefficients", coefs},  {"covariance", cov},      {"l2_error", p.l2_error},
                        {"l2_se", p.l2_se},       {"train_error", p.train_error},
                        {"mc_samples", p.mc_samples}, {"warnings", p.warnings}};
    return j.dump(1);
}

}  // namespace ampsdp

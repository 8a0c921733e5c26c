#include "ampsdp/amp.hpp"

#include "ampsdp/error.hpp"

#include <cmath>
#include <string>

namespace ampsdp {

std::vector<Eigen::VectorXd> amp_trace::prefix(int s) const
{
    return {iterates.begin() + 1, iterates.begin() + s + 2};
}

namespace {

double mean(const Eigen::VectorXd& v)
{
    return v.size() ? v.sum() / static_cast<double>(v.size()) : 0.0;
}

void guard(const Eigen::VectorXd& x, int step)
{
    if (!x.allFinite())
        throw divergence_error(step, "non-finite iterate at step " + std::to_string(step));
    if (x.size() && x.lpNorm<Eigen::Infinity>() > divergence_bound)
        throw divergence_error(step, "iterate exceeded the divergence bound at step " + std::to_string(step));
}

}  // namespace

amp_trace amp_run(const symmetric_matrix& x, const denoiser_family& fam, int t, std::optional<double> mean_sq_norm)
{
    if (t < 1)
        throw input_error("amp_run requires t >= 1");
    if (fam.size() < t)
        throw input_error("denoiser family shorter than the requested number of steps");
    fam.validate();
    const int n = x.size();
    amp_trace tr;
    tr.n = n;
    tr.iterates.push_back(Eigen::VectorXd::Zero(n));
    tr.iterates.push_back(Eigen::VectorXd::Ones(n));

    std::vector<Eigen::VectorXd> f;  // f[s] = f^s(x^s..x^0)
    for (int s = 0; s < t; ++s) {
        const auto xs = tr.prefix(s);
        f.push_back(fam[s].apply(xs));
        guard(f.back(), s);
        Eigen::VectorXd next = x.multiply(f.back());
        std::vector<double> b(s, 0.0);
        for (int j = 1; j <= s; ++j) {
            if (!fam[s].depends_on(j, s))
                continue;
            b[j - 1] = mean(fam[s].partial(xs, j));
            next -= b[j - 1] * f[j - 1];
        }
        guard(next, s + 1);
        tr.onsager.push_back(std::move(b));
        tr.iterates.push_back(std::move(next));
    }
    if (mean_sq_norm) {
        if (!(*mean_sq_norm > 0))
            throw input_error("normalization target must be positive");
        tr.normalization = std::sqrt(*mean_sq_norm);
    }
    return tr;
}

double onsager_coeff(const amp_trace& trace, const denoiser_family& fam, int t, int j)
{
    if (t < 0 || t > trace.steps() || t >= fam.size())
        throw std::out_of_range("onsager_coeff: step outside the trace");
    if (j < 0 || j > t)
        throw std::out_of_range("onsager_coeff: argument index outside 0..t");
    return mean(fam[t].partial(trace.prefix(t), j));
}

Eigen::VectorXd denoised(const amp_trace& trace, const denoiser_family& fam, int s)
{
    if (s < 0 || s > trace.steps() || s >= fam.size())
        throw std::out_of_range("denoised: step outside the trace");
    return fam[s].apply(trace.prefix(s));
}

double recursion_residual(const symmetric_matrix& x, const amp_trace& trace, const denoiser_family& fam)
{
    double worst = 0.0;
    std::vector<Eigen::VectorXd> f;
    for (int s = 0; s < trace.steps(); ++s) {
        f.push_back(denoised(trace, fam, s));
        Eigen::VectorXd r = x.multiply(f.back());
        for (int j = 1; j <= s; ++j)
            r -= trace.onsager[s][j - 1] * f[j - 1];
        const double scale = trace.x(s + 1).norm();
        const double diff = (r - trace.x(s + 1)).norm();
        worst = std::max(worst, scale > 0 ? diff / scale : diff);
    }
    return worst;
}

std::string to_string(problem_kind k)
{
    return k == problem_kind::nnpca ? "nnpca" : "sk";
}

problem_kind parse_problem(const std::string& s)
{
    if (s == "nnpca")
        return problem_kind::nnpca;
    if (s == "sk")
        return problem_kind::sk;
    throw config_error("unknown problem kind '" + s + "'");
}

Eigen::VectorXd round_to_feasible(const Eigen::VectorXd& x, const problem_spec& prob)
{
    if (prob.kind == problem_kind::nnpca) {
        Eigen::VectorXd p = x.cwiseMax(0.0);
        const double norm = p.norm();
        if (!(norm > 0))
            throw domain_error("nnpca rounding of an entrywise nonpositive vector");
        return p / norm;
    }
    const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
    Eigen::VectorXd out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        out[i] = x[i] < 0.0 ? -s : s;
    return out;
}

double objective(const symmetric_matrix& x, const Eigen::VectorXd& v)
{
    if (v.size() != x.size())
        throw input_error("objective: dimension mismatch");
    // Neumaier-compensated sum of X_ii v_i^2 + 2 X_ij v_i v_j.
    double sum = 0.0, comp = 0.0;
    auto add = [&](double term) {
        const double t = sum + term;
        if (std::abs(sum) >= std::abs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
    };
    const int n = x.size();
    std::size_t k = 0;
    const auto& a = x.packed();
    for (int i = 0; i < n; ++i) {
        add(a[k++] * v[i] * v[i]);
        for (int j = i + 1; j < n; ++j)
            add(2.0 * a[k++] * v[i] * v[j]);
    }
    return sum + comp;
}

}  // namespace ampsdp

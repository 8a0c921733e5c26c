#include "ampsdp/denoiser.hpp"

#include "ampsdp/error.hpp"

#include <algorithm>
#include <cmath>

namespace ampsdp {

std::string to_string(denoiser_kind k)
{
    switch (k) {
    case denoiser_kind::polynomial: return "polynomial";
    case denoiser_kind::relu: return "relu";
    case denoiser_kind::tanh_scaled: return "tanh_scaled";
    case denoiser_kind::iamp_field: return "iamp_field";
    }
    return "polynomial";
}

std::string to_string(denoiser_arity a)
{
    return a == denoiser_arity::last_iterate_only ? "last_iterate_only" : "all_iterates";
}

denoiser denoiser::polynomial(std::vector<double> coeffs)
{
    denoiser d;
    d.coeffs = std::move(coeffs);
    return d;
}

denoiser denoiser::polynomial(std::vector<monomial> terms)
{
    denoiser d;
    d.arity = denoiser_arity::all_iterates;
    d.terms = std::move(terms);
    return d;
}

denoiser denoiser::relu()
{
    denoiser d;
    d.kind = denoiser_kind::relu;
    return d;
}

denoiser denoiser::tanh_scaled(double scale)
{
    denoiser d;
    d.kind = denoiser_kind::tanh_scaled;
    d.scale = scale;
    return d;
}

denoiser denoiser::tanh_scaled(double scale, std::vector<double> weights)
{
    denoiser d = tanh_scaled(scale);
    d.arity = denoiser_arity::all_iterates;
    d.weights = std::move(weights);
    return d;
}

denoiser denoiser::iamp_field(std::shared_ptr<const iamp_schedule> schedule, int step)
{
    denoiser d;
    d.kind = denoiser_kind::iamp_field;
    d.arity = denoiser_arity::all_iterates;
    d.schedule = std::move(schedule);
    d.step = step;
    return d;
}

double iamp_schedule::interp(const std::vector<double>& f, double x) const
{
    const double h = (hi - lo) / static_cast<double>(f.size() - 1);
    const double pos = (std::clamp(x, lo, hi) - lo) / h;
    const std::size_t i = std::min(static_cast<std::size_t>(pos), f.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return f[i] + frac * (f[i + 1] - f[i]);
}

double iamp_schedule::field(const double* u, int k, std::vector<double>* grad) const
{
    if (grad)
        grad->assign(k + 1, 0.0);
    if (k == 0)
        return 0.0;
    double z = std::sqrt(times[1]) * u[1];
    if (grad)
        (*grad)[1] = std::sqrt(times[1]);
    for (int l = 2; l <= k; ++l) {
        const double dt = times[l] - times[l - 1];
        const double root = std::sqrt(dt) / inc[l];
        const double g = gamma[l - 1] * dt;
        if (grad && g != 0.0) {
            const double chain = 1.0 + g * interp(dphi[l - 1], z);
            for (int j = 1; j < l; ++j)
                (*grad)[j] *= chain;
        }
        z += g * interp(phi[l - 1], z) + root * (u[l] - (l >= 3 ? u[l - 1] : 0.0));
        if (grad) {
            (*grad)[l] += root;
            if (l >= 3)
                (*grad)[l - 1] -= root;
        }
    }
    return z;
}

namespace {

double ipow(double x, int k)
{
    double r = 1.0;
    while (k > 0) {
        if (k & 1)
            r *= x;
        x *= x;
        k >>= 1;
    }
    return r;
}

double combo(const std::vector<double>& w, const double* u)
{
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j)
        acc += w[j] * u[j];
    return acc;
}

}  // namespace

double denoiser::value(const double* u, int s) const
{
    const double x = u[s];
    switch (kind) {
    case denoiser_kind::relu:
        return x > 0.0 ? x : 0.0;
    case denoiser_kind::tanh_scaled:
        return std::tanh(scale * (arity == denoiser_arity::all_iterates ? combo(weights, u) : x));
    case denoiser_kind::iamp_field:
        return schedule->interp(schedule->phi[step], schedule->field(u, step, nullptr));
    case denoiser_kind::polynomial:
        break;
    }
    if (arity == denoiser_arity::last_iterate_only) {
        double acc = 0.0;
        for (auto c = coeffs.rbegin(); c != coeffs.rend(); ++c)
            acc = acc * x + *c;
        return acc;
    }
    double acc = 0.0;
    for (const auto& m : terms) {
        double p = m.coef;
        for (std::size_t j = 0; j < m.exps.size(); ++j)
            if (m.exps[j])
                p *= ipow(u[j], m.exps[j]);
        acc += p;
    }
    return acc;
}

double denoiser::partial(const double* u, int s, int j) const
{
    if (j < 0 || j > s)
        throw std::out_of_range("derivative index outside 0..s");
    switch (kind) {
    case denoiser_kind::relu:
        return (j == s && u[s] > 0.0) ? 1.0 : 0.0;
    case denoiser_kind::tanh_scaled: {
        double w;
        double arg;
        if (arity == denoiser_arity::all_iterates) {
            w = j < static_cast<int>(weights.size()) ? weights[j] : 0.0;
            arg = combo(weights, u);
        } else {
            w = j == s ? 1.0 : 0.0;
            arg = u[s];
        }
        if (w == 0.0)
            return 0.0;
        const double th = std::tanh(scale * arg);
        return scale * w * (1.0 - th * th);
    }
    case denoiser_kind::iamp_field: {
        std::vector<double> grad;
        const double z = schedule->field(u, step, &grad);
        return grad[j] == 0.0 ? 0.0 : schedule->interp(schedule->dphi[step], z) * grad[j];
    }
    case denoiser_kind::polynomial:
        break;
    }
    if (arity == denoiser_arity::last_iterate_only) {
        if (j != s)
            return 0.0;
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 1;)
            acc = acc * u[s] + static_cast<double>(k) * coeffs[k];
        return acc;
    }
    double acc = 0.0;
    for (const auto& m : terms) {
        if (j >= static_cast<int>(m.exps.size()) || m.exps[j] == 0)
            continue;
        double p = m.coef * m.exps[j];
        for (std::size_t i = 0; i < m.exps.size(); ++i) {
            const int e = static_cast<int>(i) == j ? m.exps[i] - 1 : m.exps[i];
            if (e)
                p *= ipow(u[i], e);
        }
        acc += p;
    }
    return acc;
}

Eigen::VectorXd denoiser::apply(std::span<const Eigen::VectorXd> xs) const
{
    const int s = static_cast<int>(xs.size()) - 1;
    validate(s);
    const Eigen::Index n = xs[s].size();
    Eigen::VectorXd out(n);
    std::vector<double> u(s + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j <= s; ++j)
            u[j] = xs[j][i];
        out[i] = value(u.data(), s);
    }
    return out;
}

Eigen::VectorXd denoiser::partial(std::span<const Eigen::VectorXd> xs, int j) const
{
    const int s = static_cast<int>(xs.size()) - 1;
    validate(s);
    if (j < 0 || j > s)
        throw std::out_of_range("derivative index outside 0..s");
    const Eigen::Index n = xs[s].size();
    Eigen::VectorXd out(n);
    if (!depends_on(j, s)) {
        out.setZero();
        return out;
    }
    std::vector<double> u(s + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int k = 0; k <= s; ++k)
            u[k] = xs[k][i];
        out[i] = partial(u.data(), s, j);
    }
    return out;
}

int denoiser::degree() const
{
    if (kind != denoiser_kind::polynomial)
        return -1;
    if (arity == denoiser_arity::last_iterate_only) {
        int d = 0;
        for (std::size_t k = 0; k < coeffs.size(); ++k)
            if (coeffs[k] != 0.0)
                d = static_cast<int>(k);
        return d;
    }
    int d = 0;
    for (const auto& m : terms) {
        int e = 0;
        for (int x : m.exps)
            e += x;
        if (m.coef != 0.0)
            d = std::max(d, e);
    }
    return d;
}

bool denoiser::depends_on(int j, int s) const
{
    if (arity == denoiser_arity::last_iterate_only || kind == denoiser_kind::relu)
        return j == s;
    if (kind == denoiser_kind::tanh_scaled)
        return j < static_cast<int>(weights.size()) && weights[j] != 0.0;
    if (kind == denoiser_kind::iamp_field)
        return j >= 1 && j <= step;
    for (const auto& m : terms)
        if (j < static_cast<int>(m.exps.size()) && m.exps[j] > 0)
            return true;
    return false;
}

void denoiser::validate(int s) const
{
    if (kind == denoiser_kind::relu && arity != denoiser_arity::last_iterate_only)
        throw config_error("relu denoisers only support last_iterate_only arity");
    if (kind == denoiser_kind::tanh_scaled && arity == denoiser_arity::all_iterates
        && static_cast<int>(weights.size()) > s + 1)
        throw input_error("tanh_scaled weights reference a future iterate");
    if (kind == denoiser_kind::iamp_field) {
        if (!schedule || step < 0 || step >= static_cast<int>(schedule->phi.size()))
            throw config_error("iamp_field denoiser without a matching schedule");
        if (step > s)
            throw input_error("iamp_field step references a future iterate");
    }
    if (kind == denoiser_kind::polynomial && arity == denoiser_arity::all_iterates)
        for (const auto& m : terms) {
            if (static_cast<int>(m.exps.size()) > s + 1)
                throw input_error("polynomial term references a future iterate");
            for (int e : m.exps)
                if (e < 0)
                    throw input_error("negative exponent in polynomial denoiser");
        }
}

bool denoiser_family::polynomial() const
{
    return std::all_of(steps.begin(), steps.end(), [](const denoiser& d) { return d.is_polynomial(); });
}

int denoiser_family::max_poly_degree() const
{
    int k = 0;
    for (const auto& d : steps)
        k = std::max(k, d.degree());
    return k;
}

void denoiser_family::validate() const
{
    for (int s = 0; s < size(); ++s)
        steps[s].validate(s);
}

denoiser_family denoiser_family::repeat(const denoiser& f, int count, std::string label)
{
    denoiser_family fam;
    fam.steps.assign(count, f);
    fam.label = std::move(label);
    return fam;
}

}  // namespace ampsdp

#include "ampsdp/forest.hpp"

#include "ampsdp/error.hpp"

#include <cmath>
#include <map>

namespace ampsdp {

namespace {

void cap(const forest& f, const compile_options& opt)
{
    if (f.size() > opt.max_terms)
        throw resource_error("forest compilation exceeded " + std::to_string(opt.max_terms) + " terms");
}

// Symbolic derivative of a polynomial denoiser with respect to its j-th argument.
denoiser derivative(const denoiser& f, int s, int j)
{
    if (f.arity == denoiser_arity::last_iterate_only) {
        std::vector<double> c;
        if (j == s)
            for (std::size_t k = 1; k < f.coeffs.size(); ++k)
                c.push_back(static_cast<double>(k) * f.coeffs[k]);
        return denoiser::polynomial(std::move(c));
    }
    std::vector<monomial> terms;
    for (const auto& m : f.terms) {
        if (j >= static_cast<int>(m.exps.size()) || m.exps[j] == 0)
            continue;
        monomial d = m;
        d.coef *= m.exps[j];
        d.exps[j] -= 1;
        terms.push_back(std::move(d));
    }
    return denoiser::polynomial(std::move(terms));
}

class power_cache {
public:
    power_cache(const std::vector<forest>& args, const compile_options& opt) : args_(args), opt_(opt) {}

    const forest& power(int j, int e)
    {
        auto key = std::make_pair(j, e);
        auto it = cache_.find(key);
        if (it != cache_.end())
            return it->second;
        forest p = e == 0 ? forest::constant(1.0) : power(j, e - 1).hadamard(args_[j]);
        cap(p, opt_);
        return cache_.emplace(key, std::move(p)).first->second;
    }

private:
    const std::vector<forest>& args_;
    const compile_options& opt_;
    std::map<std::pair<int, int>, forest> cache_;
};

forest apply_polynomial(const denoiser& f, int s, power_cache& pw, const compile_options& opt)
{
    forest out;
    if (f.arity == denoiser_arity::last_iterate_only) {
        for (std::size_t k = 0; k < f.coeffs.size(); ++k)
            if (f.coeffs[k] != 0.0)
                out += f.coeffs[k] * pw.power(s, static_cast<int>(k));
    } else {
        for (const auto& m : f.terms) {
            forest term = forest::constant(m.coef);
            for (std::size_t j = 0; j < m.exps.size(); ++j)
                if (m.exps[j])
                    term = term.hadamard(pw.power(static_cast<int>(j), m.exps[j]));
            out += term;
            cap(out, opt);
        }
    }
    cap(out, opt);
    return out;
}

}  // namespace

compiled_amp compile_amp_iterates(const denoiser_family& fam, int t, const compile_options& opt)
{
    if (t < 0 || fam.size() < t)
        throw input_error("denoiser family shorter than the requested number of steps");
    for (int s = 0; s < t; ++s)
        if (!fam[s].is_polynomial())
            throw unsupported_error("forest compilation needs polynomial denoisers (step " + std::to_string(s) + ")");
    fam.validate();

    compiled_amp out;
    out.iterates.push_back(forest::constant(1.0));
    std::vector<forest> g;  // g[s] = f^s(x^s, ..., x^0) as a forest
    for (int s = 0; s < t; ++s) {
        power_cache pw(out.iterates, opt);
        g.push_back(apply_polynomial(fam[s], s, pw, opt));
        forest next = g.back().reroot();
        for (int j = 1; j <= s; ++j) {
            if (!fam[s].depends_on(j, s))
                continue;
            const forest b = apply_polynomial(derivative(fam[s], s, j), s, pw, opt).trunk();
            for (const auto& [l, c] : b.terms())
                out.max_abs_coef = std::max(out.max_abs_coef, std::abs(c));
            next -= b.hadamard(g[j - 1]);
            cap(next, opt);
        }
        out.max_abs_coef = std::max(out.max_abs_coef, next.max_abs_coef());
        out.iterates.push_back(std::move(next));
    }
    return out;
}

forest compile_amp_forest(const denoiser_family& fam, int t, const compile_options& opt)
{
    return compile_amp_iterates(fam, t, opt).iterates.at(t);
}

}  // namespace ampsdp

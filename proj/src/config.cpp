#include "ampsdp/harness.hpp"

#include "ampsdp/error.hpp"
#include "ampsdp/io.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

namespace ampsdp {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object())
        throw config_error(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k))
            throw config_error("unknown key " + (where.empty() ? k : where + "." + k));
}

template <class T>
void read(const json& j, const char* key, T& out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

json sk_json(const sk_iamp_options& o)
{
    return {{"steps", o.steps},       {"offset", o.offset},           {"drift_c", o.drift_c},
            {"drift_a", o.drift_a},   {"grid_points", o.grid_points}, {"quadrature_nodes", o.quadrature_nodes},
            {"mc_samples", o.mc_samples}, {"seed", o.seed}};
}

}  // namespace

denoiser_family denoiser_config::build(int t) const
{
    if (kind == "polynomial")
        return denoiser_family::repeat(denoiser::polynomial(coeffs), t + 1, describe());
    if (kind == "relu")
        return denoiser_family::repeat(denoiser::relu(), t + 1, "relu");
    if (kind == "tanh")
        return denoiser_family::repeat(denoiser::tanh_scaled(scale), t + 1, describe());
    if (kind == "sk_iamp")
        return make_sk_iamp_family(sk);
    throw config_error("unknown denoiser kind '" + kind + "'");
}

std::string denoiser_config::describe() const
{
    std::ostringstream os;
    os.precision(17);
    os << kind;
    if (kind == "polynomial") {
        os << "[";
        for (std::size_t k = 0; k < coeffs.size(); ++k)
            os << (k ? "," : "") << coeffs[k];
        os << "]";
    } else if (kind == "tanh") {
        os << "(" << scale << ")";
    } else if (kind == "sk_iamp") {
        os << sk_json(sk).dump();
    }
    return os.str();
}

std::string experiment_config::cache_path() const
{
    return cache_dir.empty() ? (std::filesystem::path(output_dir) / "cache").string() : cache_dir;
}

experiment_config config_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    experiment_config c;
    try {
        check_keys(j, "", {"ensemble", "problem", "denoisers", "t", "corruption", "calibration", "lsh", "eta",
                           "seeds", "output_dir", "cache_dir", "workers", "dump_artifacts", "max_dense_entries"});
        if (j.contains("ensemble")) {
            const auto& e = j["ensemble"];
            check_keys(e, "ensemble", {"n", "family", "subgaussian_K"});
            read(e, "n", c.ensemble.n);
            if (e.contains("family"))
                c.ensemble.fam = parse_family(e["family"].get<std::string>());
            read(e, "subgaussian_K", c.ensemble.subgaussian_K);
        }
        if (j.contains("problem"))
            c.problem.kind = parse_problem(j["problem"].get<std::string>());
        if (j.contains("denoisers")) {
            const auto& d = j["denoisers"];
            check_keys(d, "denoisers", {"kind", "coeffs", "scale", "sk"});
            read(d, "kind", c.denoisers.kind);
            read(d, "coeffs", c.denoisers.coeffs);
            read(d, "scale", c.denoisers.scale);
            if (d.contains("sk")) {
                const auto& s = d["sk"];
                check_keys(s, "denoisers.sk", {"steps", "offset", "drift_c", "drift_a", "grid_points",
                                               "quadrature_nodes", "mc_samples", "seed"});
                auto& o = c.denoisers.sk;
                read(s, "steps", o.steps);
                read(s, "offset", o.offset);
                read(s, "drift_c", o.drift_c);
                read(s, "drift_a", o.drift_a);
                read(s, "grid_points", o.grid_points);
                read(s, "quadrature_nodes", o.quadrature_nodes);
                read(s, "mc_samples", o.mc_samples);
                read(s, "seed", o.seed);
            }
        }
        read(j, "t", c.t);
        if (j.contains("corruption")) {
            const auto& k = j["corruption"];
            check_keys(k, "corruption", {"epsilon", "adversary"});
            read(k, "epsilon", c.epsilon);
            if (k.contains("adversary"))
                c.adv = parse_adversary(k["adversary"].get<std::string>());
        }
        if (j.contains("calibration")) {
            const auto& k = j["calibration"];
            check_keys(k, "calibration", {"mc_samples", "seed", "rule", "window_z", "s_n", "C_K", "opnorm_bound",
                                          "max_skip_fraction", "enforce_se_rule", "use_cache"});
            auto& o = c.calibration.options;
            read(k, "mc_samples", c.calibration.mc_samples);
            read(k, "seed", c.calibration.seed);
            if (k.contains("rule"))
                o.rule = parse_slack_rule(k["rule"].get<std::string>());
            read(k, "window_z", o.window_z);
            read(k, "s_n", o.s_n);
            read(k, "C_K", o.C_K);
            read(k, "opnorm_bound", o.opnorm_bound);
            read(k, "max_skip_fraction", o.max_skip_fraction);
            read(k, "enforce_se_rule", o.enforce_se_rule);
            read(k, "use_cache", c.calibration.use_cache);
        }
        if (j.contains("lsh")) {
            const auto& k = j["lsh"];
            check_keys(k, "lsh", {"enabled", "mode", "degree", "pairs", "vectors", "caps", "opnorm", "opnorm_bound",
                                  "norm_window", "max_moment_dim", "solver", "max_iters", "tolerance", "rank",
                                  "robust_max_n"});
            auto& s = c.lsh.system;
            read(k, "enabled", c.lsh.enabled);
            if (k.contains("mode"))
                s.mode = parse_lsh_mode(k["mode"].get<std::string>());
            read(k, "degree", s.degree);
            read(k, "pairs", s.pairs);
            read(k, "vectors", s.vectors);
            read(k, "caps", s.caps);
            read(k, "opnorm", s.opnorm);
            read(k, "opnorm_bound", s.opnorm_bound);
            if (k.contains("norm_window") && !k["norm_window"].is_null())
                s.norm_window = k["norm_window"].get<double>();
            read(k, "max_moment_dim", s.max_moment_dim);
            if (k.contains("solver"))
                c.lsh.solver = parse_solver_kind(k["solver"].get<std::string>());
            read(k, "max_iters", c.lsh.max_iters);
            read(k, "tolerance", c.lsh.tolerance);
            read(k, "rank", c.lsh.rank);
            read(k, "robust_max_n", c.lsh.robust_max_n);
        }
        read(j, "eta", c.eta);
        read(j, "seeds", c.seeds);
        read(j, "output_dir", c.output_dir);
        read(j, "cache_dir", c.cache_dir);
        read(j, "workers", c.workers);
        read(j, "dump_artifacts", c.dump_artifacts);
        read(j, "max_dense_entries", c.max_dense_entries);
    } catch (const json::exception& e) {
        throw config_error(std::string("config has a value of the wrong type: ") + e.what());
    } catch (const input_error& e) {
        throw config_error(e.what());
    }
    c.calibration.options.fam = c.ensemble.fam;
    c.calibration.options.subgaussian_K = c.ensemble.subgaussian_K;
    return c;
}

experiment_config load_config(const std::string& path) { return config_from_json(read_text(path)); }

std::string to_json(const experiment_config& c)
{
    const auto& o = c.calibration.options;
    const auto& s = c.lsh.system;
    json j;
    j["ensemble"] = {{"n", c.ensemble.n}, {"family", to_string(c.ensemble.fam)}, {"subgaussian_K", c.ensemble.subgaussian_K}};
    j["problem"] = to_string(c.problem.kind);
    j["denoisers"] = {{"kind", c.denoisers.kind}, {"coeffs", c.denoisers.coeffs}, {"scale", c.denoisers.scale},
                      {"sk", sk_json(c.denoisers.sk)}};
    j["t"] = c.t;
    j["corruption"] = {{"epsilon", c.epsilon}, {"adversary", to_string(c.adv)}};
    j["calibration"] = {{"mc_samples", c.calibration.mc_samples}, {"seed", c.calibration.seed},
                        {"rule", to_string(o.rule)},              {"window_z", o.window_z},
                        {"s_n", o.s_n},                           {"C_K", o.C_K},
                        {"opnorm_bound", o.opnorm_bound},         {"max_skip_fraction", o.max_skip_fraction},
                        {"enforce_se_rule", o.enforce_se_rule},   {"use_cache", c.calibration.use_cache}};
    j["lsh"] = {{"enabled", c.lsh.enabled},
                {"mode", to_string(s.mode)},
                {"degree", s.degree},
                {"pairs", s.pairs},
                {"vectors", s.vectors},
                {"caps", s.caps},
                {"opnorm", s.opnorm},
                {"opnorm_bound", s.opnorm_bound},
                {"norm_window", s.norm_window ? json(*s.norm_window) : json(nullptr)},
                {"max_moment_dim", s.max_moment_dim},
                {"solver", to_string(c.lsh.solver)},
                {"max_iters", c.lsh.max_iters},
                {"tolerance", c.lsh.tolerance},
                {"rank", c.lsh.rank},
                {"robust_max_n", c.lsh.robust_max_n}};
    j["eta"] = c.eta;
    j["seeds"] = c.seeds;
    j["output_dir"] = c.output_dir;
    j["cache_dir"] = c.cache_dir;
    j["workers"] = c.workers;
    j["dump_artifacts"] = c.dump_artifacts;
    j["max_dense_entries"] = c.max_dense_entries;
    return j.dump(2);
}

bool validation_result::resource_only() const
{
    if (violations.empty())
        return false;
    for (const auto& v : violations)
        if (!v.resource)
            return false;
    return true;
}

validation_result validate_config(const experiment_config& c)
{
    validation_result r;
    auto bad = [&r](std::string field, std::string msg, bool resource = false) {
        r.violations.push_back({std::move(field), std::move(msg), resource});
    };
    const int n = c.ensemble.n;
    if (n < 1)
        bad("ensemble.n", "ensemble.n ≥ 1");
    if (!(c.ensemble.subgaussian_K > 0.0))
        bad("ensemble.subgaussian_K", "ensemble.subgaussian_K > 0");
    if (n >= 1 && static_cast<double>(n) * n > static_cast<double>(c.max_dense_entries))
        bad("ensemble.n", "n^2 = " + std::to_string(static_cast<long long>(n) * n) + " exceeds max_dense_entries = "
                              + std::to_string(c.max_dense_entries), true);

    if (c.t < 1)
        bad("t", "t ≥ 1");
    const auto& d = c.denoisers;
    if (d.kind == "polynomial") {
        if (d.coeffs.empty())
            bad("denoisers.coeffs", "polynomial denoiser needs at least one coefficient");
        for (double x : d.coeffs)
            if (!std::isfinite(x))
                bad("denoisers.coeffs", "coefficients must be finite");
    } else if (d.kind == "tanh") {
        if (!std::isfinite(d.scale))
            bad("denoisers.scale", "tanh scale must be finite");
    } else if (d.kind == "sk_iamp") {
        if (d.sk.steps < 1)
            bad("denoisers.sk.steps", "denoisers.sk.steps ≥ 1");
        if (c.t > d.sk.steps + 1)
            bad("t", "t ≤ denoisers.sk.steps + 1 for the sk_iamp family");
    } else if (d.kind != "relu") {
        bad("denoisers.kind", "unknown denoiser kind '" + d.kind + "' (polynomial, relu, tanh, sk_iamp)");
    }

    if (!(c.epsilon >= 0.0 && c.epsilon < 1.0))
        bad("corruption.epsilon", "corruption.epsilon ∈ [0, 1)");
    if (c.epsilon > 0.0 && c.adv == adversary::none)
        bad("corruption.adversary", "corruption.epsilon > 0 needs an adversary");
    if (n >= 1 && c.epsilon > 0.0 && c.epsilon < 1.0) {
        const double en = c.epsilon * n;
        if (std::abs(en - std::round(en)) > 1e-9)
            r.notes.push_back("epsilon * n = " + std::to_string(en) + " is not an integer; the corrupted minor has |S| = "
                              + std::to_string(corruption_size(c.epsilon, n)) + " rows");
    }
    if (c.adv == adversary::zero_rowsum && c.lsh.enabled && c.lsh.system.mode == lsh_mode::robust)
        r.notes.push_back("zero_rowsum contamination is not a principal-minor corruption; the robust program's "
                          "guarantees do not cover it");

    if (!(c.eta > 0.0 && c.eta < 1.0))
        bad("eta", "eta ∈ (0, 1)");
    if (c.seeds.empty())
        bad("seeds", "seeds must be non-empty");
    if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size())
        bad("seeds", "seeds must be distinct");
    if (c.workers < 1)
        bad("workers", "workers ≥ 1");
    if (c.output_dir.empty())
        bad("output_dir", "output_dir must be non-empty");

    if (c.lsh.enabled) {
        const auto& cal = c.calibration;
        if (cal.mc_samples < 2)
            bad("calibration.mc_samples", "calibration.mc_samples ≥ 2");
        if (!(cal.options.window_z > 0.0))
            bad("calibration.window_z", "calibration.window_z > 0");
        if (cal.options.s_n < 0.0)
            bad("calibration.s_n", "calibration.s_n ≥ 0 (0 selects log n)");
        if (!(cal.options.max_skip_fraction >= 0.0 && cal.options.max_skip_fraction < 1.0))
            bad("calibration.max_skip_fraction", "calibration.max_skip_fraction ∈ [0, 1)");

        const auto& s = c.lsh.system;
        if (s.degree < 1)
            bad("lsh.degree", "lsh.degree ≥ 1");
        if (s.degree > 3)
            bad("lsh.degree", "lsh.degree = " + std::to_string(s.degree) + " exceeds the supported cap 3", true);
        if (!(s.opnorm_bound > 0.0))
            bad("lsh.opnorm_bound", "lsh.opnorm_bound > 0");
        if (s.norm_window && !(*s.norm_window > 0.0))
            bad("lsh.norm_window", "lsh.norm_window > 0");
        if (!(c.lsh.tolerance > 0.0))
            bad("lsh.tolerance", "lsh.tolerance > 0");
        if (c.lsh.max_iters < 1)
            bad("lsh.max_iters", "lsh.max_iters ≥ 1");
        if (c.lsh.rank < 1)
            bad("lsh.rank", "lsh.rank ≥ 1");
        if (n >= 1) {
            const long long dim = s.mode == lsh_mode::robust
                                      ? 1 + 2LL * n + static_cast<long long>(n) * (n + 1) / 2
                                      : 1 + static_cast<long long>(n);
            if (s.mode == lsh_mode::robust && n > c.lsh.robust_max_n)
                bad("ensemble.n", "robust mode with n = " + std::to_string(n) + " exceeds the cap lsh.robust_max_n = "
                                      + std::to_string(c.lsh.robust_max_n), true);
            if (dim > s.max_moment_dim)
                bad("lsh.max_moment_dim", "moment dimension " + std::to_string(dim)
                                              + " exceeds the cap lsh.max_moment_dim = "
                                              + std::to_string(s.max_moment_dim), true);
        }
    }
    return r;
}

}  // namespace ampsdp

#include "ampsdp/calibration.hpp"

#include "ampsdp/error.hpp"
#include "ampsdp/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <iostream>

namespace ampsdp {

std::string to_string(slack_rule r)
{
    return r == slack_rule::formula ? "formula" : "variance_window";
}

slack_rule parse_slack_rule(const std::string& s)
{
    if (s == "formula")
        return slack_rule::formula;
    if (s == "variance_window")
        return slack_rule::variance_window;
    throw config_error("unknown slack rule '" + s + "'");
}

int statistics_table::index_of(const lumber& l) const
{
    for (std::size_t i = 0; i < lumber_list.size(); ++i)
        if (lumber_list[i] == l)
            return static_cast<int>(i);
    return -1;
}

double formula_slack(double eta, double s_n, int lumber_count)
{
    const double nl = static_cast<double>(lumber_count);
    return eta / (s_n * nl * nl);
}

double infinity_cap(int degree, double C_K, int n)
{
    return std::pow(5.0 * C_K * degree * std::log(static_cast<double>(n)), 2.0 * degree);
}

lumber_statistics measure_statistics(const std::vector<lumber>& list, const symmetric_matrix& x,
                                     const Eigen::VectorXd& v)
{
    const int n = x.size();
    if (v.size() != n)
        throw input_error("statistics: vector dimension does not match the matrix");
    tree_evaluator ev(x);
    Eigen::MatrixXd vals(n, static_cast<Eigen::Index>(list.size()));
    for (std::size_t a = 0; a < list.size(); ++a)
        vals.col(static_cast<Eigen::Index>(a)) = ev.lumber_value(list[a]);
    lumber_statistics s;
    s.pair = vals.transpose() * vals / static_cast<double>(n);
    s.vec = vals.transpose() * v / static_cast<double>(n);
    return s;
}

statistics_table calibrate_statistics(const denoiser_family& fam, int t, int d, const problem_spec& prob, int n,
                                      long mc_samples, std::uint64_t seed, double eta,
                                      const calibration_options& opt)
{
    if (mc_samples < 2)
        throw input_error("calibration needs at least two samples");
    if (!(eta > 0.0 && eta < 1.0))
        throw config_error("eta must lie in (0, 1)");
    const ensemble_spec spec{n, opt.fam, opt.subgaussian_K};
    spec.validate();

    statistics_table tab;
    tab.d = d;
    tab.n = n;
    tab.t = t;
    tab.family_label = fam.label;
    tab.problem = to_string(prob.kind);
    tab.lumber_list = enumerate_lumber(d);
    tab.eta = eta;
    tab.C_K = opt.C_K > 0 ? opt.C_K : 4.0 * opt.subgaussian_K * opt.subgaussian_K;
    tab.opnorm_bound = opt.opnorm_bound;
    tab.mc_samples = mc_samples;
    tab.seed = seed;
    tab.rule = to_string(opt.rule);
    for (int m = 1; m <= d; ++m)
        for (const auto& tr : enumerate_trees(m)) {
            tab.cap_trees.push_back(tr);
            tab.infinity_caps.push_back(infinity_cap(m, tab.C_K, n));
        }

    const auto L = static_cast<Eigen::Index>(tab.lumber_list.size());
    Eigen::MatrixXd psum = Eigen::MatrixXd::Zero(L, L), psq = psum;
    Eigen::VectorXd vsum = Eigen::VectorXd::Zero(L), vsq = vsum;
    double nsum = 0.0, nsq = 0.0;
    long used = 0;
    const keyed_rng root(seed);
    for (long m = 0; m < mc_samples; ++m) {
        const auto x = sample_symmetric(spec, root.derive(static_cast<std::uint64_t>(m)).key());
        amp_trace tr;
        try {
            tr = amp_run(x, fam, t);
        } catch (const divergence_error& e) {
            ++tab.skipped;
            std::clog << "calibration: sample " << m << " skipped (" << e.what() << ")\n";
            continue;
        }
        const Eigen::VectorXd& xt = tr.x(t);
        const auto s = measure_statistics(tab.lumber_list, x, xt);
        psum += s.pair;
        psq += s.pair.cwiseProduct(s.pair);
        vsum += s.vec;
        vsq += s.vec.cwiseProduct(s.vec);
        const double sq = xt.squaredNorm() / n;
        nsum += sq;
        nsq += sq * sq;
        ++used;
    }
    if (used < 2 || static_cast<double>(tab.skipped) > opt.max_skip_fraction * static_cast<double>(mc_samples))
        throw numerical_error("calibration failure: " + std::to_string(tab.skipped) + " of "
                              + std::to_string(mc_samples) + " samples diverged");

    const double k = static_cast<double>(used);
    auto sd = [k](double sum, double sq) {
        const double mean = sum / k;
        return std::sqrt(std::max(0.0, (sq - k * mean * mean) / (k - 1.0)));
    };
    const double norm_mean = nsum / k;
    if (!(norm_mean > 0.0))
        throw numerical_error("calibration: AMP output has zero norm");
    tab.normalization = std::sqrt(norm_mean);
    tab.norm_se = sd(nsum, nsq) / std::sqrt(k);

    tab.pair_stats = psum / k;
    tab.pair_sd.resize(L, L);
    for (Eigen::Index a = 0; a < L; ++a)
        for (Eigen::Index b = 0; b < L; ++b)
            tab.pair_sd(a, b) = sd(psum(a, b), psq(a, b));
    tab.pair_se = tab.pair_sd / std::sqrt(k);
    tab.vec_stats = vsum / k / tab.normalization;
    tab.vec_sd.resize(L);
    for (Eigen::Index a = 0; a < L; ++a)
        tab.vec_sd[a] = sd(vsum[a], vsq[a]) / tab.normalization;
    tab.vec_se = tab.vec_sd / std::sqrt(k);

    if (opt.rule == slack_rule::formula) {
        tab.s_n = opt.s_n > 0 ? opt.s_n : std::log(static_cast<double>(n));
        tab.c_slack = formula_slack(eta, tab.s_n, static_cast<int>(L));
        tab.pair_window = Eigen::MatrixXd::Constant(L, L, tab.c_slack);
        tab.vec_window = Eigen::VectorXd::Constant(L, tab.c_slack);
    } else {
        tab.pair_window = opt.window_z * tab.pair_sd;
        tab.vec_window = opt.window_z * tab.vec_sd;
        tab.c_slack = std::max(tab.pair_window.maxCoeff(), tab.vec_window.maxCoeff());
    }
    if (opt.enforce_se_rule) {
        for (Eigen::Index a = 0; a < L; ++a) {
            for (Eigen::Index b = 0; b < L; ++b)
                if (tab.pair_se(a, b) > tab.pair_window(a, b) / 4.0)
                    throw numerical_error("calibration standard error " + std::to_string(tab.pair_se(a, b))
                                          + " of pair " + describe(tab.lumber_list[a]) + " / "
                                          + describe(tab.lumber_list[b]) + " exceeds its window / 4 = "
                                          + std::to_string(tab.pair_window(a, b) / 4.0));
            if (tab.vec_se[a] > tab.vec_window[a] / 4.0)
                throw numerical_error("calibration standard error " + std::to_string(tab.vec_se[a]) + " of vec "
                                      + describe(tab.lumber_list[a]) + " exceeds its window / 4 = "
                                      + std::to_string(tab.vec_window[a] / 4.0));
        }
    }
    return tab;
}

reasonableness reasonableness_report(const symmetric_matrix& x, const Eigen::VectorXd& v_amp,
                                     const statistics_table& stats)
{
    const int n = x.size();
    if (n != stats.n || v_amp.size() != n)
        throw input_error("reasonableness: dimension mismatch");
    reasonableness r;
    const auto s = measure_statistics(stats.lumber_list, x, v_amp);
    const auto L = static_cast<Eigen::Index>(stats.lumber_list.size());
    r.stats_ok = true;
    auto consider = [&r](double dev, double window, std::string label) {
        if (dev > window)
            r.stats_ok = false;
        const double ratio = window > 0 ? dev / window : (dev > 0 ? HUGE_VAL : 0.0);
        if (ratio > r.worst_stat_ratio) {
            r.worst_stat_ratio = ratio;
            r.worst_stat_deviation = dev;
            r.worst_stat = std::move(label);
        }
    };
    for (Eigen::Index a = 0; a < L; ++a) {
        for (Eigen::Index b = a; b < L; ++b)
            consider(std::abs(s.pair(a, b) - stats.pair_stats(a, b)), stats.pair_window(a, b),
                     "pair " + describe(stats.lumber_list[a]) + " / " + describe(stats.lumber_list[b]));
        consider(std::abs(s.vec[a] - stats.vec_stats[a]), stats.vec_window[a], "vec " + describe(stats.lumber_list[a]));
    }

    r.norm_value = v_amp.squaredNorm() / n;
    r.norm_ok = std::abs(r.norm_value - 1.0) <= stats.norm_window();

    tree_evaluator ev(x);
    for (std::size_t k = 0; k < stats.cap_trees.size(); ++k) {
        const double inf = ev.tree_value(stats.cap_trees[k]).lpNorm<Eigen::Infinity>();
        r.worst_cap_ratio = std::max(r.worst_cap_ratio, std::pow(inf, 4) / stats.infinity_caps[k]);
    }
    r.caps_ok = r.worst_cap_ratio <= 1.0;

    const double op = x.operator_norm();
    r.opnorm_sq = op * op;
    r.opnorm_ok = r.opnorm_sq <= stats.opnorm_bound;
    r.pass = r.stats_ok && r.norm_ok && r.caps_ok && r.opnorm_ok;
    return r;
}

namespace {

using nlohmann::json;

json matrix_json(const Eigen::MatrixXd& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const json& j)
{
    const auto r = static_cast<Eigen::Index>(j.size());
    const auto c = r ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index k = 0; k < c; ++k)
            m(i, k) = j[i][k].get<double>();
    return m;
}

json vector_json(const Eigen::VectorXd& v)
{
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from(const json& j)
{
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string to_json(const statistics_table& s)
{
    json lumber_list = json::array();
    for (const auto& l : s.lumber_list) {
        json trunks = json::array();
        for (const auto& t : l.trunks)
            trunks.push_back(json::parse(to_json(t)));
        lumber_list.push_back({{"base", json::parse(to_json(l.base))}, {"trunks", trunks}, {"label", describe(l)}});
    }
    json caps = json::array();
    for (std::size_t k = 0; k < s.cap_trees.size(); ++k)
        caps.push_back({{"tree", json::parse(to_json(s.cap_trees[k]))}, {"cap", s.infinity_caps[k]}});
    json j = {
        {"d", s.d}, {"n", s.n}, {"t", s.t}, {"family", s.family_label}, {"problem", s.problem},
        {"lumber_list", lumber_list},
        {"pair_stats", matrix_json(s.pair_stats)}, {"pair_se", matrix_json(s.pair_se)},
        {"pair_sd", matrix_json(s.pair_sd)},
        {"vec_stats", vector_json(s.vec_stats)}, {"vec_se", vector_json(s.vec_se)},
        {"vec_sd", vector_json(s.vec_sd)},
        {"pair_window", matrix_json(s.pair_window)}, {"vec_window", vector_json(s.vec_window)},
        {"eta", s.eta}, {"s_n", s.s_n}, {"c_slack", s.c_slack}, {"C_K", s.C_K},
        {"opnorm_bound", s.opnorm_bound}, {"infinity_caps", caps},
        {"normalization", s.normalization}, {"norm_se", s.norm_se},
        {"provenance", {{"seed", s.seed}, {"mc_samples", s.mc_samples}, {"skipped", s.skipped}, {"rule", s.rule}}},
    };
    return j.dump(1);
}

statistics_table statistics_from_json(const std::string& text)
{
    const json j = json::parse(text);
    statistics_table s;
    s.d = j.at("d");
    s.n = j.at("n");
    s.t = j.at("t");
    s.family_label = j.at("family");
    s.problem = j.at("problem");
    for (const auto& l : j.at("lumber_list")) {
        std::vector<tree> trunks;
        for (const auto& t : l.at("trunks"))
            trunks.push_back(tree_from_json(t.dump()));
        s.lumber_list.emplace_back(tree_from_json(l.at("base").dump()), std::move(trunks));
    }
    s.pair_stats = matrix_from(j.at("pair_stats"));
    s.pair_se = matrix_from(j.at("pair_se"));
    s.pair_sd = matrix_from(j.at("pair_sd"));
    s.vec_stats = vector_from(j.at("vec_stats"));
    s.vec_se = vector_from(j.at("vec_se"));
    s.vec_sd = vector_from(j.at("vec_sd"));
    s.pair_window = matrix_from(j.at("pair_window"));
    s.vec_window = vector_from(j.at("vec_window"));
    s.eta = j.at("eta");
    s.s_n = j.at("s_n");
    s.c_slack = j.at("c_slack");
    s.C_K = j.at("C_K");
    s.opnorm_bound = j.at("opnorm_bound");
    for (const auto& c : j.at("infinity_caps")) {
        s.cap_trees.push_back(tree_from_json(c.at("tree").dump()));
        s.infinity_caps.push_back(c.at("cap"));
    }
    s.normalization = j.at("normalization");
    s.norm_se = j.at("norm_se");
    const auto& p = j.at("provenance");
    s.seed = p.at("seed");
    s.mc_samples = p.at("mc_samples");
    s.skipped = p.at("skipped");
    s.rule = p.at("rule");
    return s;
}

}  // namespace ampsdp

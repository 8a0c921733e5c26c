#include "ampsdp/harness.hpp"

#include "ampsdp/error.hpp"
#include "ampsdp/io.hpp"
#include "ampsdp/rng.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace ampsdp {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json residual_json(const residual_report& r)
{
    return {{"pe_one", r.pe_one},
            {"min_eigenvalue", r.min_eigenvalue},
            {"max_violation", r.max_violation},
            {"lmi_violation", r.lmi_violation},
            {"total", r.total()},
            {"worst", r.worst},
            {"by_tag", {{"robust", r.by_tag[0]}, {"lsh", r.by_tag[1]}, {"norm", r.by_tag[2]}, {"plumbing", r.by_tag[3]}}},
            {"constants_ok", r.constants_ok}};
}

residual_report residual_from(const json& j)
{
    residual_report r;
    r.pe_one = j.at("pe_one").get<double>();
    r.min_eigenvalue = j.at("min_eigenvalue").get<double>();
    r.max_violation = j.at("max_violation").get<double>();
    r.lmi_violation = j.at("lmi_violation").get<double>();
    r.worst = j.at("worst").get<std::string>();
    const auto& t = j.at("by_tag");
    r.by_tag[0] = t.at("robust").get<double>();
    r.by_tag[1] = t.at("lsh").get<double>();
    r.by_tag[2] = t.at("norm").get<double>();
    r.by_tag[3] = t.at("plumbing").get<double>();
    r.constants_ok = j.at("constants_ok").get<bool>();
    return r;
}

json reason_json(const reasonableness& r)
{
    return {{"pass", r.pass},
            {"stats_ok", r.stats_ok},
            {"norm_ok", r.norm_ok},
            {"caps_ok", r.caps_ok},
            {"opnorm_ok", r.opnorm_ok},
            {"worst_stat", r.worst_stat},
            {"worst_stat_deviation", r.worst_stat_deviation},
            {"worst_stat_ratio", r.worst_stat_ratio},
            {"norm_value", r.norm_value},
            {"worst_cap_ratio", r.worst_cap_ratio},
            {"opnorm_sq", r.opnorm_sq}};
}

reasonableness reason_from(const json& j)
{
    reasonableness r;
    r.pass = j.at("pass").get<bool>();
    r.stats_ok = j.at("stats_ok").get<bool>();
    r.norm_ok = j.at("norm_ok").get<bool>();
    r.caps_ok = j.at("caps_ok").get<bool>();
    r.opnorm_ok = j.at("opnorm_ok").get<bool>();
    r.worst_stat = j.at("worst_stat").get<std::string>();
    r.worst_stat_deviation = j.at("worst_stat_deviation").get<double>();
    r.worst_stat_ratio = j.at("worst_stat_ratio").get<double>();
    r.norm_value = j.at("norm_value").get<double>();
    r.worst_cap_ratio = j.at("worst_cap_ratio").get<double>();
    r.opnorm_sq = j.at("opnorm_sq").get<double>();
    return r;
}

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

std::string seed_dir(const std::string& root, std::uint64_t seed)
{
    return (fs::path(root) / "artifacts" / ("seed_" + std::to_string(seed))).string();
}

std::string record_path(const std::string& root, std::uint64_t seed)
{
    return (fs::path(root) / "records" / ("seed_" + std::to_string(seed) + ".json")).string();
}

std::string statistics_file(const experiment_config& cfg, const std::string& key)
{
    return (fs::path(cfg.cache_path()) / ("stats_" + key + ".json")).string();
}

std::string statistics_key(const experiment_config& cfg)
{
    const auto& o = cfg.calibration.options;
    const json j = {{"ensemble", {cfg.ensemble.n, to_string(cfg.ensemble.fam), cfg.ensemble.subgaussian_K}},
                    {"problem", to_string(cfg.problem.kind)},
                    {"denoisers", cfg.denoisers.describe()},
                    {"t", cfg.t},
                    {"degree", cfg.lsh.system.degree},
                    {"mc_samples", cfg.calibration.mc_samples},
                    {"seed", cfg.calibration.seed},
                    {"eta", cfg.eta},
                    {"rule", to_string(o.rule)},
                    {"window_z", o.window_z},
                    {"s_n", o.s_n},
                    {"C_K", o.C_K},
                    {"opnorm_bound", o.opnorm_bound},
                    {"max_skip_fraction", o.max_skip_fraction},
                    {"enforce_se_rule", o.enforce_se_rule}};
    return hex64(stable_hash(j.dump()));
}

// Better of the two signs of v after problem rounding; -inf when neither rounds.
double best_rounded_objective(const symmetric_matrix& x, const Eigen::VectorXd& v, const problem_spec& prob)
{
    double best = -std::numeric_limits<double>::infinity();
    for (double s : {1.0, -1.0}) {
        try {
            best = std::max(best, objective(x, round_to_feasible(s * v, prob)));
        } catch (const domain_error&) {
        }
    }
    return best;
}

long long count_changed(const symmetric_matrix& x, const symmetric_matrix& y)
{
    long long c = 0;
    for (int i = 0; i < x.size(); ++i)
        for (int j = i; j < x.size(); ++j)
            if (x(i, j) != y(i, j))
                c += i == j ? 1 : 2;
    return c;
}

class stopwatch {
public:
    double lap()
    {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

std::string to_json(const result_record& r)
{
    json j;
    j["schema_version"] = r.schema_version;
    j["seed"] = r.seed;
    j["ok"] = r.ok;
    j["failed_stage"] = r.failed_stage;
    j["failure_reason"] = r.failure_reason;
    j["n"] = r.n;
    j["t"] = r.t;
    j["epsilon"] = r.epsilon;
    j["adversary"] = r.adversary_name;
    j["support"] = r.support;
    j["entries_changed"] = r.entries_changed;
    j["amp_objective_x"] = r.amp_objective_x;
    j["amp_objective_y"] = r.amp_objective_y;
    j["correlation_raw"] = r.correlation_raw;
    j["lsh_run"] = r.lsh_run;
    if (r.lsh_run) {
        j["statistics_key"] = r.statistics_key;
        j["reasonableness"] = reason_json(r.reason);
        j["witness_residual"] = r.witness_residual;
        j["solve_status"] = r.solve_status;
        j["solver"] = r.solver;
        j["solver_iterations"] = r.solver_iterations;
        j["residuals"] = residual_json(r.residuals);
        j["correlation_lsh"] = r.correlation_lsh;
        j["lsh_objective_x"] = r.lsh_objective_x;
        j["top_eigenvalue"] = r.top_eigenvalue;
    }
    return j.dump(2) + "\n";
}

result_record record_from_json(const std::string& text)
{
    try {
        const json j = json::parse(text);
        result_record r;
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != result_schema_version)
            throw input_error("record schema version " + std::to_string(r.schema_version) + " is not supported");
        r.seed = j.at("seed").get<std::uint64_t>();
        r.ok = j.at("ok").get<bool>();
        r.failed_stage = j.at("failed_stage").get<std::string>();
        r.failure_reason = j.at("failure_reason").get<std::string>();
        r.n = j.at("n").get<int>();
        r.t = j.at("t").get<int>();
        r.epsilon = j.at("epsilon").get<double>();
        r.adversary_name = j.at("adversary").get<std::string>();
        r.support = j.at("support").get<std::vector<int>>();
        r.entries_changed = j.at("entries_changed").get<long long>();
        r.amp_objective_x = j.at("amp_objective_x").get<double>();
        r.amp_objective_y = j.at("amp_objective_y").get<double>();
        r.correlation_raw = j.at("correlation_raw").get<double>();
        r.lsh_run = j.at("lsh_run").get<bool>();
        if (r.lsh_run) {
            r.statistics_key = j.at("statistics_key").get<std::string>();
            r.reason = reason_from(j.at("reasonableness"));
            r.witness_residual = j.at("witness_residual").get<double>();
            r.solve_status = j.at("solve_status").get<std::string>();
            r.solver = j.at("solver").get<std::string>();
            r.solver_iterations = j.at("solver_iterations").get<long>();
            r.residuals = residual_from(j.at("residuals"));
            r.correlation_lsh = j.at("correlation_lsh").get<double>();
            r.lsh_objective_x = j.at("lsh_objective_x").get<double>();
            r.top_eigenvalue = j.at("top_eigenvalue").get<double>();
        }
        return r;
    } catch (const json::exception& e) {
        throw input_error(std::string("malformed result record: ") + e.what());
    }
}

std::string csv_header()
{
    return "schema_version,seed,ok,failed_stage,n,t,epsilon,adversary,support_size,entries_changed,"
           "amp_objective_x,amp_objective_y,correlation_raw,lsh_run,reasonable,stats_ok,norm_ok,caps_ok,opnorm_ok,"
           "norm_value,opnorm_sq,witness_residual,solve_status,solver,solver_iterations,pe_one,min_eigenvalue,"
           "max_violation,lmi_violation,residual_total,correlation_lsh,lsh_objective_x,top_eigenvalue,"
           "failure_reason\n";
}

std::string csv_row(const result_record& r)
{
    std::string s;
    auto add = [&s](const std::string& v) { s += v + ","; };
    add(std::to_string(r.schema_version));
    add(std::to_string(r.seed));
    add(r.ok ? "1" : "0");
    add(r.failed_stage);
    add(std::to_string(r.n));
    add(std::to_string(r.t));
    add(num(r.epsilon));
    add(r.adversary_name);
    add(std::to_string(r.support.size()));
    add(std::to_string(r.entries_changed));
    add(num(r.amp_objective_x));
    add(num(r.amp_objective_y));
    add(num(r.correlation_raw));
    add(r.lsh_run ? "1" : "0");
    if (r.lsh_run) {
        const auto& q = r.reason;
        for (bool b : {q.pass, q.stats_ok, q.norm_ok, q.caps_ok, q.opnorm_ok})
            add(b ? "1" : "0");
        add(num(q.norm_value));
        add(num(q.opnorm_sq));
        add(num(r.witness_residual));
        add(r.solve_status);
        add(r.solver);
        add(std::to_string(r.solver_iterations));
        for (double v : {r.residuals.pe_one, r.residuals.min_eigenvalue, r.residuals.max_violation,
                         r.residuals.lmi_violation, r.residuals.total(), r.correlation_lsh, r.lsh_objective_x,
                         r.top_eigenvalue})
            add(num(v));
    } else {
        s += std::string(19, ',');
    }
    return s + csv_quote(r.failure_reason) + "\n";
}

Eigen::VectorXd standard_init(const constraint_system& sys, const symmetric_matrix& y, const denoiser_family& fam,
                              int t)
{
    Eigen::VectorXd v0 = amp_run(y, fam, t).x(t);
    const double norm = v0.norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
        v0.setOnes();
    else
        v0 *= std::sqrt(static_cast<double>(y.size())) / norm;
    return witness_vector(sys, y, {}, v0);
}

statistics_table experiment_statistics(const experiment_config& cfg, std::string* key_out)
{
    const std::string key = statistics_key(cfg);
    if (key_out)
        *key_out = key;
    const std::string path = statistics_file(cfg, key);
    if (cfg.calibration.use_cache && fs::exists(path))
        return statistics_from_json(read_text(path));
    auto opt = cfg.calibration.options;
    opt.fam = cfg.ensemble.fam;
    opt.subgaussian_K = cfg.ensemble.subgaussian_K;
    auto tab = calibrate_statistics(cfg.denoisers.build(cfg.t), cfg.t, cfg.lsh.system.degree, cfg.problem,
                                    cfg.ensemble.n, cfg.calibration.mc_samples, cfg.calibration.seed, cfg.eta, opt);
    write_text(path, to_json(tab));
    return tab;
}

seed_inputs draw_seed_inputs(const experiment_config& cfg, std::uint64_t seed)
{
    const keyed_rng root(seed);
    seed_inputs in;
    in.x = sample_symmetric(cfg.ensemble, root.derive(1).key());
    const std::uint64_t cseed = root.derive(2).key();
    if (cfg.adv == adversary::zero_rowsum) {
        in.corruption = zero_rowsum_contamination(in.x, cseed);
    } else if (cfg.adv == adversary::none || cfg.epsilon == 0.0) {
        in.corruption.corrupted = in.x;
    } else {
        in.corruption = corrupt_minor(in.x, corruption_spec{cfg.epsilon, cfg.adv, cseed}, cfg.ensemble.fam);
    }
    return in;
}

result_record run_seed(const experiment_config& cfg, std::uint64_t seed, const statistics_table* stats,
                       const std::string& stats_key)
{
    result_record r;
    r.seed = seed;
    r.n = cfg.ensemble.n;
    r.t = cfg.t;
    r.epsilon = cfg.epsilon;
    r.adversary_name = to_string(cfg.adv);
    std::string stage = "sample";
    stopwatch sw;
    const std::string dir = seed_dir(cfg.output_dir, seed);
    try {
        const auto in = draw_seed_inputs(cfg, seed);
        const auto& x = in.x;
        const auto& y = in.corruption.corrupted;
        r.support = in.corruption.support;
        r.entries_changed = in.corruption.entries_changed;
        r.timings["sample"] = sw.lap();

        stage = "amp";
        const auto fam = cfg.denoisers.build(cfg.t);
        const auto trace_x = amp_run(x, fam, cfg.t);
        const auto trace_y = amp_run(y, fam, cfg.t);
        r.amp_objective_x = objective(x, round_to_feasible(trace_x.x(cfg.t), cfg.problem));
        r.amp_objective_y = objective(y, round_to_feasible(trace_y.x(cfg.t), cfg.problem));
        r.correlation_raw = correlation(trace_y.x(cfg.t), trace_x.x(cfg.t));
        r.timings["amp"] = sw.lap();
        if (cfg.dump_artifacts) {
            stage = "write";
            fs::create_directories(dir);
            save_symmat((fs::path(dir) / "x.symmat").string(), x);
            save_symmat((fs::path(dir) / "y.symmat").string(), y);
            write_text((fs::path(dir) / "trace_x.json").string(), to_json(trace_x));
            write_text((fs::path(dir) / "trace_y.json").string(), to_json(trace_y));
        }

        if (cfg.lsh.enabled) {
            if (!stats)
                throw input_error("the LSH stage needs a statistics table");
            r.lsh_run = true;
            r.statistics_key = stats_key;
            stage = "reasonableness";
            const Eigen::VectorXd v_amp = trace_x.x(cfg.t) / stats->normalization;
            r.reason = reasonableness_report(x, v_amp, *stats);

            stage = "build";
            const auto sys = build_constraint_system(y, cfg.epsilon, *stats, cfg.lsh.system);
            r.witness_residual = audit_rank_one(sys, witness_vector(sys, x, r.support, v_amp)).total();
            r.timings["build"] = sw.lap();

            stage = "solve";
            solver_config sc;
            sc.kind = cfg.lsh.solver;
            sc.max_iters = cfg.lsh.max_iters;
            sc.tolerance = cfg.lsh.tolerance;
            sc.rank = cfg.lsh.rank;
            sc.seed = seed;
            if (cfg.lsh.system.mode == lsh_mode::robust)
                sc.init = standard_init(sys, y, fam, cfg.t);
            const auto res = solve_feasibility(sys, sc);
            r.solve_status = to_string(res.status);
            r.solver = res.solver;
            r.solver_iterations = res.iterations;
            r.residuals = res.pe.residuals;
            r.timings["solve"] = sw.lap();

            stage = "round";
            const auto rec = recover(sys, res, v_amp);
            r.correlation_lsh = rec.correlation.value_or(0.0);
            r.top_eigenvalue = rec.top_eigenvalue;
            r.lsh_objective_x = best_rounded_objective(x, rec.v_lsh, cfg.problem);
            r.timings["round"] = sw.lap();
            if (cfg.dump_artifacts) {
                stage = "write";
                save_moments((fs::path(dir) / "moments.symmat").string(), res.pe.moments);
            }
        }
    } catch (const std::exception& e) {
        r.ok = false;
        r.failed_stage = stage;
        r.failure_reason = e.what();
    }
    r.timings["total"] = 0.0;
    for (const auto& [k, v] : r.timings)
        if (k != "total")
            r.timings["total"] += v;
    return r;
}

experiment_result run_experiment(const experiment_config& cfg)
{
    experiment_result out;
    out.validation = validate_config(cfg);
    if (!out.validation.ok()) {
        std::string msg = "invalid config:";
        for (const auto& v : out.validation.violations)
            msg += " " + v.message + ";";
        if (out.validation.resource_only())
            throw resource_error(msg);
        throw config_error(msg);
    }
    fs::create_directories(fs::path(cfg.output_dir) / "records");
    write_text((fs::path(cfg.output_dir) / "config.json").string(), to_json(cfg) + "\n");

    std::optional<statistics_table> stats;
    std::string key;
    if (cfg.lsh.enabled)
        stats = experiment_statistics(cfg, &key);

    const std::size_t count = cfg.seeds.size();
    out.records.resize(count);
    std::vector<char> done(count, 0);
    std::size_t next_row = 0;
    std::mutex mu;
    std::ofstream csv(fs::path(cfg.output_dir) / "results.csv", std::ios::trunc);
    std::ofstream timings(fs::path(cfg.output_dir) / "timings.csv", std::ios::trunc);
    if (!csv || !timings)
        throw input_error("cannot write results into " + cfg.output_dir);
    csv << csv_header();
    timings << "seed,stage,seconds\n";

    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (std::size_t i = cursor++; i < count; i = cursor++) {
            const auto seed = cfg.seeds[i];
            auto rec = run_seed(cfg, seed, stats ? &*stats : nullptr, key);
            write_text(record_path(cfg.output_dir, seed), to_json(rec));
            std::lock_guard lock(mu);
            out.records[i] = std::move(rec);
            done[i] = 1;
            // Rows are appended in seed-list order regardless of completion order.
            for (; next_row < count && done[next_row]; ++next_row) {
                const auto& r = out.records[next_row];
                csv << csv_row(r) << std::flush;
                for (const auto& [stage, sec] : r.timings)
                    timings << r.seed << "," << stage << "," << num(sec) << "\n";
                timings.flush();
            }
        }
    };
    const int nw = std::max(1, std::min<int>(cfg.workers, static_cast<int>(count)));
    std::vector<std::thread> pool;
    for (int w = 1; w < nw; ++w)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();
    return out;
}

audit_result audit_experiment(const std::string& dir, double tol)
{
    const auto cfg_file = fs::path(dir) / "config.json";
    if (!fs::exists(cfg_file))
        throw input_error(dir + " has no config.json");
    auto cfg = load_config(cfg_file.string());
    cfg.output_dir = dir;
    const auto fam = cfg.denoisers.build(cfg.t);

    audit_result res;
    std::vector<fs::path> files;
    if (fs::exists(fs::path(dir) / "records"))
        for (const auto& e : fs::directory_iterator(fs::path(dir) / "records"))
            if (e.path().extension() == ".json")
                files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const auto r = record_from_json(read_text(f.string()));
        if (!r.ok) {
            res.skipped.push_back("seed " + std::to_string(r.seed) + ": failed at " + r.failed_stage);
            continue;
        }
        const std::string sd = seed_dir(dir, r.seed);
        if (!fs::exists(fs::path(sd) / "trace_x.json")) {
            res.skipped.push_back("seed " + std::to_string(r.seed) + ": no artifacts");
            continue;
        }
        ++res.records_checked;
        auto cmp = [&](const std::string& field, double rec, double now) {
            const double scale = std::max({1.0, std::abs(rec), std::abs(now)});
            if (!(std::abs(rec - now) <= tol * scale))
                res.mismatches.push_back({r.seed, field, rec, now});
        };
        const auto x = load_symmat((fs::path(sd) / "x.symmat").string());
        const auto y = load_symmat((fs::path(sd) / "y.symmat").string());
        const auto tx = trace_from_json(read_text((fs::path(sd) / "trace_x.json").string()));
        const auto ty = trace_from_json(read_text((fs::path(sd) / "trace_y.json").string()));
        cmp("trace_x.recursion", 0.0, recursion_residual(x, tx, fam) > 1e-8 ? 1.0 : 0.0);
        cmp("trace_y.recursion", 0.0, recursion_residual(y, ty, fam) > 1e-8 ? 1.0 : 0.0);
        cmp("entries_changed", static_cast<double>(r.entries_changed), static_cast<double>(count_changed(x, y)));
        cmp("amp_objective_x", r.amp_objective_x, objective(x, round_to_feasible(tx.x(r.t), cfg.problem)));
        cmp("amp_objective_y", r.amp_objective_y, objective(y, round_to_feasible(ty.x(r.t), cfg.problem)));
        cmp("correlation_raw", r.correlation_raw, correlation(ty.x(r.t), tx.x(r.t)));
        if (!r.lsh_run)
            continue;
        const std::string stats_file = (fs::path(cfg.cache_path()) / ("stats_" + r.statistics_key + ".json")).string();
        if (!fs::exists(stats_file)) {
            res.skipped.push_back("seed " + std::to_string(r.seed) + ": statistics table " + r.statistics_key
                                  + " missing");
            continue;
        }
        const auto stats = statistics_from_json(read_text(stats_file));
        const Eigen::VectorXd v_amp = tx.x(r.t) / stats.normalization;
        const auto q = reasonableness_report(x, v_amp, stats);
        cmp("reasonableness.pass", r.reason.pass, q.pass);
        cmp("reasonableness.stats_ok", r.reason.stats_ok, q.stats_ok);
        cmp("reasonableness.norm_ok", r.reason.norm_ok, q.norm_ok);
        cmp("reasonableness.caps_ok", r.reason.caps_ok, q.caps_ok);
        cmp("reasonableness.opnorm_ok", r.reason.opnorm_ok, q.opnorm_ok);
        cmp("reasonableness.norm_value", r.reason.norm_value, q.norm_value);
        cmp("reasonableness.opnorm_sq", r.reason.opnorm_sq, q.opnorm_sq);
        cmp("reasonableness.worst_stat_ratio", r.reason.worst_stat_ratio, q.worst_stat_ratio);
        cmp("reasonableness.worst_cap_ratio", r.reason.worst_cap_ratio, q.worst_cap_ratio);
        const auto sys = build_constraint_system(y, r.epsilon, stats, cfg.lsh.system);
        cmp("witness_residual", r.witness_residual, audit_rank_one(sys, witness_vector(sys, x, r.support, v_amp)).total());
        const auto mpath = fs::path(sd) / "moments.symmat";
        if (!fs::exists(mpath)) {
            res.skipped.push_back("seed " + std::to_string(r.seed) + ": no moment matrix");
            continue;
        }
        pseudo_expectation pe;
        pe.moments = load_moments(mpath.string());
        const auto rr = audit(sys, pe.moments);
        cmp("residuals.pe_one", r.residuals.pe_one, rr.pe_one);
        cmp("residuals.min_eigenvalue", r.residuals.min_eigenvalue, rr.min_eigenvalue);
        cmp("residuals.max_violation", r.residuals.max_violation, rr.max_violation);
        cmp("residuals.lmi_violation", r.residuals.lmi_violation, rr.lmi_violation);
        double top = 0.0;
        const Eigen::VectorXd v_lsh = round_top_eigenvector(extract_second_moment(sys, pe), &top);
        cmp("top_eigenvalue", r.top_eigenvalue, top);
        cmp("correlation_lsh", r.correlation_lsh, correlation(v_lsh, v_amp));
        cmp("lsh_objective_x", r.lsh_objective_x, best_rounded_objective(x, v_lsh, cfg.problem));
    }
    return res;
}

}  // namespace ampsdp

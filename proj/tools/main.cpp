// Command-line front end: sample, corrupt, amp, se, calibrate, solve, round, experiment, audit.
#include "ampsdp/error.hpp"
#include "ampsdp/harness.hpp"
#include "ampsdp/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>

namespace {

using namespace ampsdp;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

enum exit_code { ok = 0, usage = 1, unsolved = 2, resource = 3 };

struct common_flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    std::optional<double> tolerance;
    std::optional<long> max_iters;
};

void add_common(CLI::App* app, common_flags& f)
{
    app->add_option("--config", f.config, "experiment config (JSON)");
    app->add_option("--seed", f.seed, "seed (u64)");
    app->add_option("--out", f.out, "output directory");
    app->add_option("--tolerance", f.tolerance, "solver / audit tolerance");
    app->add_option("--max-iters", f.max_iters, "solver iteration cap");
}

experiment_config base_config(const common_flags& f)
{
    experiment_config c = f.config.empty() ? experiment_config{} : load_config(f.config);
    if (f.tolerance)
        c.lsh.tolerance = *f.tolerance;
    if (f.max_iters)
        c.lsh.max_iters = *f.max_iters;
    return c;
}

std::string out_file(const common_flags& f, const std::string& name)
{
    fs::create_directories(f.out);
    return (fs::path(f.out) / name).string();
}

// Basis size n + 1 (non-robust) or 1 + 2n + n(n+1)/2 (robust).
constraint_system basis_for_dim(long dim, lsh_mode mode)
{
    constraint_system sys;
    sys.mode = mode;
    if (mode == lsh_mode::robust) {
        const double disc = std::sqrt(25.0 + 8.0 * static_cast<double>(dim - 1));
        const long nr = std::lround((disc - 5.0) / 2.0);
        if (nr < 1 || 1 + 2 * nr + nr * (nr + 1) / 2 != dim)
            throw input_error("moment dimension " + std::to_string(dim) + " is not a robust basis size");
        sys.n = static_cast<int>(nr);
    } else {
        if (dim < 2)
            throw input_error("moment dimension " + std::to_string(dim) + " is too small");
        sys.n = static_cast<int>(dim - 1);
    }
    sys.basis = monomial_basis(sys.n, mode == lsh_mode::robust);
    return sys;
}

int run(int argc, char** argv)
{
    CLI::App app{"AMP and local-statistics SDP toolkit"};
    app.require_subcommand(1);
    common_flags f;
    std::string input, stats_path, moments_path, reference;
    long se_samples = 100000;
    int n_override = 0;

    auto* sample = app.add_subcommand("sample", "draw a Wigner matrix X");
    auto* corrupt = app.add_subcommand("corrupt", "corrupt a principal minor of a matrix");
    auto* amp = app.add_subcommand("amp", "run AMP on a matrix");
    auto* se = app.add_subcommand("se", "state evolution covariance by Monte Carlo");
    auto* calibrate = app.add_subcommand("calibrate", "calibrate the local statistics table");
    auto* solve = app.add_subcommand("solve", "build and solve the LSH feasibility program");
    auto* round = app.add_subcommand("round", "round a moment matrix to v_LSH (basis mode from --config)");
    auto* experiment = app.add_subcommand("experiment", "run a configured multi-seed experiment");
    auto* audit_cmd = app.add_subcommand("audit", "re-derive an experiment's records from its artifacts");
    for (auto* s : {sample, corrupt, amp, se, calibrate, solve, round, experiment, audit_cmd})
        add_common(s, f);
    sample->add_option("--n", n_override, "matrix dimension (overrides the config)");
    corrupt->add_option("--input", input, "matrix file")->required();
    amp->add_option("--input", input, "matrix file")->required();
    se->add_option("--samples", se_samples, "Monte Carlo samples");
    solve->add_option("--input", input, "corrupted matrix Y")->required();
    solve->add_option("--stats", stats_path, "statistics table (JSON)")->required();
    round->add_option("--moments", moments_path, "moment matrix file")->required();
    round->add_option("--reference", reference, "reference trace or vector (JSON)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : usage;
    }

    if (sample->parsed()) {
        auto c = base_config(f);
        if (n_override > 0)
            c.ensemble.n = n_override;
        c.ensemble.validate();
        const auto x = sample_symmetric(c.ensemble, f.seed.value_or(1));
        const auto path = out_file(f, "x.symmat");
        save_symmat(path, x);
        std::cout << json{{"file", path}, {"n", x.size()}, {"family", to_string(c.ensemble.fam)}}.dump() << "\n";
        return ok;
    }
    if (corrupt->parsed()) {
        const auto c = base_config(f);
        const auto x = load_symmat(input);
        const std::uint64_t seed = f.seed.value_or(1);
        const auto rec = c.adv == adversary::zero_rowsum
                             ? zero_rowsum_contamination(x, seed)
                             : corrupt_minor(x, corruption_spec{c.epsilon, c.adv, seed}, c.ensemble.fam);
        save_symmat(out_file(f, "y.symmat"), rec.corrupted);
        const json j{{"support", rec.support},
                     {"entries_changed", rec.entries_changed},
                     {"strong_contamination", rec.strong_contamination},
                     {"warnings", rec.warnings}};
        write_text(out_file(f, "corruption.json"), j.dump(2) + "\n");
        std::cout << j.dump() << "\n";
        return ok;
    }
    if (amp->parsed()) {
        const auto c = base_config(f);
        const auto x = load_symmat(input);
        const auto tr = amp_run(x, c.denoisers.build(c.t), c.t);
        write_text(out_file(f, "trace.json"), to_json(tr));
        const double obj = objective(x, round_to_feasible(tr.x(c.t), c.problem));
        std::cout << json{{"t", c.t}, {"problem", to_string(c.problem.kind)}, {"objective", obj}}.dump() << "\n";
        return ok;
    }
    if (se->parsed()) {
        const auto c = base_config(f);
        const auto tab = state_evolution(c.denoisers.build(c.t), c.t, se_samples, f.seed.value_or(1));
        write_text(out_file(f, "se.json"), to_json(tab) + "\n");
        std::cout << to_json(tab) << "\n";
        return ok;
    }
    if (calibrate->parsed()) {
        auto c = base_config(f);
        if (f.seed)
            c.calibration.seed = *f.seed;
        c.calibration.use_cache = false;
        c.cache_dir = f.out;
        std::string key;
        const auto tab = experiment_statistics(c, &key);
        std::cout << json{{"file", (fs::path(f.out) / ("stats_" + key + ".json")).string()},
                          {"lumber", tab.lumber_list.size()},
                          {"normalization", tab.normalization},
                          {"c_slack", tab.c_slack}}
                         .dump()
                  << "\n";
        return ok;
    }
    if (solve->parsed()) {
        const auto c = base_config(f);
        const auto y = load_symmat(input);
        const auto stats = statistics_from_json(read_text(stats_path));
        const auto sys = build_constraint_system(y, c.epsilon, stats, c.lsh.system);
        solver_config sc;
        sc.kind = c.lsh.solver;
        sc.max_iters = c.lsh.max_iters;
        sc.tolerance = c.lsh.tolerance;
        sc.rank = c.lsh.rank;
        sc.seed = f.seed.value_or(1);
        if (c.lsh.system.mode == lsh_mode::robust)
            sc.init = standard_init(sys, y, c.denoisers.build(c.t), c.t);
        const auto res = solve_feasibility(sys, sc);
        save_moments(out_file(f, "moments.symmat"), res.pe.moments);
        write_text(out_file(f, "residuals.json"), to_json(res.pe.residuals) + "\n");
        std::cout << json{{"status", to_string(res.status)},
                          {"solver", res.solver},
                          {"iterations", res.iterations},
                          {"moment_dim", sys.moment_dim()},
                          {"constraints", sys.constraints.size()},
                          {"dropped", sys.dropped.size()},
                          {"residual", res.pe.residuals.total()},
                          {"message", res.message}}
                         .dump()
                  << "\n";
        return res.status == solve_status::feasible ? ok : unsolved;
    }
    if (round->parsed()) {
        const auto c = base_config(f);
        pseudo_expectation pe;
        pe.moments = load_moments(moments_path);
        const auto sys = basis_for_dim(pe.moments.rows(), c.lsh.system.mode);
        double top = 0.0;
        const Eigen::VectorXd v = round_top_eigenvector(extract_second_moment(sys, pe), &top);
        write_text(out_file(f, "v_lsh.json"), vector_to_json(v) + "\n");
        json j{{"n", sys.n}, {"mode", to_string(sys.mode)}, {"top_eigenvalue", top}};
        if (!reference.empty()) {
            const std::string text = read_text(reference);
            const auto parsed = json::parse(text);
            const Eigen::VectorXd ref = parsed.is_array() ? vector_from_json(text) : trace_from_json(text).output();
            j["correlation"] = correlation(v, ref);
        }
        std::cout << j.dump() << "\n";
        return ok;
    }
    if (experiment->parsed()) {
        if (f.config.empty())
            throw config_error("experiment needs --config");
        auto c = base_config(f);
        if (f.seed)
            c.seeds = {*f.seed};
        if (app.get_subcommand("experiment")->get_option("--out")->count() > 0)
            c.output_dir = f.out;
        const auto v = validate_config(c);
        for (const auto& note : v.notes)
            std::cerr << "note: " << note << "\n";
        if (!v.ok()) {
            for (const auto& x : v.violations)
                std::cerr << (x.resource ? "resource cap: " : "invalid: ") << x.field << ": " << x.message << "\n";
            return v.resource_only() ? resource : usage;
        }
        const auto res = run_experiment(c);
        int code = ok;
        for (const auto& r : res.records) {
            std::cout << json{{"seed", r.seed},
                              {"ok", r.ok},
                              {"amp_objective_x", r.amp_objective_x},
                              {"correlation_raw", r.correlation_raw},
                              {"solve_status", r.solve_status},
                              {"correlation_lsh", r.correlation_lsh},
                              {"failure", r.failure_reason}}
                             .dump()
                      << "\n";
            if (!r.ok || (r.lsh_run && r.solve_status != "feasible"))
                code = unsolved;
        }
        return code;
    }
    if (audit_cmd->parsed()) {
        const auto res = audit_experiment(f.out, f.tolerance.value_or(1e-9));
        for (const auto& s : res.skipped)
            std::cerr << "skipped " << s << "\n";
        for (const auto& m : res.mismatches)
            std::cout << json{{"seed", m.seed}, {"field", m.field}, {"recorded", m.recorded},
                              {"recomputed", m.recomputed}}
                             .dump()
                      << "\n";
        std::cout << json{{"records_checked", res.records_checked}, {"mismatches", res.mismatches.size()}}.dump()
                  << "\n";
        return res.ok() ? ok : unsolved;
    }
    return usage;
}

}  // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const resource_error& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return resource;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return unsolved;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }
}

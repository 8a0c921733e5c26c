#pragma once

#include "ampsdp/amp.hpp"
#include "ampsdp/calibration.hpp"
#include "ampsdp/ensembles.hpp"
#include "ampsdp/sdp.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ampsdp {

inline constexpr int result_schema_version = 1;

// kind: polynomial (coeffs of f(x) = sum coeffs[k] x^k) | relu | tanh (scale) | sk_iamp (sk)
struct denoiser_config {
    std::string kind = "polynomial";
    std::vector<double> coeffs{0.0, 1.0};
    double scale = 1.0;
    sk_iamp_options sk;

    // Steps f^0..f^t.
    denoiser_family build(int t) const;
    // Canonical description, used in cache keys.
    std::string describe() const;
};

struct calibration_config {
    long mc_samples = 2000;
    std::uint64_t seed = 99;
    calibration_options options{.rule = slack_rule::variance_window, .enforce_se_rule = false};
    bool use_cache = true;
};

struct lsh_settings {
    bool enabled = true;
    lsh_config system;
    solver_kind solver = solver_kind::automatic;
    long max_iters = 5000;
    double tolerance = 1e-6;
    int rank = 32;
    int robust_max_n = 100;
};

struct experiment_config {
    ensemble_spec ensemble{.n = 150};
    problem_spec problem;
    denoiser_config denoisers;
    int t = 2;
    double epsilon = 0.0;
    adversary adv = adversary::none;
    calibration_config calibration;
    lsh_settings lsh;
    double eta = 0.5;
    std::vector<std::uint64_t> seeds;
    std::string output_dir = "out";
    std::string cache_dir;  // empty selects <output_dir>/cache
    int workers = 1;
    bool dump_artifacts = true;
    long max_dense_entries = 2'000'000'000;  // cap on n^2 and on moment_dim^2

    std::string cache_path() const;
};

experiment_config config_from_json(const std::string& text);
experiment_config load_config(const std::string& path);
std::string to_json(const experiment_config& cfg);

struct config_violation {
    std::string field;
    std::string message;
    bool resource = false;  // a size cap rather than a malformed value
};

struct validation_result {
    std::vector<config_violation> violations;
    std::vector<std::string> notes;  // accepted adjustments, e.g. eps * n rounding

    bool ok() const { return violations.empty(); }
    bool resource_only() const;
};

validation_result validate_config(const experiment_config& cfg);

struct result_record {
    int schema_version = result_schema_version;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string failed_stage;
    std::string failure_reason;

    int n = 0;
    int t = 0;
    double epsilon = 0.0;
    std::string adversary_name;
    std::vector<int> support;
    long long entries_changed = 0;

    double amp_objective_x = 0.0;
    double amp_objective_y = 0.0;
    double correlation_raw = 0.0;  // correlation(AMP on Y, v_AMP(X))

    bool lsh_run = false;
    std::string statistics_key;
    reasonableness reason;
    double witness_residual = 0.0;
    std::string solve_status;
    std::string solver;
    long solver_iterations = 0;
    residual_report residuals;
    double correlation_lsh = 0.0;   // correlation(v_LSH, v_AMP(X))
    double lsh_objective_x = 0.0;   // objective on X of the rounded v_LSH
    double top_eigenvalue = 0.0;

    std::map<std::string, double> timings;  // seconds per stage, kept out of the JSON record
};

std::string to_json(const result_record& r);
result_record record_from_json(const std::string& text);
std::string csv_header();
std::string csv_row(const result_record& r);

// Starting point for robust solves: (1, v0, W = 1, Xh = Y), v0 = sqrt(n) AMP(Y) / ||AMP(Y)||.
Eigen::VectorXd standard_init(const constraint_system& sys, const symmetric_matrix& y, const denoiser_family& fam,
                              int t);

// Loads the cached table for cfg or calibrates and stores it.
statistics_table experiment_statistics(const experiment_config& cfg, std::string* key = nullptr);

struct seed_inputs {
    symmetric_matrix x;
    corruption_record corruption;
};

// X and its corruption for one seed, exactly as the runner draws them.
seed_inputs draw_seed_inputs(const experiment_config& cfg, std::uint64_t seed);

result_record run_seed(const experiment_config& cfg, std::uint64_t seed, const statistics_table* stats,
                       const std::string& stats_key);

struct experiment_result {
    std::vector<result_record> records;
    validation_result validation;
};

// Writes <out>/config.json, records/seed_<s>.json, results.csv, timings.csv and,
// with dump_artifacts, artifacts/seed_<s>/ {x.symmat, y.symmat, trace_x.json, trace_y.json, moments.symmat}.
experiment_result run_experiment(const experiment_config& cfg);

struct audit_mismatch {
    std::uint64_t seed = 0;
    std::string field;
    double recorded = 0.0;
    double recomputed = 0.0;
};

struct audit_result {
    int records_checked = 0;
    std::vector<audit_mismatch> mismatches;
    std::vector<std::string> skipped;

    bool ok() const { return mismatches.empty(); }
};

// Re-derives every record field from the dumped artifacts of an experiment directory.
audit_result audit_experiment(const std::string& dir, double tolerance = 1e-9);

}  // namespace ampsdp

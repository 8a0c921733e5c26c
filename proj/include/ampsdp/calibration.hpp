#pragma once

#include "ampsdp/amp.hpp"
#include "ampsdp/forest.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace ampsdp {

// formula:          every window is c_slack = eta / (s(n) * N_L^2) with s(n) given (or log n)
// variance_window:  each statistic gets the window z * (its per-sample standard deviation);
//                   c_slack reports the widest window
enum class slack_rule { formula, variance_window };

std::string to_string(slack_rule r);
slack_rule parse_slack_rule(const std::string& s);

struct calibration_options {
    family fam = family::gaussian;
    double subgaussian_K = 1.0;
    slack_rule rule = slack_rule::formula;
    double s_n = 0.0;          // 0 selects log n
    double window_z = 4.0;
    double C_K = 0.0;          // 0 selects 4 K^2
    double opnorm_bound = 5.0;
    double max_skip_fraction = 0.1;
    bool enforce_se_rule = true;
};

struct statistics_table {
    int d = 0;
    int n = 0;
    int t = 0;
    std::string family_label;
    std::string problem;
    std::vector<lumber> lumber_list;
    Eigen::MatrixXd pair_stats, pair_se, pair_sd;
    Eigen::VectorXd vec_stats, vec_se, vec_sd;
    Eigen::MatrixXd pair_window;   // half-widths of the +- windows
    Eigen::VectorXd vec_window;
    double eta = 0.0;
    double s_n = 0.0;              // 0 under variance_window
    double c_slack = 0.0;
    double C_K = 0.0;
    double opnorm_bound = 5.0;
    std::vector<tree> cap_trees;
    std::vector<double> infinity_caps;
    double normalization = 1.0;  // sqrt of the estimated E[(1/n)||x^t||^2]
    double norm_se = 0.0;         // standard error of E[(1/n)||x^t||^2]
    long mc_samples = 0;
    long skipped = 0;
    std::uint64_t seed = 0;
    std::string rule;

    int index_of(const lumber& l) const;
    double norm_window() const { return eta / 48.0; }
};

// (5 C_K deg log n)^(2 deg)
double infinity_cap(int degree, double C_K, int n);
// eta / (s_n N_L^2)
double formula_slack(double eta, double s_n, int lumber_count);

statistics_table calibrate_statistics(const denoiser_family& fam, int t, int d, const problem_spec& prob, int n,
                                      long mc_samples, std::uint64_t seed, double eta,
                                      const calibration_options& opt = {});

struct lumber_statistics {
    Eigen::MatrixXd pair;  // (1/n) <L_a(X), L_b(X)>
    Eigen::VectorXd vec;   // (1/n) <L_a(X), v>
};

lumber_statistics measure_statistics(const std::vector<lumber>& list, const symmetric_matrix& x,
                                     const Eigen::VectorXd& v);

struct reasonableness {
    bool stats_ok = false, norm_ok = false, caps_ok = false, opnorm_ok = false, pass = false;
    double worst_stat_deviation = 0.0;
    double worst_stat_ratio = 0.0;      // deviation / window, at most 1 when stats_ok
    std::string worst_stat;
    double norm_value = 0.0;            // (1/n)||v||^2, compared against 1 +- eta/48
    double worst_cap_ratio = 0.0;       // max ||T(X)||_inf^4 / cap
    double opnorm_sq = 0.0;
};

reasonableness reasonableness_report(const symmetric_matrix& x, const Eigen::VectorXd& v_amp,
                                     const statistics_table& stats);

std::string to_json(const statistics_table& s);
statistics_table statistics_from_json(const std::string& text);

}  // namespace ampsdp

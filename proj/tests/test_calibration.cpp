#include "support.hpp"

#include "ampsdp/calibration.hpp"
#include "ampsdp/error.hpp"

#include <doctest.h>

using namespace ampsdp;

namespace {

denoiser_family identity_family(int steps)
{
    return denoiser_family::repeat(denoiser::polynomial(std::vector<double>{0.0, 1.0}), steps, "id");
}

calibration_options windows(double z = 4.0)
{
    calibration_options o;
    o.rule = slack_rule::variance_window;
    o.window_z = z;
    o.enforce_se_rule = false;
    return o;
}

const statistics_table& small_table()
{
    static const statistics_table tab =
        calibrate_statistics(identity_family(3), 2, 2, problem_spec{}, 30, 3000, 21, 0.5, windows());
    return tab;
}

}  // namespace

TEST_CASE("slack formula arithmetic")
{
    CHECK(formula_slack(0.1, 10.0, 5) == doctest::Approx(4e-4).epsilon(1e-14));
    CHECK(formula_slack(0.1, std::log(std::exp(10.0)), 5) == doctest::Approx(4e-4).epsilon(1e-12));
    CHECK(formula_slack(0.5, 2.0, 1) == 0.25);
}

TEST_CASE("infinity caps follow (5 C_K deg log n)^(2 deg)")
{
    CHECK(infinity_cap(1, 4.0, 100) == doctest::Approx(std::pow(20.0 * std::log(100.0), 2)).epsilon(1e-14));
    CHECK(infinity_cap(2, 4.0, 500) == doctest::Approx(std::pow(40.0 * std::log(500.0), 4)).epsilon(1e-14));
}

TEST_CASE("formula rule sets every window to c_slack")
{
    calibration_options o;
    o.enforce_se_rule = false;
    const auto tab = calibrate_statistics(identity_family(2), 1, 1, problem_spec{}, 40, 50, 3, 0.2, o);
    const auto L = static_cast<int>(tab.lumber_list.size());
    CHECK(tab.s_n == doctest::Approx(std::log(40.0)));
    CHECK(tab.c_slack == doctest::Approx(0.2 / (std::log(40.0) * L * L)).epsilon(1e-14));
    CHECK((tab.pair_window.array() == tab.c_slack).all());
    CHECK((tab.vec_window.array() == tab.c_slack).all());
    CHECK(tab.C_K == 4.0);
    CHECK(tab.norm_window() == doctest::Approx(0.2 / 48.0));
}

TEST_CASE("standard errors above a quarter window are refused")
{
    calibration_options o;
    o.enforce_se_rule = true;
    CHECK_THROWS_AS(calibrate_statistics(identity_family(2), 1, 1, problem_spec{}, 30, 50, 3, 0.5, o), numerical_error);
}

TEST_CASE("calibration preconditions and divergence accounting")
{
    CHECK_THROWS_AS(calibrate_statistics(identity_family(2), 1, 1, problem_spec{}, 30, 1, 3, 0.5, windows()), input_error);
    CHECK_THROWS_AS(calibrate_statistics(identity_family(2), 1, 1, problem_spec{}, 30, 10, 3, 1.0, windows()), config_error);
    const auto blow = denoiser_family::repeat(denoiser::polynomial(std::vector<double>{0.0, 0.0, 0.0, 50.0}), 8);
    CHECK_THROWS_AS(calibrate_statistics(blow, 8, 1, problem_spec{}, 30, 10, 3, 0.5, windows()), numerical_error);
}

TEST_CASE("variance windows are z times the per-sample standard deviation")
{
    const auto& tab = small_table();
    CHECK(tab.pair_window.isApprox(4.0 * tab.pair_sd, 1e-15));
    CHECK(tab.vec_window.isApprox(4.0 * tab.vec_sd, 1e-15));
    CHECK(tab.c_slack == std::max(tab.pair_window.maxCoeff(), tab.vec_window.maxCoeff()));
    CHECK(tab.pair_se.isApprox(tab.pair_sd / std::sqrt(3000.0), 1e-14));
}

TEST_CASE("pair statistics are symmetric with non-negative diagonal")
{
    const auto& tab = small_table();
    CHECK((tab.pair_stats - tab.pair_stats.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((tab.pair_stats.diagonal().array() >= 0.0).all());
    CHECK(tab.pair_stats.rows() == static_cast<Eigen::Index>(tab.lumber_list.size()));
}

TEST_CASE("pair statistics agree with the labeling-sum oracle")
{
    const auto& tab = small_table();
    const ensemble_spec spec{30};
    const auto L = static_cast<Eigen::Index>(tab.lumber_list.size());
    for (Eigen::Index a = 0; a < L; ++a)
        for (Eigen::Index b = a; b < L; ++b) {
            const double exact = lumber_pair_expectation(tab.lumber_list[a], tab.lumber_list[b], spec);
            CHECK(std::abs(tab.pair_stats(a, b) - exact) <= 4.0 * tab.pair_se(a, b) + 1e-12);
        }
    const int r1 = tab.index_of(lumber(tree::reroot(tree::empty())));
    REQUIRE(r1 >= 0);
    CHECK(std::abs(tab.pair_stats(r1, r1) - 1.0) <= 3.0 * tab.pair_se(r1, r1));
}

TEST_CASE("normalization holds on fresh samples")
{
    const auto& tab = small_table();
    const auto fam = identity_family(3);
    std::vector<double> sq;
    for (std::uint64_t s = 0; s < 20000; ++s) {
        const auto x = sample_symmetric(ensemble_spec{30}, 400000 + s);
        const auto tr = amp_run(x, fam, 2, tab.normalization * tab.normalization);
        sq.push_back(tr.output().squaredNorm() / 30.0);
    }
    const double se = std::hypot(support::std_error(sq), tab.norm_se / (tab.normalization * tab.normalization));
    CHECK(std::abs(support::mean(sq) - 1.0) <= 2.0 * se);
}

TEST_CASE("measured statistics match direct evaluation (property)")
{
    support::gen g(5);
    const auto list = enumerate_lumber(2);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = g.integer(3, 30);
        const auto x = support::wigner(n, g);
        Eigen::VectorXd v(n);
        for (auto& e : v)
            e = g.normal();
        const auto s = measure_statistics(list, x, v);
        const Eigen::MatrixXd d = support::dense_of(x);
        for (std::size_t a = 0; a < list.size(); ++a) {
            Eigen::VectorXd la = support::tree_value_oracle(list[a].base, d);
            for (const auto& t : list[a].trunks)
                la *= support::tree_value_oracle(t, d).mean();
            CHECK(std::abs(s.vec[static_cast<Eigen::Index>(a)] - la.dot(v) / n) <= 1e-10 * std::max(1.0, la.norm()));
            CHECK(s.pair(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a))
                  == doctest::Approx(la.squaredNorm() / n).epsilon(1e-10));
        }
        CHECK((s.pair - s.pair.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK_THROWS_AS(measure_statistics(list, support::wigner(4, g), Eigen::VectorXd::Ones(5)), input_error);
}

TEST_CASE("norm check is exactly 1 +- eta/48")
{
    const auto& tab = small_table();
    const auto x = sample_symmetric(ensemble_spec{30}, 1);
    const double edge = 1.0 + tab.norm_window();
    const auto inside = reasonableness_report(x, Eigen::VectorXd::Constant(30, std::sqrt(edge - 1e-12)), tab);
    const auto outside = reasonableness_report(x, Eigen::VectorXd::Constant(30, std::sqrt(edge + 1e-9)), tab);
    CHECK(inside.norm_ok);
    CHECK_FALSE(outside.norm_ok);
    CHECK_FALSE(outside.pass);
    const auto low = reasonableness_report(x, Eigen::VectorXd::Constant(30, std::sqrt(1.0 - tab.norm_window() - 1e-9)), tab);
    CHECK_FALSE(low.norm_ok);
    CHECK_THROWS_AS(reasonableness_report(x, Eigen::VectorXd::Ones(29), tab), input_error);
}

TEST_CASE("operator norm check at n = 500")
{
    const auto tab = calibrate_statistics(identity_family(2), 1, 1, problem_spec{}, 500, 5, 1, 0.5, windows());
    const auto x = sample_symmetric(ensemble_spec{500}, 17);
    const auto tr = amp_run(x, identity_family(2), 1, tab.normalization * tab.normalization);
    const auto r = reasonableness_report(x, tr.output(), tab);
    CHECK(r.opnorm_ok);
    CHECK(r.opnorm_sq == doctest::Approx(4.0).epsilon(0.1));
    CHECK(r.caps_ok);

    symmetric_matrix big(500);
    for (int i = 0; i < 500; ++i)
        for (int j = i; j < 500; ++j)
            big.set(i, j, 2.0 * x(i, j));
    CHECK_FALSE(reasonableness_report(big, tr.output(), tab).opnorm_ok);
}

TEST_CASE("statistics table JSON round trip")
{
    const auto& tab = small_table();
    const auto back = statistics_from_json(to_json(tab));
    CHECK(back.d == tab.d);
    CHECK(back.n == tab.n);
    CHECK(back.seed == tab.seed);
    CHECK(back.mc_samples == tab.mc_samples);
    CHECK(back.rule == tab.rule);
    CHECK(back.lumber_list.size() == tab.lumber_list.size());
    for (std::size_t k = 0; k < tab.lumber_list.size(); ++k)
        CHECK(back.lumber_list[k] == tab.lumber_list[k]);
    CHECK((back.pair_stats.array() == tab.pair_stats.array()).all());
    CHECK((back.pair_window.array() == tab.pair_window.array()).all());
    CHECK((back.vec_stats.array() == tab.vec_stats.array()).all());
    CHECK(back.normalization == tab.normalization);
    CHECK(back.c_slack == tab.c_slack);
    CHECK(back.infinity_caps == tab.infinity_caps);
    CHECK(to_json(back) == to_json(tab));
    CHECK_THROWS(statistics_from_json("{\"d\": 1}"));
}

TEST_CASE("calibration is deterministic in its seed")
{
    const auto a = calibrate_statistics(identity_family(2), 1, 1, problem_spec{}, 20, 40, 8, 0.5, windows());
    const auto b = calibrate_statistics(identity_family(2), 1, 1, problem_spec{}, 20, 40, 8, 0.5, windows());
    const auto c = calibrate_statistics(identity_family(2), 1, 1, problem_spec{}, 20, 40, 9, 0.5, windows());
    CHECK(to_json(a) == to_json(b));
    CHECK(to_json(a) != to_json(c));
}

TEST_CASE("slack rule names")
{
    CHECK(parse_slack_rule(to_string(slack_rule::formula)) == slack_rule::formula);
    CHECK(parse_slack_rule(to_string(slack_rule::variance_window)) == slack_rule::variance_window);
    CHECK_THROWS_AS(parse_slack_rule("loose"), config_error);
}

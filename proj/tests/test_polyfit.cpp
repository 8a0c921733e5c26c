#include "support.hpp"

#include "ampsdp/error.hpp"
#include "ampsdp/polyfit.hpp"

#include <doctest.h>

#include <json.hpp>

using namespace ampsdp;

namespace {

double at(const denoiser& f, const std::vector<double>& u)
{
    return f.value(u.data(), static_cast<int>(u.size()) - 1);
}

std::vector<double> point(support::gen& g, int s)
{
    std::vector<double> u{1.0};
    for (int j = 1; j <= s; ++j)
        u.push_back(g.uniform(-2.0, 2.0));
    return u;
}

Eigen::MatrixXd unit_cov(int s)
{
    Eigen::MatrixXd c = Eigen::MatrixXd::Identity(s, s);
    if (s > 1)
        c(0, 1) = c(1, 0) = 0.3;
    return c;
}

}  // namespace

TEST_CASE("fitting a polynomial of admissible degree recovers it (property)")
{
    support::gen g(1);
    for (int trial = 0; trial < 15; ++trial) {
        const int s = g.integer(1, 2);
        const int deg = g.integer(1, 3);
        std::vector<monomial> terms;
        for (int k = 0; k < 3; ++k) {
            monomial m;
            m.coef = g.uniform(-1.0, 1.0);
            m.exps.assign(static_cast<std::size_t>(s + 1), 0);
            const int d = g.integer(0, deg);
            for (int q = 0; q < d; ++q)
                ++m.exps[static_cast<std::size_t>(g.integer(1, s))];
            terms.push_back(m);
        }
        const auto f = denoiser::polynomial(terms);
        const auto fit = fit_denoiser_polynomial(f, s, deg, unit_cov(s), 2000, 7);
        const auto p = fit.as_denoiser();
        CHECK(fit.l2_error <= 1e-16);
        for (int k = 0; k < 20; ++k) {
            const auto u = point(g, s);
            CHECK(std::abs(at(p, u) - at(f, u)) <= 1e-8 * (1.0 + std::abs(at(f, u))));
        }
    }
}

TEST_CASE("training error does not increase with the degree")
{
    const auto relu = denoiser::relu();
    double prev = HUGE_VAL;
    for (int deg : {1, 3, 5, 7}) {
        const auto fit = fit_denoiser_polynomial(relu, 1, deg, Eigen::MatrixXd::Identity(1, 1), 20000, 3);
        CHECK(fit.train_error <= prev + 1e-12);
        CHECK(fit.degree == deg);
        CHECK(fit.warnings.empty());
        prev = fit.train_error;
    }
    CHECK(prev < 0.01);
}

TEST_CASE("fitting is idempotent")
{
    const auto first = fit_denoiser_polynomial(denoiser::tanh_scaled(1.5), 2, 3, unit_cov(2), 5000, 4);
    const auto second = fit_denoiser_polynomial(first.as_denoiser(), 2, 3, unit_cov(2), 5000, 9);
    support::gen g(2);
    for (int k = 0; k < 20; ++k) {
        const auto u = point(g, 2);
        CHECK(at(second.as_denoiser(), u) == doctest::Approx(at(first.as_denoiser(), u)).epsilon(1e-8));
    }
}

TEST_CASE("linear fit of relu matches Gaussian integration by parts")
{
    // For u ~ N(0, 1): E[relu(u)] = 1/sqrt(2 pi) and the slope E[u relu(u)] = E[relu'(u)] = 1/2.
    const long mc = 200000;
    const auto fit = fit_denoiser_polynomial(denoiser::relu(), 1, 1, Eigen::MatrixXd::Identity(1, 1), mc, 6);
    double c0 = 0.0, c1 = 0.0;
    for (const auto& m : fit.terms)
        (m.exps[1] == 0 ? c0 : c1) += m.coef;
    const double tol = 4.0 / std::sqrt(static_cast<double>(mc));
    CHECK(std::abs(c0 - 1.0 / std::sqrt(2.0 * M_PI)) <= tol);
    CHECK(std::abs(c1 - 0.5) <= tol);
}

TEST_CASE("fitting preconditions")
{
    const auto relu = denoiser::relu();
    CHECK_THROWS_AS(fit_denoiser_polynomial(relu, 1, -1, Eigen::MatrixXd::Identity(1, 1), 100, 1), input_error);
    CHECK_THROWS_AS(fit_denoiser_polynomial(relu, 2, 2, Eigen::MatrixXd::Identity(1, 1), 100, 1), input_error);
    CHECK_THROWS_AS(fit_denoiser_polynomial(relu, 1, 2, Eigen::MatrixXd::Identity(1, 1), 1, 1), input_error);
    Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(2, 2);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(fit_denoiser_polynomial(relu, 2, 2, asym, 100, 1), input_error);
    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(fit_denoiser_polynomial(relu, 2, 2, indefinite, 100, 1), input_error);
}

TEST_CASE("degenerate covariance triggers the degree-reduction fallback")
{
    Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(1, 1);
    const auto fit = fit_denoiser_polynomial(denoiser::relu(), 1, 4, flat, 500, 2);
    CHECK(fit.degree < 4);
    CHECK(fit.requested_degree == 4);
    CHECK_FALSE(fit.warnings.empty());
}

TEST_CASE("polynomial families pass through unchanged")
{
    const auto fam = denoiser_family::repeat(denoiser::polynomial(std::vector<double>{0.0, 1.0, 0.5}), 3);
    const auto se = state_evolution(fam, 3, 2000, 1);
    const auto out = approximate_amp_with_polynomials(fam, 3, 5, se, 1000, 2);
    CHECK(out.report.unchanged);
    CHECK(out.family.steps.size() == fam.steps.size());
    for (double d : out.report.discrepancy)
        CHECK(d == 0.0);
}

TEST_CASE("relu family approximation: warnings, discrepancy and stability")
{
    const auto fam = denoiser_family::repeat(denoiser::relu(), 3, "relu");
    const auto se = state_evolution(fam, 3, 20000, 17);
    discrepancy_options disc;
    disc.n = 300;
    disc.instances = 2;
    const auto out = approximate_amp_with_polynomials(fam, 3, 5, se, 20000, 5, disc);
    CHECK_FALSE(out.report.unchanged);
    REQUIRE(out.fits.size() == 3);
    CHECK(out.report.step_errors.size() == 3);
    CHECK(out.report.discrepancy.size() == 2);
    // Relu state evolution has Q_kk = E[relu(U)^2] < 1 past the first step, so Q >= I fails.
    bool warned = false;
    for (const auto& w : out.report.warnings)
        warned = warned || w.find("Q >= I") != std::string::npos;
    CHECK(warned);
    for (int s = 0; s < 3; ++s)
        CHECK(out.fits[static_cast<std::size_t>(s)].covariance.rows() == s);
    for (double d : out.report.discrepancy) {
        CHECK(std::isfinite(d));
        CHECK(d < 0.5);
    }
    const auto x = sample_symmetric(ensemble_spec{300}, 99);
    CHECK_NOTHROW(amp_run(x, out.family, 3));
    CHECK(iterate_discrepancy(x, fam, fam, 3) == 0.0);

    CHECK_THROWS_AS(approximate_amp_with_polynomials(fam, 4, 5, se, 100, 1), input_error);
}

TEST_CASE("degree search reports its curve when the target is out of reach")
{
    const auto fam = denoiser_family::repeat(denoiser::relu(), 2);
    const auto se = state_evolution(fam, 2, 5000, 3);
    discrepancy_options disc;
    disc.n = 100;
    disc.instances = 1;
    try {
        search_polynomial_degree(fam, 2, 4, 1e-9, se, 2000, 1, disc);
        FAIL("expected degree_insufficient_error");
    } catch (const degree_insufficient_error& e) {
        REQUIRE(e.curve().size() == 3);
        CHECK(e.curve()[0].first == 1);
        CHECK(e.curve()[2].first == 4);
    }
    const auto ok = search_polynomial_degree(fam, 2, 4, 10.0, se, 2000, 1, disc);
    CHECK(ok.fits[1].degree == 1);
}

TEST_CASE("fit JSON carries the documented keys")
{
    const auto fit = fit_denoiser_polynomial(denoiser::relu(), 1, 2, Eigen::MatrixXd::Identity(1, 1), 500, 1);
    const auto j = nlohmann::json::parse(to_json(fit));
    for (const char* key : {"step", "degree", "requested_degree", "exponents", "coefficients", "covariance",
                            "l2_error", "l2_se", "train_error", "mc_samples", "warnings"})
        CHECK(j.contains(key));
    CHECK(j["exponents"].size() == j["coefficients"].size());
    CHECK(j["mc_samples"] == 500);
}

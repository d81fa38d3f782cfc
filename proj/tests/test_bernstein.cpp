// Oracle-backed tests for the Bernstein-function layer.  Closed forms are
// cross-checked against direct quadrature of the jump representation, and
// every frozen constant below was produced by an independent integrator.
#include <doctest.h>

#include <cmath>
#include <vector>

#include "subpath/bernstein.hpp"
#include "subpath/common.hpp"
#include "subpath/quadrature.hpp"

using namespace subpath;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
    return g;
}

}  // namespace

TEST_SUITE("bernstein") {

TEST_CASE("closed-form point values") {
    // stable exponent 1/2: phi(u) = u^{1/2}
    auto st = BernsteinFunction::stable(0.5);
    CHECK(phi_eval(st, 4.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(phi_eval(st, 0.0) == 0.0);

    // pure drift: phi(u) = b u
    auto dr = BernsteinFunction::drift_only(3.0);
    CHECK(phi_eval(dr, 2.0) == doctest::Approx(6.0).epsilon(1e-12));

    // gamma family, a = rate = 1: phi(1) = log 2
    auto ga = BernsteinFunction::gamma(1.0, 1.0);
    CHECK(phi_eval(ga, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("quadrature representation matches closed forms") {
    std::vector<BernsteinFunction> fams;
    fams.push_back(BernsteinFunction::stable(0.3));
    fams.push_back(BernsteinFunction::stable(0.5));
    fams.push_back(BernsteinFunction::stable(0.7));
    fams.push_back(BernsteinFunction::gamma(1.0, 1.0));
    fams.push_back(BernsteinFunction::gamma(2.0, 3.0));
    fams.push_back(BernsteinFunction::log_form());
    fams.push_back(BernsteinFunction::compound_poisson({{0.5, 2.0}, {2.0, 1.0}}, 0.25));

    for (const auto& bf : fams) {
        for (double u : log_grid(1e-6, 1e3, 10)) {
            const double closed = phi_eval(bf, u);
            const double quad = phi_eval_quadrature(bf, u);
            CHECK(std::abs(quad - closed) <= 1e-7 * (1.0 + std::abs(closed)));
        }
    }
}

TEST_CASE("gamma family quadrature hits the log-2 oracle tightly") {
    auto ga = BernsteinFunction::gamma(1.0, 1.0);
    CHECK(std::abs(phi_eval_quadrature(ga, 1.0) - std::log(2.0)) <= 1e-8);
}

TEST_CASE("monotone and concave on a wide grid") {
    std::vector<BernsteinFunction> fams;
    fams.push_back(BernsteinFunction::stable(0.4));
    fams.push_back(BernsteinFunction::gamma(1.5, 0.7));
    fams.push_back(BernsteinFunction::log_form());
    fams.push_back(BernsteinFunction::drift_only(0.5));

    for (const auto& bf : fams) {
        auto grid = log_grid(1e-4, 1e4, 25);
        double prev_u = 0.0, prev_phi = 0.0, prev_slope = kInf;
        for (double u : grid) {
            const double p = phi_eval(bf, u);
            CHECK(p >= prev_phi * (1.0 - 1e-12));
            const double slope = (p - prev_phi) / (u - prev_u);
            CHECK(slope <= prev_slope * (1.0 + 1e-9));
            prev_u = u;
            prev_phi = p;
            prev_slope = slope;
        }
    }
}

TEST_CASE("half-moment check: stable family closed form") {
    auto st = BernsteinFunction::stable(0.5);

    SUBCASE("p below the critical order holds with the frozen moment") {
        auto rep = hp_check(st, 0.8);
        REQUIRE(rep.status == HpStatus::holds);
        REQUIRE(rep.moment.has_value());
        // frozen: c * integral_1^inf x^{0.4 - 1.5} dx with c = 0.5/Gamma(0.5)
        CHECK(*rep.moment == doctest::Approx(2.820947917738782).epsilon(1e-12));

        // independent oracle: integrate the tail directly
        const double c = 0.5 / std::tgamma(0.5);
        auto r = quad::integrate_to_infinity(
            [&](double x) { return c * std::pow(x, 0.4 - 1.5); }, 1.0);
        REQUIRE(r.status == quad::QuadStatus::converged);
        CHECK(*rep.moment == doctest::Approx(r.value).epsilon(1e-6));
    }

    SUBCASE("p at twice the exponent fails") {
        CHECK(hp_check(st, 1.0).status == HpStatus::fails);
        CHECK(hp_check(st, 1.4).status == HpStatus::fails);
    }
}

TEST_CASE("half-moment check: bounded jumps always hold") {
    auto cp = BernsteinFunction::compound_poisson({{0.5, 2.0}, {2.0, 1.0}}, 0.0);
    auto rep = hp_check(cp, 10.0);
    REQUIRE(rep.status == HpStatus::holds);
    REQUIRE(rep.moment.has_value());
    // only the atom at x = 2 sits at or above 1: weight 1 * 2^5
    CHECK(*rep.moment == doctest::Approx(32.0).epsilon(1e-12));
}

TEST_CASE("half-moment check: gamma family against a direct tail integral") {
    auto ga = BernsteinFunction::gamma(1.0, 1.0);
    auto rep = hp_check(ga, 7.0);
    REQUIRE(rep.status == HpStatus::holds);
    REQUIRE(rep.moment.has_value());
    auto r = quad::integrate_to_infinity(
        [](double x) { return std::pow(x, 3.5 - 1.0) * std::exp(-x); }, 1.0);
    REQUIRE(r.status == quad::QuadStatus::converged);
    CHECK(*rep.moment == doctest::Approx(r.value).epsilon(1e-8));
}

TEST_CASE("half-moment check: logarithmic family straddles order two") {
    auto lg = BernsteinFunction::log_form();
    CHECK(hp_check(lg, 2.0).status == HpStatus::fails);
    CHECK(hp_check(lg, 2.5).status == HpStatus::fails);
    auto rep = hp_check(lg, 1.0);
    REQUIRE(rep.status == HpStatus::holds);
    REQUIRE(rep.moment.has_value());
    // oracle: tail integral of x^{-1.5} (1 - (1+x) e^{-x})
    auto r = quad::integrate_to_infinity(
        [](double x) {
            return std::pow(x, -1.5) * (1.0 - (1.0 + x) * std::exp(-x));
        },
        1.0);
    REQUIRE(r.status == quad::QuadStatus::converged);
    CHECK(*rep.moment == doctest::Approx(r.value).epsilon(1e-7));
}

TEST_CASE("derivative at zero") {
    CHECK(phi_prime_at_zero(BernsteinFunction::drift_only(3.0)) ==
          doctest::Approx(3.0).epsilon(1e-10));
    // gamma: phi'(0+) = a / rate
    CHECK(phi_prime_at_zero(BernsteinFunction::gamma(1.0, 1.0)) ==
          doctest::Approx(1.0).epsilon(1e-8));
    CHECK(phi_prime_at_zero(BernsteinFunction::gamma(2.0, 4.0)) ==
          doctest::Approx(0.5).epsilon(1e-8));
    // infinite-mean jump measures
    CHECK(phi_prime_at_zero(BernsteinFunction::stable(0.5)) == kInf);
    CHECK(phi_prime_at_zero(BernsteinFunction::log_form()) == kInf);
    // atoms: b + sum w x
    auto cp = BernsteinFunction::compound_poisson({{0.5, 2.0}, {2.0, 1.0}}, 0.25);
    CHECK(phi_prime_at_zero(cp) == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("scaling index: stable family recovers its exponent") {
    for (double alpha : {0.3, 0.5, 0.7}) {
        auto rep = index_sigma0(BernsteinFunction::stable(alpha));
        // log-log slope of an exact power law is exact
        CHECK(rep.sigma0_limit == doctest::Approx(alpha).epsilon(1e-9));
        CHECK(std::abs(rep.sigma0_moment - alpha) <= 2e-3);
        CHECK(rep.agreement_gap <= 0.05);
        CHECK_FALSE(rep.moment_indeterminate);
    }
}

TEST_CASE("scaling index: linear-growth families sit at one") {
    for (auto bf : {BernsteinFunction::drift_only(2.0),
                    BernsteinFunction::gamma(1.0, 1.0),
                    BernsteinFunction::compound_poisson({{1.0, 1.5}}, 0.0)}) {
        auto rep = index_sigma0(bf);
        CHECK(rep.sigma0_limit >= 0.999);
        CHECK(rep.sigma0_limit <= 1.0 + 1e-12);
        CHECK(rep.sigma0_moment == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep.agreement_gap <= 0.05);
    }
}

TEST_CASE("scaling index: logarithmic family needs a deep grid") {
    auto lg = BernsteinFunction::log_form();

    // the default window still carries a visible logarithmic bias
    auto shallow = index_sigma0(lg);
    CHECK(shallow.sigma0_limit >= 0.85);
    CHECK(shallow.sigma0_limit <= 0.95);

    // pushing the window far toward zero removes most of it
    IndexGrid deep;
    deep.u_min = 1e-30;
    deep.u_max = 1e-8;
    auto rep = index_sigma0(lg, deep);
    CHECK(rep.sigma0_limit >= 0.95);
    CHECK(rep.sigma0_limit <= 1.0);
    CHECK(std::abs(rep.sigma0_moment - 1.0) <= 2e-3);
    CHECK(rep.agreement_gap <= 0.05);

    // index one, yet the order-two moment diverges
    CHECK(hp_check(lg, 2.0).status == HpStatus::fails);
}

TEST_CASE("moment index is consistent with the half-moment verdicts") {
    auto st = BernsteinFunction::stable(0.6);
    auto rep = index_sigma0(st);
    CHECK(hp_check(st, 2.0 * (rep.sigma0_moment - 0.05)).status == HpStatus::holds);
    CHECK(hp_check(st, 2.0 * (rep.sigma0_moment + 0.05)).status == HpStatus::fails);
}

TEST_CASE("diagnostic traces are populated") {
    auto rep = index_sigma0(BernsteinFunction::stable(0.5));
    CHECK(rep.slope_pairs.size() >= 10);
    CHECK_FALSE(rep.moment_trace.empty());
    auto hp = hp_check(BernsteinFunction::stable(0.5), 0.8);
    CHECK(hp.closed_form_decision);
}

TEST_CASE("construction rejects ill-posed input") {
    CHECK_THROWS_AS(BernsteinFunction::stable(0.0), ArgumentError);
    CHECK_THROWS_AS(BernsteinFunction::stable(1.0), ArgumentError);
    CHECK_THROWS_AS(BernsteinFunction::stable(-0.2), ArgumentError);
    CHECK_THROWS_AS(BernsteinFunction::drift_only(0.0), ArgumentError);
    CHECK_THROWS_AS(BernsteinFunction::drift_only(-1.0), ArgumentError);
    CHECK_THROWS_AS(BernsteinFunction::gamma(0.0, 1.0), ArgumentError);
    CHECK_THROWS_AS(BernsteinFunction::compound_poisson({{-0.5, 1.0}}, 0.0),
                    ArgumentError);
    CHECK_THROWS_AS(BernsteinFunction::compound_poisson({}, 0.0), ArgumentError);
    // a jump density too singular at the origin is not a Levy measure
    CHECK_THROWS_AS(LevyMeasure::from_density(
                        [](double x) { return std::pow(x, -2.5); }, kInf),
                    ArgumentError);
    // convex closed forms are rejected by the shape screen
    CHECK_THROWS_AS(BernsteinFunction::from_parts(
                        1.0, LevyMeasure::none(),
                        [](double u) { return u * u; }, "convex"),
                    ArgumentError);
    CHECK_THROWS_AS(phi_eval(BernsteinFunction::stable(0.5), -1.0), ArgumentError);
}

}  // TEST_SUITE

#include <doctest.h>

#include <cmath>

#include "subpath/quadrature.hpp"

using namespace subpath;
using namespace subpath::quad;

TEST_SUITE("quadrature") {

TEST_CASE("gk15 is exact on low-degree polynomials") {
    auto r = gk15([](double x) { return x * x * x * x * x * x * x; }, 0.0, 1.0);
    CHECK(r.value == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
}

TEST_CASE("adaptive driver on smooth finite integrals") {
    CHECK(integrate_adaptive([](double x) { return std::exp(x); }, 0.0, 1.0) ==
          doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
    CHECK(integrate_adaptive([](double x) { return std::sin(x); }, 0.0, 3.141592653589793) ==
          doctest::Approx(2.0).epsilon(1e-13));
    CHECK(integrate_adaptive([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("dyadic descent handles integrable singularities") {
    auto r = integrate_down_to_zero([](double x) { return 1.0 / std::sqrt(x); }, 1.0);
    CHECK(r.status == QuadStatus::converged);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));

    // slow power decay takes the geometric-extrapolation path
    auto slow = integrate_down_to_zero([](double x) { return std::pow(x, -0.99); }, 1.0);
    CHECK(slow.status == QuadStatus::converged);
    CHECK(slow.value == doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("dyadic descent flags divergence at zero") {
    auto r = integrate_down_to_zero([](double x) { return 1.0 / x; }, 1.0);
    CHECK(r.status == QuadStatus::divergent);
    auto r2 = integrate_down_to_zero([](double x) { return std::pow(x, -1.5); }, 1.0);
    CHECK(r2.status == QuadStatus::divergent);
}

TEST_CASE("dyadic ascent on convergent tails") {
    auto r = integrate_to_infinity([](double x) { return 1.0 / (x * x); }, 1.0);
    CHECK(r.status == QuadStatus::converged);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));

    auto e = integrate_to_infinity([](double x) { return std::exp(-x); }, 1.0);
    CHECK(e.status == QuadStatus::converged);
    CHECK(e.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));

    auto slow = integrate_to_infinity([](double x) { return std::pow(x, -1.05); }, 1.0);
    CHECK(slow.status == QuadStatus::converged);
    CHECK(slow.value == doctest::Approx(20.0).epsilon(1e-6));
}

TEST_CASE("dyadic ascent flags divergence and refuses log-order tails") {
    auto r = integrate_to_infinity([](double x) { return 1.0 / x; }, 1.0);
    CHECK(r.status == QuadStatus::divergent);
    CHECK(std::isinf(r.value));
    CHECK(r.partials.size() >= 8);

    // summable, but only by a log factor: the driver must not pretend to
    // know either way
    auto log_tail = integrate_to_infinity(
        [](double x) {
            const double l = std::log(x);
            return 1.0 / (x * l * l);
        },
        2.0);
    CHECK(log_tail.status == QuadStatus::indeterminate);
}

TEST_CASE("gauss-laguerre weights integrate the exponential moments") {
    double total = 0;
    for (double w : laguerre_weights()) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));

    CHECK(gauss_laguerre([](double u) { return u; }) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gauss_laguerre([](double u) { return u * u; }) == doctest::Approx(2.0).epsilon(1e-12));
    double fact10 = 3628800.0;
    CHECK(gauss_laguerre([](double u) { return std::pow(u, 10); }) ==
          doctest::Approx(fact10).epsilon(1e-10));
}

TEST_CASE("least-squares slope recovers an exact line") {
    std::vector<double> x{1, 2, 3, 4, 5}, y;
    for (double v : x) y.push_back(0.5 * v - 3.0);
    CHECK(ls_slope(x, y) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(ls_slope({1.0}, {2.0}), ArgumentError);
}

}  // TEST_SUITE

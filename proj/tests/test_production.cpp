#include <cmath>
#include <limits>

#include "doctest.h"
#include "wealth/errors.hpp"
#include "wealth/production.hpp"
#include "wealth/rng.hpp"

using namespace wealth;

namespace {

// Textbook forms, used as oracles in the moderate range where they are accurate.
double ces_g(double eps, double gam, double x) { return std::pow(eps * std::pow(x, gam) + 1.0 - eps, 1.0 / gam); }
double ces_gp(double eps, double gam, double x) {
    return eps * std::pow(x, gam - 1.0) * std::pow(eps * std::pow(x, gam) + 1.0 - eps, 1.0 / gam - 1.0);
}

}  // namespace

TEST_CASE("CES matches the textbook form") {
    const auto pf = ProductionFunction::ces(0.2, 0.7);
    for (double x : {1e-3, 0.1, 0.5, 1.0, 3.0, 50.0, 1e3}) {
        CHECK(pf.g(x) == doctest::Approx(ces_g(0.2, 0.7, x)).epsilon(1e-13));
        CHECK(pf.g_prime(x) == doctest::Approx(ces_gp(0.2, 0.7, x)).epsilon(1e-13));
        CHECK(pf.average_product(x) == doctest::Approx(ces_g(0.2, 0.7, x) / x).epsilon(1e-13));
    }
}

TEST_CASE("Cobb-Douglas matches x^eps") {
    const auto pf = ProductionFunction::cobb_douglas(0.3);
    for (double x : {1e-6, 0.2, 1.0, 7.0, 1e8}) {
        CHECK(pf.g(x) == doctest::Approx(std::pow(x, 0.3)).epsilon(1e-14));
        CHECK(pf.g_prime(x) == doctest::Approx(0.3 * std::pow(x, -0.7)).epsilon(1e-14));
        CHECK(pf.wage_share(x) == doctest::Approx(0.7 * std::pow(x, 0.3)).epsilon(1e-14));
    }
    CHECK(pf.g_prime_limit() == 0.0);
    CHECK(pf.g_at_zero() == 0.0);
}

TEST_CASE("limits of the CES technology") {
    const auto pf = ProductionFunction::ces(0.2, 0.7);
    CHECK(pf.g_prime_limit() == doctest::Approx(std::pow(0.2, 1.0 / 0.7)).epsilon(1e-15));
    CHECK(pf.g_at_zero() == doctest::Approx(std::pow(0.8, 1.0 / 0.7)).epsilon(1e-15));
    CHECK(pf.g_prime(1e12) == doctest::Approx(pf.g_prime_limit()).epsilon(1e-6));
    CHECK(pf.g(1e-12) == doctest::Approx(pf.g_at_zero()).epsilon(1e-6));
}

TEST_CASE("Euler identity holds across random technologies") {
    rng::PhiloxEngine eng(11, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const double eps = 0.02 + 0.96 * eng.uniform();
        const double gam = 0.02 + 0.96 * eng.uniform();
        const double x = std::exp(-10.0 + 20.0 * eng.uniform());
        const auto pf = trial % 2 ? ProductionFunction::ces(eps, gam) : ProductionFunction::cobb_douglas(eps);
        const double g = pf.g(x);
        const double resid = std::abs(x * pf.g_prime(x) + pf.wage_share(x) - g) / g;
        REQUIRE(resid < 1e-12);
    }
}

TEST_CASE("extreme arguments stay finite") {
    const auto pf = ProductionFunction::ces(0.5, 0.9);
    for (double x : {1e-300, 1e-150, 1e150, 1e300}) {
        CHECK(std::isfinite(pf.g(x)));
        CHECK(std::isfinite(pf.g_prime(x)));
        CHECK(pf.wage_share(x) > 0.0);
    }
}

TEST_CASE("shape check accepts the supported families") {
    CHECK(check_shape(ProductionFunction::ces(0.2, 0.7)).empty());
    CHECK(check_shape(ProductionFunction::ces(0.9, 0.05)).empty());
    CHECK(check_shape(ProductionFunction::cobb_douglas(0.5)).empty());
}

TEST_CASE("domain errors") {
    const auto pf = ProductionFunction::cobb_douglas(0.3);
    CHECK_THROWS_AS(pf.g(0.0), DomainError);
    CHECK_THROWS_AS(pf.g(-1.0), DomainError);
    CHECK_THROWS_AS(pf.g_prime(std::numeric_limits<double>::quiet_NaN()), DomainError);
    CHECK_THROWS_AS(pf.g(std::numeric_limits<double>::infinity()), DomainError);
    CHECK_THROWS_AS(ProductionFunction::ces(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(ProductionFunction::ces(0.5, 1.0), DomainError);
    CHECK_THROWS_AS(ProductionFunction::cobb_douglas(1.0), DomainError);
}

TEST_CASE("parameter validation lists every violation") {
    EconomyParams p;
    CHECK(validate_params(p).empty());
    p.delta = 0.0;
    CHECK(validate_params(p).empty());
    p.s = 1.5;
    p.nu = -1.0;
    p.tau_k = 1.0;
    CHECK(validate_params(p).size() == 3);
    CHECK_THROWS_AS(require_valid(p), DomainError);
    EconomyParams q;
    q.chi = std::numeric_limits<double>::quiet_NaN();
    CHECK(validate_params(q).size() == 1);
}

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "wealth/analytics.hpp"
#include "wealth/errors.hpp"
#include "wealth/rng.hpp"
#include "wealth/tail_stats.hpp"

using namespace wealth;
namespace quad = boost::math::quadrature;

namespace {

EconomyParams cd_params() {
    EconomyParams p;
    p.s = 0.2;
    p.nu = 0.05;
    p.tau_k = 0.2;
    p.tau_l = 0.1;
    p.delta = 20.0;
    return p;
}

ClosedFormCoeffs cd_coeffs() {
    const auto p = cd_params();
    const auto pf = ProductionFunction::cobb_douglas(0.3);
    const auto m = clear(p, pf, stationary_pbar(p, pf));
    return coeffs(p, m, DiagonalMeans{0.5, 0.25, 0.5});
}

// Stationary Fokker-Planck solution 1/B exp(int 2A/B) relative to x0,
// integrated numerically from the drift A and variance B.
double fp_log_ratio(const ClosedFormCoeffs& c, double x, double x0) {
    const auto f = [&](double y) { return 2.0 * (c.z0 - c.z1 * y) / (c.a0 + c.a1 * y + c.a2 * y * y); };
    const double integral = quad::gauss_kronrod<double, 61>::integrate(f, x0, x, 20, 1e-14);
    const auto B = [&](double y) { return c.a0 + c.a1 * y + c.a2 * y * y; };
    return integral - std::log(B(x)) + std::log(B(x0));
}

}  // namespace

TEST_CASE("coefficient block") {
    const auto p = cd_params();
    const double pbar = std::pow(4.0, 1.0 / 0.7);
    const double rho = 0.3 * std::pow(pbar, -0.7), omega = 0.7 * std::pow(pbar, 0.3);
    const auto c = cd_coeffs();
    const double ds2 = 20.0 * 0.04;
    CHECK(c.z0 == doctest::Approx(0.2 * (omega + 0.2 * rho * pbar)).epsilon(1e-12));
    CHECK(c.z1 == doctest::Approx(0.05 - 0.2 * 0.8 * rho).epsilon(1e-12));
    CHECK(c.a0 == doctest::Approx(ds2 * 0.81 * omega * omega * 0.5).epsilon(1e-12));
    CHECK(c.a1 == doctest::Approx(2.0 * ds2 * 0.8 * 0.9 * rho * omega * 0.25).epsilon(1e-12));
    CHECK(c.a2 == doctest::Approx(ds2 * 0.64 * rho * rho * 0.5).epsilon(1e-12));
    CHECK(c.z0 / c.z1 == doctest::Approx(pbar).epsilon(1e-12));
    CHECK(c.pareto_exponent() == doctest::Approx(alpha_stationary(p, rho, 0.5)).epsilon(1e-12));
}

TEST_CASE("incomplete-market density solves the stationary Fokker-Planck equation") {
    const auto c = cd_coeffs();
    const auto d = DensityHandle::incomplete(c);
    CHECK(d.kind() == DensityKind::IncompleteMarkets);
    const double x0 = 7.0;
    for (double x : {-20.0, -3.0, 0.0, 2.0, 10.0, 40.0, 300.0, 5000.0}) {
        const double got = d.log_pdf(x) - d.log_pdf(x0);
        CHECK(got == doctest::Approx(fp_log_ratio(c, x, x0)).epsilon(1e-9));
    }
}

TEST_CASE("incomplete-market density is normalized and consistent") {
    const auto c = cd_coeffs();
    const auto d = DensityHandle::incomplete(c);
    quad::tanh_sinh<double> ts;
    const double mass = ts.integrate([&](double x) { return d.pdf(x); }, -std::numeric_limits<double>::infinity(),
                                     std::numeric_limits<double>::infinity());
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(d.mean() == doctest::Approx(c.z0 / c.z1).epsilon(1e-8));
    for (double x : {-5.0, 3.0, 7.0, 25.0, 1e3}) {
        const auto pdf = [&](double y) { return d.pdf(y); };
        const double lo = std::min(x, d.mode());
        double below = ts.integrate(pdf, -std::numeric_limits<double>::infinity(), lo);
        if (x > lo) below += ts.integrate(pdf, lo, x);
        CHECK(d.cdf(x) == doctest::Approx(below).epsilon(1e-9));
    }
    for (double q : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999, 1 - 1e-7}) CHECK(d.cdf(d.quantile(q)) == doctest::Approx(q).epsilon(1e-9));
    CHECK_THROWS_AS(d.quantile(0.0), DomainError);
    CHECK_THROWS_AS(d.quantile(1.0), DomainError);
    CHECK(d.tail_exponent() == doctest::Approx(c.pareto_exponent()));
    double prev = 0.0;
    for (double x = -50.0; x < 500.0; x += 0.7) {
        const double f = d.cdf(x);
        REQUIRE(f >= prev);
        prev = f;
    }
}

TEST_CASE("density in the heavy-noise corner") {
    ClosedFormCoeffs c{0.5, 0.01, 0.2, 0.1, 0.5};  // alpha = 1.04, mean still exists
    const auto d = DensityHandle::incomplete(c);
    quad::tanh_sinh<double> ts;
    const double mass = ts.integrate([&](double x) { return d.pdf(x); }, -std::numeric_limits<double>::infinity(),
                                     std::numeric_limits<double>::infinity());
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(d.log_pdf(40.0) - d.log_pdf(1.0) == doctest::Approx(fp_log_ratio(c, 40.0, 1.0)).epsilon(1e-9));
    CHECK(loglog_tail_slope(d) == doctest::Approx(-(c.pareto_exponent() + 1.0)).epsilon(1e-3));
}

TEST_CASE("degenerate discriminant") {
    ClosedFormCoeffs c{1.0, 0.1, 1.0, 2.0 * 1.0001, 1.0};
    CHECK(c.discriminant() < 0.0);
    CHECK_THROWS_AS(DensityHandle::incomplete(c), DegenerateDiscriminant);
}

TEST_CASE("labour-only risk gives a Gaussian") {
    ClosedFormCoeffs c{2.0, 0.5, 0.3, 0.0, 0.0};
    const auto d = DensityHandle::for_coeffs(c);
    CHECK(d.kind() == DensityKind::GaussianLaborOnly);
    const double mu = 4.0, var = 0.3;
    for (double x : {2.0, 3.9, 4.0, 5.5}) {
        const double z = (x - mu) / std::sqrt(var);
        CHECK(d.pdf(x) == doctest::Approx(std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI * var)).epsilon(1e-13));
        CHECK(d.cdf(x) == doctest::Approx(0.5 * std::erfc(-z / std::sqrt(2.0))).epsilon(1e-13));
    }
    CHECK(d.mean() == mu);
    CHECK(density_gaussian(c, 4.2) == doctest::Approx(d.pdf(4.2)));
    CHECK(std::isinf(d.tail_exponent()));
}

TEST_CASE("staggered wages give an inverse gamma") {
    ClosedFormCoeffs c{0.6, 0.04, 0.0, 0.0, 0.02};
    const auto d = DensityHandle::for_coeffs(c);
    CHECK(d.kind() == DensityKind::StaggeredWages);
    const double shape = 1.0 + 2.0 * 0.04 / 0.02, scale = 2.0 * 0.6 / 0.02;
    for (double x : {1.0, 10.0, 15.0, 100.0}) {
        const double lp = shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
        CHECK(d.log_pdf(x) == doctest::Approx(lp).epsilon(1e-12));
    }
    CHECK_THROWS_AS(d.pdf(0.0), DomainError);
    CHECK_THROWS_AS(d.pdf(-1.0), DomainError);
    CHECK(d.cdf(0.0) == 0.0);
    CHECK(d.mean() == doctest::Approx(scale / (shape - 1.0)).epsilon(1e-13));
    CHECK(d.mean() == doctest::Approx(c.z0 / c.z1).epsilon(1e-13));
    CHECK(loglog_tail_slope(d) == doctest::Approx(-(shape + 1.0)).epsilon(1e-3));
    CHECK(density_staggered(c, 12.0) == doctest::Approx(d.pdf(12.0)));
}

TEST_CASE("relative wealth under growth") {
    const double alpha = 1.5;
    const auto d = DensityHandle::endogenous_growth(alpha);
    quad::exp_sinh<double> es;
    CHECK(es.integrate([&](double u) { return d.pdf(u); }, 0.0, std::numeric_limits<double>::infinity()) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(d.mean() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(density_eg(alpha, 0.8) == doctest::Approx(d.pdf(0.8)));
    CHECK_THROWS_AS(DensityHandle::endogenous_growth(0.9), DomainError);
    CHECK(d.cdf(d.quantile(0.99)) == doctest::Approx(0.99).epsilon(1e-12));
}

TEST_CASE("Hill recovers the tail of quantile samples") {
    const auto d = DensityHandle::endogenous_growth(2.5);
    rng::PhiloxEngine eng(77, 0);
    std::vector<double> x(200000);
    for (auto& v : x) v = d.quantile(eng.uniform());
    const auto est = hill(x, 2000);
    CHECK(est.alpha_hat == doctest::Approx(2.5).epsilon(0.1));
}

TEST_CASE("complete markets collapse to a point") {
    const auto d = DensityHandle::for_coeffs(ClosedFormCoeffs{2.0, 0.5, 0.0, 0.0, 0.0});
    CHECK(d.kind() == DensityKind::DeltaComplete);
    CHECK(d.cdf(3.999) == 0.0);
    CHECK(d.cdf(4.0) == 1.0);
    CHECK(d.mean() == 4.0);
}

TEST_CASE("Pareto exponents") {
    auto p = cd_params();
    const double rho = 0.075;
    CHECK(alpha_stationary(p, rho, 0.5) ==
          doctest::Approx(1.0 + 2.0 * (0.05 - 0.2 * 0.8 * rho) / (20.0 * 0.04 * 0.64 * rho * rho * 0.5)));
    p.delta = 0.0;
    CHECK(std::isinf(alpha_stationary(p, rho, 0.5)));
    p.nu = 0.001;
    CHECK_THROWS_AS(alpha_stationary(p, rho, 0.5), RegimeMismatch);
    auto q = cd_params();
    q.tau_k = 0.0;
    CHECK_THROWS_AS(alpha_eg(q, 0.1, 1.0), DegenerateDynamics);
    CHECK_THROWS_AS(coeffs(p, MarketState{1.0, rho, 0.5}, DiagonalMeans{0.5, 0.25, 0.5}), RegimeMismatch);
}

TEST_CASE("growth and inequality trade off along the saving rate") {
    EconomyParams p;
    p.nu = 0.01;
    p.tau_k = 0.2;
    p.delta = 300.0;
    const auto pf = ProductionFunction::ces(0.2, 0.7);
    const std::vector<double> grid{0.15, 0.2, 0.3, 0.5, 0.8};
    const auto rep = growth_inequality_tradeoff(p, pf, 1.0, grid);
    CHECK(rep.growth_increasing);
    CHECK(rep.alpha_decreasing);
    REQUIRE(rep.rows.size() == grid.size());
    const std::vector<double> bad{0.05, 0.2};
    CHECK_THROWS_AS(growth_inequality_tradeoff(p, pf, 1.0, bad), RegimeMismatch);
}

TEST_CASE("density table") {
    const auto d = DensityHandle::endogenous_growth(2.0);
    std::ostringstream os;
    const std::vector<double> grid{0.5, 1.0};
    write_density_csv(os, d, grid);
    const std::string text = os.str();
    CHECK(text.rfind("x,pdf,cdf\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

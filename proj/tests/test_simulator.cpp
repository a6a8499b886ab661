#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "wealth/errors.hpp"
#include "wealth/simulator.hpp"

using namespace wealth;

namespace {

EconomyParams taxed() {
    EconomyParams p;
    p.s = 0.2;
    p.nu = 0.05;
    p.tau_k = 0.2;
    p.tau_l = 0.3;
    p.chi = 0.01;
    p.delta = 4.0;
    return p;
}

double mean(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

// Dense micro-model step written out directly from the income definitions.
std::vector<double> reference_step(const std::vector<double>& p, const EconomyParams& e, const AllocationNetwork& net,
                                   const ProductionFunction& pf, const std::vector<double>& dA, double dt,
                                   bool staggered) {
    const Eigen::MatrixXd th(net.theta().materialize());
    const Eigen::MatrixXd ph(net.phi().materialize());
    const Eigen::Map<const Eigen::VectorXd> shocks(dA.data(), dA.size());
    const double lam = mean(p);
    const double gp = pf.g_prime(lam), w = pf.g(lam) - lam * pf.g_prime(lam);
    const int n = static_cast<int>(p.size());
    Eigen::VectorXd cap(n), lab(n);
    for (int i = 0; i < n; ++i) {
        cap[i] = p[i] * gp * th.row(i).dot(shocks);
        lab[i] = staggered ? w * e.a * dt : w * ph.row(i).dot(shocks);
    }
    const double transfer = (e.tau_k * cap.sum() + e.tau_l * lab.sum()) / n;
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = p[i] + e.s * ((1 - e.tau_k) * cap[i] + (1 - e.tau_l) * lab[i] + transfer) - e.chi * dt -
                 e.nu * p[i] * dt;
    return out;
}

// Noise loadings of the one-step increment on the firm shocks (per unit of
// a sqrt(delta dt) xi_j), for arbitrary wealth.
Eigen::MatrixXd loadings(const std::vector<double>& p, const EconomyParams& e, const AllocationNetwork& net,
                         const ProductionFunction& pf) {
    const Eigen::MatrixXd th(net.theta().materialize());
    const Eigen::MatrixXd ph(net.phi().materialize());
    const int n = static_cast<int>(p.size());
    const Eigen::Map<const Eigen::VectorXd> pv(p.data(), n);
    const double lam = pv.mean();
    const double gp = pf.g_prime(lam), w = pf.g(lam) - lam * pf.g_prime(lam);
    const Eigen::RowVectorXd k = pv.transpose() * th;
    const Eigen::RowVectorXd l = Eigen::RowVectorXd::Ones(n) * ph;
    Eigen::MatrixXd B(n, th.cols());
    for (int i = 0; i < n; ++i)
        B.row(i) = (1 - e.tau_k) * gp * p[i] * th.row(i) + (1 - e.tau_l) * w * ph.row(i) +
                   (e.tau_k * gp * k + e.tau_l * w * l) / n;
    return e.s * e.a * std::sqrt(e.delta) * B;
}

}  // namespace

TEST_CASE("firm shocks") {
    EconomyParams p;
    p.a = 1.5;
    p.delta = 2.0;
    const rng::CounterRng rng(5);
    const double dt = 0.01;
    double sum = 0.0, sum2 = 0.0;
    const int steps = 5000, firms = 200;
    for (int k = 0; k < steps; ++k) {
        for (double x : sample_firm_shocks(firms, p, dt, rng, k)) {
            sum += x;
            sum2 += x * x;
        }
    }
    const double n = static_cast<double>(steps) * firms;
    const double m = sum / n, var = sum2 / n - m * m;
    const double sd = p.a * std::sqrt(p.delta * dt);
    CHECK(std::abs(m - p.a * dt) < 5.0 * sd / std::sqrt(n));
    CHECK(var == doctest::Approx(sd * sd).epsilon(0.01));
    CHECK(sample_firm_shocks(7, p, dt, rng, 3) == sample_firm_shocks(7, p, dt, rng, 3));

    const auto centred = sample_firm_shocks(50, p, dt, rng, 9, true);
    CHECK(mean(centred) == doctest::Approx(p.a * dt).epsilon(1e-12));
    p.delta = 0.0;
    for (double x : sample_firm_shocks(5, p, dt, rng, 1)) CHECK(x == p.a * dt);
}

TEST_CASE("one step matches the income accounting") {
    const auto e = taxed();
    const auto pf = ProductionFunction::cobb_douglas(0.3);
    const auto net = build_regular(30, 15, 3, 2, 4);
    std::vector<double> p(30);
    for (int i = 0; i < 30; ++i) p[i] = 2.0 + 0.3 * i;
    const rng::CounterRng rng(8);
    const auto dA = sample_firm_shocks(15, e, 0.05, rng, 0);
    for (bool stag : {false, true}) {
        const auto got = step_absolute(p, e, net, pf, dA, 0.05,
                                       StepOptions{stag ? WageSetting::Staggered : WageSetting::Flexible, 1});
        const auto want = reference_step(p, e, net, pf, dA, 0.05, stag);
        for (int i = 0; i < 30; ++i) REQUIRE(got[i] == doctest::Approx(want[i]).epsilon(1e-13));
    }
}

TEST_CASE("taxes only redistribute") {
    auto e = taxed();
    const auto pf = ProductionFunction::ces(0.3, 0.5);
    const auto net = build_regular(40, 20, 2, 4, 1);
    std::vector<double> p(40);
    for (int i = 0; i < 40; ++i) p[i] = 1.0 + std::sin(i) * 0.5;
    const auto dA = sample_firm_shocks(20, e, 0.1, rng::CounterRng(3), 2);
    const auto with = step_absolute(p, e, net, pf, dA, 0.1);
    e.tau_k = e.tau_l = 0.0;
    const auto without = step_absolute(p, e, net, pf, dA, 0.1);
    CHECK(mean(with) == doctest::Approx(mean(without)).epsilon(1e-14));
}

TEST_CASE("deterministic fixed point") {
    auto e = taxed();
    e.delta = 0.0;
    e.chi = 0.0;
    const auto pf = ProductionFunction::cobb_douglas(0.3);
    const double pbar = stationary_pbar(e, pf);
    const auto net = build_regular(20, 10, 2, 2, 1);
    SimulationConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 50.0;
    const auto panel = run_absolute(cfg, e, net, pf, std::vector<double>(20, pbar));
    for (double m : panel.mean_path) REQUIRE(m == doctest::Approx(pbar).epsilon(1e-12));
}

TEST_CASE("mean increment equals the drift") {
    const auto e = taxed();
    const auto pf = ProductionFunction::cobb_douglas(0.3);
    const auto net = build_regular(10, 10, 2, 3, 6);
    std::vector<double> p(10);
    for (int i = 0; i < 10; ++i) p[i] = 3.0 + i;
    const double dt = 0.01;
    const auto mu = drift(p, e, pf);
    const int reps = 40000;
    std::vector<double> sum(10, 0.0), sum2(10, 0.0);
    const rng::CounterRng rng(21);
    for (int r = 0; r < reps; ++r) {
        const auto next = step_absolute(p, e, net, pf, sample_firm_shocks(10, e, dt, rng, r), dt);
        for (int i = 0; i < 10; ++i) {
            const double d = next[i] - p[i];
            sum[i] += d;
            sum2[i] += d * d;
        }
    }
    for (int i = 0; i < 10; ++i) {
        const double m = sum[i] / reps;
        const double se = std::sqrt((sum2[i] / reps - m * m) / reps);
        CHECK(std::abs(m - mu[i] * dt) < 5.0 * se);
    }
}

TEST_CASE("closed-form covariance equals the loading product at balanced wealth") {
    const auto e = taxed();
    const auto pf = ProductionFunction::ces(0.2, 0.7);
    for (auto [dt_, dp_] : {std::pair{4, 4}, std::pair{2, 5}, std::pair{10, 1}}) {
        const auto net = build_regular(40, 20, dt_, dp_, 11);
        const auto w = balanced_wealth(net, 5.0, 0.8, 3);
        const Eigen::MatrixXd B = loadings(w, e, net, pf);
        const Eigen::MatrixXd H = analytic_noise_covariance(e, net, pf, w);
        const double scale = H.cwiseAbs().maxCoeff();
        CHECK((H - B * B.transpose()).cwiseAbs().maxCoeff() < 1e-12 * scale);
    }
}

TEST_CASE("single household") {
    EconomyParams e;
    e.delta = 3.0;
    const auto pf = ProductionFunction::cobb_douglas(0.4);
    const AllocationNetwork net(Allocation::uniform(1, 1), Allocation::uniform(1, 1));
    const std::vector<double> w{2.5};
    const double rho = pf.g_prime(2.5), omega = pf.wage_share(2.5);
    const double want = 3.0 * 0.04 * std::pow(rho * 2.5 + omega, 2);
    CHECK(analytic_noise_covariance(e, net, pf, w)(0, 0) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("sampled covariance approaches the loading product") {
    const auto e = taxed();
    const auto pf = ProductionFunction::cobb_douglas(0.3);
    const auto net = build_regular(12, 6, 3, 2, 2);
    std::vector<double> w(12);
    for (int i = 0; i < 12; ++i) w[i] = 1.0 + 0.4 * i;  // unbalanced on purpose
    const Eigen::MatrixXd B = loadings(w, e, net, pf);
    const Eigen::MatrixXd truth = B * B.transpose();
    const auto cov = empirical_noise_covariance(e, net, pf, w, 200000, 5, 0.01);
    CHECK((cov.empirical - truth).cwiseAbs().maxCoeff() < 0.03 * truth.cwiseAbs().maxCoeff());
    CHECK_THROWS_AS(empirical_noise_covariance(e, net, pf, w, 1, 5), InsufficientData);
}

TEST_CASE("balanced wealth equalizes firm capital") {
    const auto net = build_regular(60, 20, 3, 3, 7);
    const auto w = balanced_wealth(net, 4.0, 0.5, 1);
    CHECK(mean(w) == doctest::Approx(4.0).epsilon(1e-12));
    const auto in = firm_inputs(net, w);
    for (double k : in.capital) CHECK(k == doctest::Approx(in.capital[0]).epsilon(1e-10));
    double lo = w[0], hi = w[0];
    for (double x : w) lo = std::min(lo, x), hi = std::max(hi, x);
    CHECK(hi - lo > 0.1);
}

TEST_CASE("results do not depend on the thread count") {
    const auto e = taxed();
    const auto pf = ProductionFunction::cobb_douglas(0.3);
    const auto net = build_regular(9000, 900, 3, 3, 1);
    SimulationConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 1.0;
    cfg.record_every = 0.5;
    cfg.seed = 4;
    const std::vector<double> init(9000, 7.0);
    const auto one = run_absolute(cfg, e, net, pf, init);
    cfg.threads = 4;
    const auto four = run_absolute(cfg, e, net, pf, init);
    CHECK(one.snapshots == four.snapshots);
    CHECK(one.mean_path == four.mean_path);
}

TEST_CASE("snapshot schedule") {
    SimulationConfig cfg;
    cfg.t_end = 10.0;
    cfg.burn_in = 4.0;
    cfg.record_every = 2.0;
    CHECK(snapshot_count(cfg) == 4);
    cfg.dt = 0.1;
    EconomyParams e;
    e.delta = 0.5;
    const auto pf = ProductionFunction::cobb_douglas(0.3);
    const auto net = build_regular(10, 5, 1, 1, 1);
    const auto panel = run_absolute(cfg, e, net, pf, std::vector<double>(10, 5.0));
    REQUIRE(panel.times.size() == 4);
    CHECK(panel.times[0] == doctest::Approx(4.0));
    CHECK(panel.times[3] == doctest::Approx(10.0));
    CHECK(panel.mean_path.size() == 101);
    CHECK(panel.pooled().size() == 40);

    std::ostringstream os;
    write_panel_csv(os, panel);
    const std::string text = os.str();
    CHECK(text.rfind("t,household_id,wealth\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 41);
}

TEST_CASE("configuration errors") {
    EconomyParams e;
    const auto pf = ProductionFunction::cobb_douglas(0.3);
    const auto net = build_regular(4, 2, 1, 1, 1);
    SimulationConfig cfg;
    cfg.dt = 100.0;
    CHECK_THROWS_AS(run_absolute(cfg, e, net, pf, std::vector<double>(4, 0.01)), DomainError);
    cfg.dt = 0.1;
    cfg.burn_in = 200.0;
    CHECK_THROWS_AS(run_absolute(cfg, e, net, pf, std::vector<double>(4, 1.0)), DomainError);
    cfg.burn_in = 0.0;
    CHECK_THROWS_AS(run_absolute(cfg, e, net, pf, std::vector<double>(3, 1.0)), DimensionMismatch);
    CHECK_THROWS_AS(run_absolute(cfg, e, net, pf, std::vector<double>(4, 0.0)), PriceUndefined);
}

TEST_CASE("collapse of mean wealth is reported with its step") {
    EconomyParams e;
    e.delta = 0.0;
    e.chi = 5.0;
    const auto pf = ProductionFunction::cobb_douglas(0.3);
    const auto net = build_regular(4, 2, 1, 1, 1);
    SimulationConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 10.0;
    try {
        run_absolute(cfg, e, net, pf, std::vector<double>(4, 1.0));
        FAIL("expected PriceUndefined");
    } catch (const PriceUndefined& err) {
        CHECK(std::string(err.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("mean-field path") {
    EconomyParams e;
    e.s = 0.2;
    e.nu = 0.05;
    const auto pf = ProductionFunction::cobb_douglas(0.3);
    const double pbar = std::pow(4.0, 1.0 / 0.7);
    const auto path = integrate_mean_field(e, pf, 1.0, 600.0, 0.5);
    CHECK(path.p_bar.size() == 1201);
    CHECK(path.p_bar.back() == doctest::Approx(pbar).epsilon(1e-6));
    for (std::size_t k = 1; k < path.p_bar.size(); ++k) REQUIRE(path.p_bar[k] >= path.p_bar[k - 1]);
    CHECK(integrate_mean_field(e, pf, 1.0, 1.25, 0.5).p_bar.size() == 4);

    EconomyParams g = e;
    g.nu = 0.01;
    const auto ces = ProductionFunction::ces(0.2, 0.7);
    const auto grow = integrate_mean_field(g, ces, 1.0, 4000.0, 1.0);
    const double rate = std::log(grow.p_bar[4000] / grow.p_bar[3000]) / 1000.0;
    CHECK(rate == doctest::Approx(g.s * ces.g_prime_limit() - g.nu).epsilon(1e-2));
}

TEST_CASE("relative wealth relaxes to one without noise") {
    EconomyParams e;
    e.s = 0.2;
    e.nu = 0.01;
    e.tau_k = 0.2;
    e.delta = 0.0;
    const double rho = 0.1;
    const double kappa = e.s * rho * e.tau_k;
    SimulationConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 200.0;
    cfg.record_every = 200.0;
    const std::vector<double> u0{0.2, 1.0, 3.0};
    const auto panel = run_relative_eg(cfg, e, 1.0, rho, u0);
    REQUIRE(panel.snapshots.size() == 2);
    for (int i = 0; i < 3; ++i) {
        const double want = 1.0 + (u0[i] - 1.0) * std::exp(-kappa * 200.0);
        CHECK(panel.snapshots[1][i] == doctest::Approx(want).epsilon(1e-3));
    }
    CHECK(panel.kind == PanelKind::Relative);
}

TEST_CASE("relative wealth stays positive under heavy noise") {
    EconomyParams e;
    e.s = 0.5;
    e.tau_k = 0.05;
    e.delta = 400.0;
    SimulationConfig cfg;
    cfg.dt = 0.5;
    cfg.t_end = 200.0;
    cfg.record_every = 10.0;
    for (auto scheme : {Scheme::Milstein, Scheme::EulerMaruyama}) {
        cfg.scheme = scheme;
        const auto panel = run_relative_eg(cfg, e, 1.0, 0.1, std::vector<double>(2000, 1.0));
        for (const auto& snap : panel.snapshots)
            for (double u : snap) REQUIRE(u > 0.0);
    }
    e.tau_k = 0.0;
    CHECK_THROWS_AS(run_relative_eg(cfg, e, 1.0, 0.1, std::vector<double>(5, 1.0)), DegenerateDynamics);
}

TEST_CASE("renormalized relative wealth keeps unit mean") {
    EconomyParams e;
    e.tau_k = 0.2;
    e.delta = 50.0;
    SimulationConfig cfg;
    cfg.dt = 0.5;
    cfg.t_end = 50.0;
    cfg.record_every = 10.0;
    cfg.renormalize_relative = true;
    const auto panel = run_relative_eg(cfg, e, 1.0, 0.1, std::vector<double>(500, 1.0));
    for (const auto& snap : panel.snapshots) CHECK(mean(snap) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("relative wealth on a network") {
    EconomyParams e;
    e.tau_k = 0.2;
    e.delta = 10.0;
    const auto net = build_regular(200, 100, 2, 2, 3);
    SimulationConfig cfg;
    cfg.dt = 0.5;
    cfg.t_end = 20.0;
    cfg.record_every = 10.0;
    const auto a = run_relative_eg(cfg, e, net, 0.1, std::vector<double>(200, 1.0));
    const auto b = run_relative_eg(cfg, e, net, 0.1, std::vector<double>(200, 1.0));
    CHECK(a.snapshots == b.snapshots);
    for (double u : a.snapshots.back()) REQUIRE(u > 0.0);
}

TEST_CASE("direct covariance noise") {
    auto e = taxed();
    e.chi = 0.0;
    const auto pf = ProductionFunction::cobb_douglas(0.3);
    const double pbar = stationary_pbar(e, pf);
    const auto net = build_regular(20, 10, 2, 2, 1);
    SimulationConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 5.0;
    cfg.noise_model = NoiseModel::DirectCovariance;
    const auto init = balanced_wealth(net, pbar, 0.2, 2);
    const auto a = run_absolute(cfg, e, net, pf, init);
    const auto b = run_absolute(cfg, e, net, pf, init);
    CHECK(a.snapshots == b.snapshots);
    CHECK(std::abs(a.mean_path.back() - pbar) < 0.5 * pbar);
}

TEST_CASE("enum names") {
    CHECK(to_string(Scheme::Milstein) == "Milstein");
    CHECK(to_string(WageSetting::Staggered) == "Staggered");
    CHECK(to_string(NoiseModel::DirectCovariance) == "DirectCovariance");
}

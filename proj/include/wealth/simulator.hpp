#pragma once

// Monte Carlo integration of household wealth dynamics.

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wealth/market.hpp"
#include "wealth/network.hpp"
#include "wealth/production.hpp"
#include "wealth/rng.hpp"

namespace wealth {

enum class NoiseModel { FirmShocks, DirectCovariance };
enum class Scheme { EulerMaruyama, Milstein };
enum class WageSetting { Flexible, Staggered };

std::string to_string(NoiseModel m);
std::string to_string(Scheme s);
std::string to_string(WageSetting w);

struct SimulationConfig {
    double dt = 0.0;             // 0 picks 0.01 / max(nu, s a g'(lambda0))
    double t_end = 100.0;
    double burn_in = 0.0;
    double record_every = 1.0;
    std::uint64_t seed = 1;
    NoiseModel noise_model = NoiseModel::FirmShocks;
    Scheme scheme = Scheme::EulerMaruyama;
    WageSetting wage_setting = WageSetting::Flexible;
    /// Subtract the cross-firm average from every shock draw. This removes the
    /// finite-F common component, the one that vanishes as F grows.
    bool remove_aggregate_shock = false;
    /// Relative-wealth runs: divide by the realized cross-sectional mean after
    /// every step (u_i = p_i / p_bar in a finite economy). Off by default:
    /// households then follow independent copies of the large-N equation.
    bool renormalize_relative = false;
    int threads = 1;
};

/// Throws DomainError on dt <= 0 (after defaulting), burn_in outside [0, t_end),
/// record_every <= 0, threads < 1.
void validate(const SimulationConfig& cfg);

/// 0.01 / max(nu, s a g'(lambda0)).
double default_dt(const EconomyParams& params, const ProductionFunction& pf, double lambda0);

enum class PanelKind { Absolute, Relative };

struct WealthPanel {
    PanelKind kind = PanelKind::Absolute;
    SimulationConfig config;          // dt resolved
    std::vector<double> times;        // snapshot instants
    std::vector<std::vector<double>> snapshots;
    std::vector<double> mean_path;    // cross-sectional mean at t = k dt, k = 0..steps
    std::string metadata;             // free-form echo supplied by the caller

    /// All snapshots concatenated.
    std::vector<double> pooled() const;
};

/// floor((t_end - burn_in) / record_every) + 1.
int snapshot_count(const SimulationConfig& cfg);

/// dA_j for j < F at one step: a dt + a sqrt(delta dt) xi_j, with xi_j drawn
/// from (seed, step, j) only.
std::vector<double> sample_firm_shocks(int n_firms, const EconomyParams& params, double dt,
                                       const rng::CounterRng& rng, std::uint64_t step,
                                       bool remove_aggregate = false);

struct StepOptions {
    WageSetting wage_setting = WageSetting::Flexible;
    int threads = 1;
};

/// One Euler step of the micro model: realized capital and labour incomes
/// from `shocks`, flat taxes on them, equal redistribution of the revenue,
/// then dp_i = s (net income + transfer) - chi dt - nu p_i dt.
/// Throws PriceUndefined when mean(state) <= 0, NonFinite on overflow.
std::vector<double> step_absolute(std::span<const double> state, const EconomyParams& params,
                                  const AllocationNetwork& net, const ProductionFunction& pf,
                                  std::span<const double> shocks, double dt, const StepOptions& opts = {});

/// Drift of the wealth SDE at `state` (per unit time).
std::vector<double> drift(std::span<const double> state, const EconomyParams& params, const ProductionFunction& pf,
                          WageSetting wage_setting = WageSetting::Flexible);

WealthPanel run_absolute(const SimulationConfig& cfg, const EconomyParams& params, const AllocationNetwork& net,
                         const ProductionFunction& pf, std::span<const double> initial);

struct MeanFieldPath {
    double dt = 0.0;
    std::vector<double> p_bar;  // at t = k dt
};

/// RK4 for dp/dt = s a g(p) - chi - nu p. The last step is shortened to land on t_end.
MeanFieldPath integrate_mean_field(const EconomyParams& params, const ProductionFunction& pf, double p_bar_0,
                                   double t_end, double dt);

/// Relative wealth under endogenous growth,
///   du_i = s rho* tau_k (1 - u_i) dt + sigma u_i dW_i,
///   sigma^2 = delta s^2 (1 - tau_k)^2 rho*^2 theta_bar,
/// with independent households (Milstein or Euler-Maruyama per cfg.scheme).
/// Throws DegenerateDynamics when tau_k == 0.
WealthPanel run_relative_eg(const SimulationConfig& cfg, const EconomyParams& params, double theta_bar,
                            double rho_star, std::span<const double> initial);

/// Same dynamics with noise correlated through the investment network:
/// sigma_0 u_i sum_j theta_ij xi_j, covariance proportional to Theta.
/// Euler-Maruyama only.
WealthPanel run_relative_eg(const SimulationConfig& cfg, const EconomyParams& params, const AllocationNetwork& net,
                            double rho_star, std::span<const double> initial);

/// Closed-form noise covariance per unit time at wealth `p`, built from the
/// overlap matrices and the aggregates
///   vartheta_i = sum_i' Theta_{i,i'} p_i',  varphi_i = sum_i' Omega_{i',i} p_i'.
/// The redistribution terms use k_j = lambda l_j for every firm, so the result
/// equals the micro-model covariance when firm capital-labour ratios are equal.
Eigen::MatrixXd analytic_noise_covariance(const EconomyParams& params, const AllocationNetwork& net,
                                          const ProductionFunction& pf, std::span<const double> wealth,
                                          WageSetting wage_setting = WageSetting::Flexible);

struct NoiseCovariance {
    Eigen::MatrixXd empirical;
    Eigen::MatrixXd analytic;
};

/// Sample covariance of `n_samples` one-step increments from the fixed
/// `wealth` (divided by dt), next to analytic_noise_covariance().
NoiseCovariance empirical_noise_covariance(const EconomyParams& params, const AllocationNetwork& net,
                                           const ProductionFunction& pf, std::span<const double> wealth,
                                           int n_samples, std::uint64_t seed, double dt = 1.0);

/// Wealth vector level * 1 + v with theta^T v = 0, so that every firm sees
/// the same capital-labour ratio on a regular network. `spread` scales a
/// random v before projection.
std::vector<double> balanced_wealth(const AllocationNetwork& net, double level, double spread, std::uint64_t seed);

/// Long form "t,household_id,wealth".
void write_panel_csv(std::ostream& os, const WealthPanel& panel);

}  // namespace wealth

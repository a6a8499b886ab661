#pragma once

// Closed-form equilibrium wealth densities and Pareto exponents.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wealth/market.hpp"
#include "wealth/network.hpp"
#include "wealth/production.hpp"

namespace wealth {

/// Drift z0 - z1 p and diffusion a0 + a1 p + a2 p^2 of a household's wealth
/// around the stationary state.
struct ClosedFormCoeffs {
    double z0 = 0.0;
    double z1 = 0.0;
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;

    double discriminant() const noexcept { return 4.0 * a0 * a2 - a1 * a1; }
    /// z0 + z1 a1 / (2 a2), the weight of the arctan factor (up to 4/sqrt(disc)).
    double arctan_prefactor() const noexcept { return z0 + z1 * a1 / (2.0 * a2); }
    /// 1 + 2 z1 / a2.
    double pareto_exponent() const noexcept { return 1.0 + 2.0 * z1 / a2; }
};

/// Evaluates the coefficient block at the stationary prices `market`
/// (market.lambda is the stationary mean wealth). Throws RegimeMismatch if z1 <= 0.
ClosedFormCoeffs coeffs(const EconomyParams& params, const MarketState& market, const DiagonalMeans& overlaps);

/// alpha = 1 + 2 [nu - s(1-tau_k) rho*] / [delta s^2 (1-tau_k)^2 rho*^2 theta_bar].
/// Throws RegimeMismatch if the numerator is not positive. +inf when delta == 0.
double alpha_stationary(const EconomyParams& params, double rho_star, double theta_bar);

/// alpha_EG = 1 + 2 tau_k / [delta s (1-tau_k)^2 rho* theta_bar].
/// Throws DegenerateDynamics when tau_k == 0.
double alpha_eg(const EconomyParams& params, double rho_star, double theta_bar);

enum class DensityKind { DeltaComplete, GaussianLaborOnly, IncompleteMarkets, StaggeredWages, EndogenousGrowthRelative };

std::string to_string(DensityKind k);

/// A normalized equilibrium density with CDF and quantile.
class DensityHandle {
public:
    /// All mass at p_bar (complete markets).
    static DensityHandle delta(double p_bar);
    /// Normal with mean z0/z1 and variance a0/(2 z1). Needs z1 > 0, a0 > 0.
    static DensityHandle gaussian(const ClosedFormCoeffs& c);
    /// Full-line density with Pareto upper tail. Needs z1 > 0, a2 > 0 and a
    /// strictly positive discriminant (DegenerateDiscriminant otherwise).
    static DensityHandle incomplete(const ClosedFormCoeffs& c);
    /// Inverse gamma, shape 1 + 2 z1/a2, scale 2 z0/a2, on (0, inf). Needs z0, z1, a2 > 0.
    static DensityHandle staggered(const ClosedFormCoeffs& c);
    /// Relative wealth under endogenous growth: inverse gamma, shape alpha, scale alpha - 1.
    static DensityHandle endogenous_growth(double alpha);
    /// Picks the form matching which coefficients vanish.
    static DensityHandle for_coeffs(const ClosedFormCoeffs& c);

    DensityKind kind() const noexcept { return kind_; }
    const ClosedFormCoeffs& coefficients() const noexcept { return c_; }
    double lower_support() const noexcept { return lo_; }
    double upper_support() const noexcept { return hi_; }
    /// Log of the normalization constant N (density = N * unnormalized form).
    double log_normalization() const noexcept { return log_norm_; }
    /// Pareto exponent of the upper tail; +inf for thin-tailed kinds.
    double tail_exponent() const noexcept { return alpha_; }
    double mode() const noexcept { return mode_; }

    double pdf(double x) const;
    double log_pdf(double x) const;
    double cdf(double x) const;
    /// Throws DomainError unless 0 < q < 1.
    double quantile(double q) const;
    /// Mean where it exists (NaN otherwise).
    double mean() const;

private:
    DensityHandle() = default;
    double log_unnormalized(double x) const;  // incomplete kind only
    double lower_tail_mass(double x) const;   // unnormalized mass below x, x <= mode
    double upper_tail_mass(double x) const;   // unnormalized mass above x, x >= mode

    DensityKind kind_ = DensityKind::DeltaComplete;
    ClosedFormCoeffs c_{};
    double lo_ = 0.0, hi_ = 0.0;
    double alpha_ = 0.0;
    double mode_ = 0.0;
    double log_norm_ = 0.0;
    // Gaussian: mean/sd; inverse gamma: shape/scale.
    double p1_ = 0.0, p2_ = 0.0;
    // Incomplete markets internals.
    double width_ = 0.0;      // body half-width around the mode
    double log_peak_ = 0.0;   // log unnormalized density at the mode
    double total_ = 0.0;      // unnormalized total mass (relative to the peak)
};

// Pointwise conveniences. Each builds (and normalizes) a handle per call.
double density_incomplete(const ClosedFormCoeffs& c, double p);
double density_gaussian(const ClosedFormCoeffs& c, double p);
double density_staggered(const ClosedFormCoeffs& c, double p);
double density_eg(double alpha_eg, double u);

/// Least-squares slope of log pdf against log x on a log-spaced grid.
double loglog_tail_slope(const DensityHandle& d, double lo = 1e3, double hi = 1e6, int points = 61);

/// Writes "x,pdf,cdf" rows for each grid point.
void write_density_csv(std::ostream& os, const DensityHandle& d, std::span<const double> grid);

struct TradeoffRow {
    double s = 0.0;
    double psi_eg = 0.0;
    double alpha_eg = 0.0;
};

struct TradeoffReport {
    std::vector<TradeoffRow> rows;
    bool growth_increasing = false;     // psi_EG strictly increasing in s
    bool alpha_decreasing = false;      // alpha_EG strictly decreasing in s
};

/// Pairs (psi_EG, alpha_EG) along an increasing grid of saving rates. Grid
/// points outside the growth regime are rejected with RegimeMismatch.
TradeoffReport growth_inequality_tradeoff(const EconomyParams& params, const ProductionFunction& pf,
                                          double theta_bar, std::span<const double> s_grid);

}  // namespace wealth

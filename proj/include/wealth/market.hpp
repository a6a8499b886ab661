#pragma once

#include <optional>
#include <string>

#include "wealth/production.hpp"

namespace wealth {

/// Competitive prices when every firm runs at capital-labour ratio lambda.
struct MarketState {
    double lambda = 0.0;  // = mean wealth per unit labour
    double rho = 0.0;     // return on capital, a g'(lambda)
    double omega = 0.0;   // wage rate, a [g(lambda) - lambda g'(lambda)]
};

/// Throws DomainError for p_bar <= 0 or non-finite.
MarketState clear(const EconomyParams& params, const ProductionFunction& pf, double p_bar);

struct StationaryRoots {
    double stable = 0.0;                 // the equilibrium, where s a g - nu p crosses downward
    std::optional<double> threshold;     // unstable poverty threshold (chi > 0 only)
};

/// Roots of s a g(p) = chi + nu p. Throws RegimeMismatch when the economy
/// grows without bound and NoStationaryState when no root exists.
StationaryRoots stationary_roots(const EconomyParams& params, const ProductionFunction& pf);

/// The stable root only.
double stationary_pbar(const EconomyParams& params, const ProductionFunction& pf);

enum class Regime { Stationary, EndogenousGrowth, ConditionalEndogenousGrowth };

std::string to_string(Regime r);

struct RegimeReport {
    Regime regime = Regime::Stationary;
    std::optional<double> p_bar_star;     // Stationary only
    std::optional<double> poverty_threshold;
    std::optional<double> psi_eg;         // growth regimes only
    double rho_star = 0.0;
    double omega_star = 0.0;
    std::optional<double> alpha;          // Pareto exponent; empty when undefined (tau_k = 0 under growth)
    std::string note;
};

/// Long-run classification. `theta_bar` is the mean portfolio concentration
/// entering the Pareto exponent. Throws KnifeEdge when s a g'(inf) == nu.
RegimeReport classify_regime(const EconomyParams& params, const ProductionFunction& pf, double theta_bar = 1.0);

}  // namespace wealth

#include "wealth/market.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "wealth/analytics.hpp"
#include "wealth/errors.hpp"

namespace wealth {

namespace {

constexpr double kLowerBracket = 1e-6;
constexpr double kUpperBracket = 1e6;
constexpr double kUpperLimit = 1e300;

// Bisection in log p. `f(lo)` and `f(hi)` must have opposite signs (or one is zero).
double bisect_log(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    if (f(hi) == 0.0) return hi;
    double x_lo = std::log(lo), x_hi = std::log(hi);
    for (int it = 0; it < 200; ++it) {
        const double x_mid = 0.5 * (x_lo + x_hi);
        if (x_mid <= x_lo || x_mid >= x_hi) break;
        const double fm = f(std::exp(x_mid));
        if (fm == 0.0) return std::exp(x_mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            x_lo = x_mid;
            flo = fm;
        } else {
            x_hi = x_mid;
        }
    }
    return std::exp(0.5 * (x_lo + x_hi));
}

// Grows `hi` tenfold until `negative(hi)` holds.
double expand_until(const std::function<bool(double)>& negative, double hi) {
    while (!negative(hi)) {
        hi *= 10.0;
        if (hi > kUpperLimit) throw NoStationaryState("stationary_pbar: no sign change below 1e300");
    }
    return hi;
}

}  // namespace

MarketState clear(const EconomyParams& params, const ProductionFunction& pf, double p_bar) {
    if (!(p_bar > 0.0) || !std::isfinite(p_bar)) {
        std::ostringstream os;
        os << "clear: mean wealth must be positive and finite, got " << p_bar;
        throw DomainError(os.str());
    }
    return {p_bar, params.a * pf.g_prime(p_bar), params.a * pf.wage_share(p_bar)};
}

StationaryRoots stationary_roots(const EconomyParams& params, const ProductionFunction& pf) {
    require_valid(params);
    const double sa = params.s * params.a;
    if (sa * pf.g_prime_limit() > params.nu)
        throw RegimeMismatch("stationary_pbar: s a g'(inf) > nu, the economy grows without bound");
    if (sa * pf.g_prime_limit() == params.nu)
        throw RegimeMismatch("stationary_pbar: knife-edge s a g'(inf) = nu has no stationary state");

    // h(p) = s a g(p) - chi - nu p is concave; divide by p to avoid cancellation for large p.
    const auto excess = [&](double p) { return sa * pf.average_product(p) - params.chi / p - params.nu; };
    const auto slope = [&](double p) { return sa * pf.g_prime(p) - params.nu; };

    double peak = kLowerBracket;
    if (slope(kLowerBracket) > 0.0) {
        const double hi = expand_until([&](double p) { return slope(p) < 0.0; }, kUpperBracket);
        peak = bisect_log(slope, kLowerBracket, hi);
    }
    if (excess(peak) < 0.0) {
        std::ostringstream os;
        os << "stationary_pbar: s a g(p) < chi + nu p for all p > 0 (chi=" << params.chi << ", nu=" << params.nu
           << ")";
        throw NoStationaryState(os.str());
    }

    StationaryRoots roots;
    const double hi = expand_until([&](double p) { return excess(p) < 0.0; }, std::max(kUpperBracket, peak * 10.0));
    roots.stable = bisect_log(excess, peak, hi);
    if (params.chi > 0.0 && excess(kLowerBracket) < 0.0) roots.threshold = bisect_log(excess, kLowerBracket, peak);
    return roots;
}

double stationary_pbar(const EconomyParams& params, const ProductionFunction& pf) {
    return stationary_roots(params, pf).stable;
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Stationary: return "Stationary";
        case Regime::EndogenousGrowth: return "EndogenousGrowth";
        case Regime::ConditionalEndogenousGrowth: return "ConditionalEndogenousGrowth";
    }
    return "Unknown";
}

RegimeReport classify_regime(const EconomyParams& params, const ProductionFunction& pf, double theta_bar) {
    require_valid(params);
    if (!(theta_bar > 0.0)) throw DomainError("classify_regime: theta_bar must be > 0");
    const double sa = params.s * params.a;
    const double rho_limit = params.a * pf.g_prime_limit();

    if (params.s * rho_limit == params.nu) {
        // Stationary side: nu - s(1-tau_k) rho* = s tau_k rho* at the boundary.
        const double one_minus_tk = 1.0 - params.tau_k;
        const double noise = params.delta * params.s * params.s * one_minus_tk * one_minus_tk * rho_limit * rho_limit *
                             theta_bar;
        const double a_stat = 1.0 + 2.0 * params.s * params.tau_k * rho_limit / noise;
        const double a_eg = params.tau_k > 0.0 ? alpha_eg(params, rho_limit, theta_bar) : a_stat;
        std::ostringstream os;
        os << "knife-edge: s a g'(inf) = nu = " << params.nu << "; alpha limits stationary=" << a_stat
           << " growth=" << a_eg;
        throw KnifeEdge(os.str(), a_stat, a_eg);
    }

    RegimeReport r;
    if (params.s * rho_limit > params.nu) {
        r.regime = pf.g_at_zero() > params.chi / sa ? Regime::EndogenousGrowth : Regime::ConditionalEndogenousGrowth;
        r.rho_star = rho_limit;
        r.omega_star = 0.0;
        r.psi_eg = params.s * rho_limit - params.nu;
        if (params.tau_k > 0.0) {
            r.alpha = alpha_eg(params, rho_limit, theta_bar);
        } else {
            r.note = "tau_k = 0: relative wealth follows independent log-normal processes, no Pareto exponent";
        }
        if (r.regime == Regime::ConditionalEndogenousGrowth)
            r.note = "growth only from sufficiently high initial wealth (g(0) <= chi/(s a))";
        return r;
    }

    const StationaryRoots roots = stationary_roots(params, pf);
    const MarketState m = clear(params, pf, roots.stable);
    r.regime = Regime::Stationary;
    r.p_bar_star = roots.stable;
    r.poverty_threshold = roots.threshold;
    r.rho_star = m.rho;
    r.omega_star = m.omega;
    r.alpha = alpha_stationary(params, m.rho, theta_bar);
    return r;
}

}  // namespace wealth

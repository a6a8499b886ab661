#include "wealth/analytics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "wealth/errors.hpp"

namespace wealth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadTol = 1e-12;
constexpr unsigned kQuadDepth = 15;

template <class F>
double integrate(F&& f, double a, double b) {
    if (!(b > a)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, kQuadDepth, kQuadTol);
}

void require_open_unit_q(double q) {
    if (!(q > 0.0 && q < 1.0)) {
        std::ostringstream os;
        os << "quantile: probability must lie in (0,1), got " << q;
        throw DomainError(os.str());
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Coefficients and exponents

ClosedFormCoeffs coeffs(const EconomyParams& p, const MarketState& m, const DiagonalMeans& o) {
    const double one_k = 1.0 - p.tau_k;
    const double one_l = 1.0 - p.tau_l;
    const double ds2 = p.delta * p.s * p.s;
    ClosedFormCoeffs c;
    c.z0 = p.s * (m.omega + p.tau_k * m.rho * m.lambda) - p.chi;
    c.z1 = p.nu - p.s * one_k * m.rho;
    c.a0 = ds2 * one_l * one_l * m.omega * m.omega * o.phi_bar;
    c.a1 = 2.0 * ds2 * one_k * one_l * m.rho * m.omega * o.omega_bar;
    c.a2 = ds2 * one_k * one_k * m.rho * m.rho * o.theta_bar;
    if (!(c.z1 > 0.0)) {
        std::ostringstream os;
        os << "coeffs: z1 = nu - s(1-tau_k) rho* = " << c.z1 << " is not positive; no stationary distribution";
        throw RegimeMismatch(os.str());
    }
    return c;
}

double alpha_stationary(const EconomyParams& p, double rho_star, double theta_bar) {
    const double one_k = 1.0 - p.tau_k;
    const double num = p.nu - p.s * one_k * rho_star;
    if (!(num > 0.0)) {
        std::ostringstream os;
        os << "alpha_stationary: nu - s(1-tau_k) rho* = " << num << " must be positive";
        throw RegimeMismatch(os.str());
    }
    const double den = p.delta * p.s * p.s * one_k * one_k * rho_star * rho_star * theta_bar;
    if (den == 0.0) return kInf;
    return 1.0 + 2.0 * num / den;
}

double alpha_eg(const EconomyParams& p, double rho_star, double theta_bar) {
    if (p.tau_k == 0.0)
        throw DegenerateDynamics("alpha_eg: tau_k = 0 leaves relative wealth without a stationary law");
    const double one_k = 1.0 - p.tau_k;
    const double den = p.delta * p.s * one_k * one_k * rho_star * theta_bar;
    if (den == 0.0) return kInf;
    return 1.0 + 2.0 * p.tau_k / den;
}

std::string to_string(DensityKind k) {
    switch (k) {
        case DensityKind::DeltaComplete: return "DeltaComplete";
        case DensityKind::GaussianLaborOnly: return "GaussianLaborOnly";
        case DensityKind::IncompleteMarkets: return "IncompleteMarkets";
        case DensityKind::StaggeredWages: return "StaggeredWages";
        case DensityKind::EndogenousGrowthRelative: return "EndogenousGrowthRelative";
    }
    return "Unknown";
}

// ---------------------------------------------------------------------------
// Handles

DensityHandle DensityHandle::delta(double p_bar) {
    DensityHandle d;
    d.kind_ = DensityKind::DeltaComplete;
    d.lo_ = d.hi_ = d.mode_ = p_bar;
    d.alpha_ = kInf;
    return d;
}

DensityHandle DensityHandle::gaussian(const ClosedFormCoeffs& c) {
    if (!(c.z1 > 0.0) || !(c.a0 > 0.0)) throw DomainError("gaussian density needs z1 > 0 and a0 > 0");
    DensityHandle d;
    d.kind_ = DensityKind::GaussianLaborOnly;
    d.c_ = c;
    d.lo_ = -kInf;
    d.hi_ = kInf;
    d.alpha_ = kInf;
    d.p1_ = c.z0 / c.z1;
    d.p2_ = std::sqrt(c.a0 / (2.0 * c.z1));
    d.mode_ = d.p1_;
    d.log_norm_ = -0.5 * std::log(2.0 * std::numbers::pi) - std::log(d.p2_);
    return d;
}

DensityHandle DensityHandle::staggered(const ClosedFormCoeffs& c) {
    if (!(c.z0 > 0.0) || !(c.z1 > 0.0) || !(c.a2 > 0.0))
        throw DomainError("staggered-wage density needs z0 > 0, z1 > 0, a2 > 0");
    DensityHandle d;
    d.kind_ = DensityKind::StaggeredWages;
    d.c_ = c;
    d.lo_ = 0.0;
    d.hi_ = kInf;
    d.p1_ = 1.0 + 2.0 * c.z1 / c.a2;  // shape
    d.p2_ = 2.0 * c.z0 / c.a2;        // scale
    d.alpha_ = d.p1_;
    d.mode_ = c.z0 / (c.z1 + c.a2);
    d.log_norm_ = d.p1_ * std::log(d.p2_) - std::lgamma(d.p1_);
    return d;
}

DensityHandle DensityHandle::endogenous_growth(double alpha) {
    if (!(alpha > 1.0) || !std::isfinite(alpha)) {
        std::ostringstream os;
        os << "endogenous-growth density needs finite alpha > 1, got " << alpha;
        throw DomainError(os.str());
    }
    DensityHandle d;
    d.kind_ = DensityKind::EndogenousGrowthRelative;
    d.lo_ = 0.0;
    d.hi_ = kInf;
    d.p1_ = alpha;
    d.p2_ = alpha - 1.0;
    d.alpha_ = alpha;
    d.mode_ = (alpha - 1.0) / (alpha + 1.0);
    d.log_norm_ = alpha * std::log(alpha - 1.0) - std::lgamma(alpha);
    return d;
}

DensityHandle DensityHandle::incomplete(const ClosedFormCoeffs& c) {
    if (!(c.z1 > 0.0) || !(c.a2 > 0.0)) throw DomainError("incomplete-market density needs z1 > 0 and a2 > 0");
    if (!(c.discriminant() > 0.0)) {
        std::ostringstream os;
        os << "incomplete-market density: 4 a0 a2 - a1^2 = " << c.discriminant()
           << " is not positive (Omega_bar^2 = Theta_bar Phi_bar boundary is unsupported)";
        throw DegenerateDiscriminant(os.str());
    }
    DensityHandle d;
    d.kind_ = DensityKind::IncompleteMarkets;
    d.c_ = c;
    d.lo_ = -kInf;
    d.hi_ = kInf;
    d.alpha_ = c.pareto_exponent();
    const double e = 1.0 + c.z1 / c.a2;
    d.mode_ = (2.0 * c.arctan_prefactor() / e - c.a1) / (2.0 * c.a2);
    const double q_mode = c.a0 + c.a1 * d.mode_ + c.a2 * d.mode_ * d.mode_;
    d.width_ = std::sqrt(q_mode / (2.0 * (c.a2 + c.z1)));
    d.log_peak_ = 0.0;
    d.log_peak_ = d.log_unnormalized(d.mode_);
    d.total_ = d.lower_tail_mass(d.mode_) + d.upper_tail_mass(d.mode_);
    const double q_min = c.discriminant() / (4.0 * c.a2);
    d.log_norm_ = e * std::log(q_min) - d.log_peak_ - std::log(d.total_);
    return d;
}

DensityHandle DensityHandle::for_coeffs(const ClosedFormCoeffs& c) {
    if (c.a0 == 0.0 && c.a1 == 0.0 && c.a2 == 0.0) return delta(c.z0 / c.z1);
    if (c.a1 == 0.0 && c.a2 == 0.0) return gaussian(c);
    if (c.a0 == 0.0 && c.a1 == 0.0) return staggered(c);
    return incomplete(c);
}

// log of Q^-(1+z1/a2) exp(K atan(.)) with the constant log(Q_min) factor
// dropped, relative to the mode.
double DensityHandle::log_unnormalized(double x) const {
    const double e = 1.0 + c_.z1 / c_.a2;
    const double disc = c_.discriminant();
    const double root_disc = std::sqrt(disc);
    const double centre = -c_.a1 / (2.0 * c_.a2);
    const double q_min = disc / (4.0 * c_.a2);
    const double dx = x - centre;
    const double log_q_rel = std::log1p(c_.a2 * dx * dx / q_min);
    const double k = 4.0 * c_.arctan_prefactor() / root_disc;
    return -e * log_q_rel + k * std::atan((c_.a1 + 2.0 * c_.a2 * x) / root_disc) - log_peak_;
}

// Tails are integrated in t = log|x - mode|, where the algebraic decay
// |x|^-(alpha+1) becomes exp(-alpha t); the remainder past the last node is
// added from that asymptotic form.
double DensityHandle::lower_tail_mass(double x) const {
    const auto f = [this](double p) { return std::exp(log_unnormalized(p)); };
    x = std::min(x, mode_);
    const double edge = mode_ - width_;
    double body = 0.0;
    double start = x;
    if (x > edge) {
        body = integrate(f, edge, x);
        start = edge;
    }
    const auto g = [&](double t) {
        const double r = std::exp(t);
        return f(mode_ - r) * r;
    };
    const double t0 = std::log(mode_ - start);
    const double t1 = t0 + std::max(8.0, 45.0 / alpha_);
    return body + integrate(g, t0, t1) + g(t1) / alpha_;
}

double DensityHandle::upper_tail_mass(double x) const {
    const auto f = [this](double p) { return std::exp(log_unnormalized(p)); };
    x = std::max(x, mode_);
    const double edge = mode_ + width_;
    double body = 0.0;
    double start = x;
    if (x < edge) {
        body = integrate(f, x, edge);
        start = edge;
    }
    const auto g = [&](double t) {
        const double r = std::exp(t);
        return f(mode_ + r) * r;
    };
    const double t0 = std::log(start - mode_);
    const double t1 = t0 + std::max(8.0, 45.0 / alpha_);
    return body + integrate(g, t0, t1) + g(t1) / alpha_;
}

double DensityHandle::log_pdf(double x) const {
    switch (kind_) {
        case DensityKind::DeltaComplete: return x == mode_ ? kInf : -kInf;
        case DensityKind::GaussianLaborOnly: {
            const double z = (x - p1_) / p2_;
            return log_norm_ - 0.5 * z * z;
        }
        case DensityKind::StaggeredWages:
        case DensityKind::EndogenousGrowthRelative:
            if (!(x > 0.0)) {
                if (kind_ == DensityKind::StaggeredWages && x <= 0.0)
                    throw DomainError("staggered-wage density is defined for p > 0 only");
                return -kInf;
            }
            return log_norm_ - (p1_ + 1.0) * std::log(x) - p2_ / x;
        case DensityKind::IncompleteMarkets: return log_unnormalized(x) - std::log(total_);
    }
    return -kInf;
}

double DensityHandle::pdf(double x) const { return std::exp(log_pdf(x)); }

double DensityHandle::cdf(double x) const {
    switch (kind_) {
        case DensityKind::DeltaComplete: return x >= mode_ ? 1.0 : 0.0;
        case DensityKind::GaussianLaborOnly: return 0.5 * std::erfc(-(x - p1_) / (p2_ * std::numbers::sqrt2));
        case DensityKind::StaggeredWages:
        case DensityKind::EndogenousGrowthRelative:
            if (!(x > 0.0)) return 0.0;
            if (std::isinf(x)) return 1.0;
            return boost::math::gamma_q(p1_, p2_ / x);
        case DensityKind::IncompleteMarkets:
            if (x == -kInf) return 0.0;
            if (x == kInf) return 1.0;
            if (x <= mode_) return lower_tail_mass(x) / total_;
            return 1.0 - upper_tail_mass(x) / total_;
    }
    return 0.0;
}

double DensityHandle::quantile(double q) const {
    require_open_unit_q(q);
    switch (kind_) {
        case DensityKind::DeltaComplete: return mode_;
        case DensityKind::GaussianLaborOnly: return p1_ - p2_ * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
        case DensityKind::StaggeredWages:
        case DensityKind::EndogenousGrowthRelative: return p2_ / boost::math::gamma_q_inv(p1_, q);
        case DensityKind::IncompleteMarkets: break;
    }
    double step = width_;
    double lo = mode_ - step, hi = mode_ + step;
    while (cdf(lo) > q) {
        step *= 2.0;
        lo = mode_ - step;
    }
    step = width_;
    while (cdf(hi) < q) {
        step *= 2.0;
        hi = mode_ + step;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (cdf(mid) < q)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double DensityHandle::mean() const {
    switch (kind_) {
        case DensityKind::DeltaComplete: return mode_;
        case DensityKind::GaussianLaborOnly: return p1_;
        case DensityKind::StaggeredWages:
        case DensityKind::EndogenousGrowthRelative:
            return p1_ > 1.0 ? p2_ / (p1_ - 1.0) : std::numeric_limits<double>::quiet_NaN();
        case DensityKind::IncompleteMarkets: break;
    }
    if (!(alpha_ > 1.0)) return std::numeric_limits<double>::quiet_NaN();
    const auto xf = [this](double p) { return p * pdf(p); };
    const double edge_lo = mode_ - width_, edge_hi = mode_ + width_;
    const auto up = [&](double t) {
        const double r = std::exp(t);
        return xf(mode_ + r) * r;
    };
    const auto down = [&](double t) {
        const double r = std::exp(t);
        return xf(mode_ - r) * r;
    };
    const double t0 = std::log(width_);
    const double t1 = t0 + std::max(8.0, 45.0 / (alpha_ - 1.0));
    return integrate(xf, edge_lo, edge_hi) + integrate(up, t0, t1) + integrate(down, t0, t1);
}

double density_incomplete(const ClosedFormCoeffs& c, double p) { return DensityHandle::incomplete(c).pdf(p); }
double density_gaussian(const ClosedFormCoeffs& c, double p) {
    if (c.a1 != 0.0 || c.a2 != 0.0) throw DomainError("density_gaussian applies to a1 = a2 = 0 only");
    return DensityHandle::gaussian(c).pdf(p);
}
double density_staggered(const ClosedFormCoeffs& c, double p) { return DensityHandle::staggered(c).pdf(p); }
double density_eg(double alpha_eg, double u) {
    if (!(u > 0.0)) throw DomainError("density_eg is defined for u > 0 only");
    return DensityHandle::endogenous_growth(alpha_eg).pdf(u);
}

double loglog_tail_slope(const DensityHandle& d, double lo, double hi, int points) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < points; ++i) {
        const double lx = std::log(lo) + (std::log(hi) - std::log(lo)) * i / (points - 1);
        const double ly = d.log_pdf(std::exp(lx));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = points;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_density_csv(std::ostream& os, const DensityHandle& d, std::span<const double> grid) {
    const auto old = os.precision(17);
    os << "x,pdf,cdf\n";
    for (double x : grid) os << x << ',' << d.pdf(x) << ',' << d.cdf(x) << '\n';
    os.precision(old);
}

TradeoffReport growth_inequality_tradeoff(const EconomyParams& params, const ProductionFunction& pf,
                                          double theta_bar, std::span<const double> s_grid) {
    TradeoffReport rep;
    for (double s : s_grid) {
        EconomyParams p = params;
        p.s = s;
        const RegimeReport r = classify_regime(p, pf, theta_bar);
        if (r.regime == Regime::Stationary || !r.alpha) {
            std::ostringstream os;
            os << "growth_inequality_tradeoff: s=" << s << " is not in the growth regime with a Pareto exponent";
            throw RegimeMismatch(os.str());
        }
        rep.rows.push_back({s, *r.psi_eg, *r.alpha});
    }
    rep.growth_increasing = rep.alpha_decreasing = rep.rows.size() >= 2;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        rep.growth_increasing = rep.growth_increasing && rep.rows[i].psi_eg > rep.rows[i - 1].psi_eg;
        rep.alpha_decreasing = rep.alpha_decreasing && rep.rows[i].alpha_eg < rep.rows[i - 1].alpha_eg;
    }
    return rep;
}

}  // namespace wealth

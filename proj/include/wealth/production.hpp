#pragma once

#include <string>
#include <variant>
#include <vector>

namespace wealth {

/// Exogenous scalars of the economy. Units: rates are per unit time,
/// chi is wealth per unit time, delta is time (shock variance is a^2 * delta * dt).
struct EconomyParams {
    double s = 0.2;       // saving rate, (0, 1]
    double tau_k = 0.0;   // capital income tax, [0, 1)
    double tau_l = 0.0;   // labour income tax, [0, 1)
    double chi = 0.0;     // minimal consumption, >= 0
    double nu = 0.05;     // consumption rate out of wealth, > 0
    double a = 1.0;       // mean productivity, > 0
    double delta = 1.0;   // shock variance scale, >= 0
};

/// Lists every violated range constraint. Empty means valid.
std::vector<std::string> validate_params(const EconomyParams& p);

/// Throws DomainError carrying the joined report when `p` is invalid.
void require_valid(const EconomyParams& p);

struct Ces {
    double epsilon;  // capital weight, (0, 1)
    double gamma;    // substitution exponent, (0, 1)
};

struct CobbDouglas {
    double epsilon;  // capital share, (0, 1)
};

/// Per-worker technology g(lambda) of a degree-one homogeneous q(k, l) = l g(k / l).
class ProductionFunction {
public:
    using Variant = std::variant<Ces, CobbDouglas>;

    /// Throws DomainError when the parameters leave their ranges.
    explicit ProductionFunction(Variant v);

    static ProductionFunction ces(double epsilon, double gamma) { return ProductionFunction(Ces{epsilon, gamma}); }
    static ProductionFunction cobb_douglas(double epsilon) { return ProductionFunction(CobbDouglas{epsilon}); }

    const Variant& variant() const noexcept { return v_; }
    std::string describe() const;

    double g(double lambda) const;
    double g_prime(double lambda) const;
    /// g(lambda) - lambda g'(lambda), evaluated without cancellation.
    double wage_share(double lambda) const;
    /// g(lambda) / lambda.
    double average_product(double lambda) const;
    /// lim_{lambda -> inf} g'(lambda).
    double g_prime_limit() const noexcept;
    /// lim_{lambda -> 0+} g(lambda).
    double g_at_zero() const noexcept;

private:
    Variant v_;
};

inline double eval_g(const ProductionFunction& pf, double lambda) { return pf.g(lambda); }
inline double eval_g_prime(const ProductionFunction& pf, double lambda) { return pf.g_prime(lambda); }
inline double g_prime_limit(const ProductionFunction& pf) { return pf.g_prime_limit(); }

/// Samples g' on a log grid over [lo, hi] and reports any point where g' <= 0
/// or g' increases. Empty result means increasing and concave on the grid.
std::vector<std::string> check_shape(const ProductionFunction& pf, double lo = 1e-4, double hi = 1e6,
                                     int points = 400);

}  // namespace wealth

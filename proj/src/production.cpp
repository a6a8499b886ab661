#include "wealth/production.hpp"

#include <cmath>
#include <sstream>

#include "wealth/errors.hpp"

namespace wealth {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        std::ostringstream os;
        os << "production: lambda must be positive and finite, got " << lambda;
        throw DomainError(os.str());
    }
}

bool open_unit(double x) { return x > 0.0 && x < 1.0; }

// CES in terms of x = lambda^-gamma keeps everything O(1) for large lambda:
//   g(l)/l = [eps + (1-eps) x]^(1/gamma),  g'(l) = eps [eps + (1-eps) x]^((1-gamma)/gamma).
double ces_inner(const Ces& c, double lambda) {
    return c.epsilon + (1.0 - c.epsilon) * std::exp(-c.gamma * std::log(lambda));
}

}  // namespace

std::vector<std::string> validate_params(const EconomyParams& p) {
    std::vector<std::string> out;
    auto finite = [&](double v, const char* name) {
        if (!std::isfinite(v)) out.push_back(std::string(name) + " must be finite");
        return std::isfinite(v);
    };
    if (finite(p.s, "s") && !(p.s > 0.0 && p.s <= 1.0)) out.emplace_back("s out of (0,1]");
    if (finite(p.tau_k, "tau_k") && !(p.tau_k >= 0.0 && p.tau_k < 1.0)) out.emplace_back("tau_k out of [0,1)");
    if (finite(p.tau_l, "tau_l") && !(p.tau_l >= 0.0 && p.tau_l < 1.0)) out.emplace_back("tau_l out of [0,1)");
    if (finite(p.chi, "chi") && !(p.chi >= 0.0)) out.emplace_back("chi must be >= 0");
    if (finite(p.nu, "nu") && !(p.nu > 0.0)) out.emplace_back("nu must be > 0");
    if (finite(p.a, "a") && !(p.a > 0.0)) out.emplace_back("a must be > 0");
    if (finite(p.delta, "delta") && !(p.delta >= 0.0)) out.emplace_back("delta must be >= 0");
    return out;
}

void require_valid(const EconomyParams& p) {
    const auto report = validate_params(p);
    if (report.empty()) return;
    std::string msg = "invalid economy parameters:";
    for (const auto& r : report) msg += " " + r + ";";
    throw DomainError(msg);
}

ProductionFunction::ProductionFunction(Variant v) : v_(v) {
    std::visit(Overloaded{
                   [](const Ces& c) {
                       if (!open_unit(c.epsilon) || !open_unit(c.gamma))
                           throw DomainError("CES requires epsilon, gamma in (0,1)");
                   },
                   [](const CobbDouglas& c) {
                       if (!open_unit(c.epsilon)) throw DomainError("Cobb-Douglas requires epsilon in (0,1)");
                   },
               },
               v_);
}

std::string ProductionFunction::describe() const {
    std::ostringstream os;
    std::visit(Overloaded{
                   [&](const Ces& c) { os << "CES(epsilon=" << c.epsilon << ", gamma=" << c.gamma << ")"; },
                   [&](const CobbDouglas& c) { os << "CobbDouglas(epsilon=" << c.epsilon << ")"; },
               },
               v_);
    return os.str();
}

double ProductionFunction::average_product(double lambda) const {
    check_lambda(lambda);
    return std::visit(Overloaded{
                          [&](const Ces& c) { return std::pow(ces_inner(c, lambda), 1.0 / c.gamma); },
                          [&](const CobbDouglas& c) { return std::exp((c.epsilon - 1.0) * std::log(lambda)); },
                      },
                      v_);
}

double ProductionFunction::g(double lambda) const {
    check_lambda(lambda);
    return std::visit(Overloaded{
                          [&](const Ces& c) {
                              return std::exp(std::log(lambda) + std::log(ces_inner(c, lambda)) / c.gamma);
                          },
                          [&](const CobbDouglas& c) { return std::exp(c.epsilon * std::log(lambda)); },
                      },
                      v_);
}

double ProductionFunction::g_prime(double lambda) const {
    check_lambda(lambda);
    return std::visit(Overloaded{
                          [&](const Ces& c) {
                              return c.epsilon * std::pow(ces_inner(c, lambda), (1.0 - c.gamma) / c.gamma);
                          },
                          [&](const CobbDouglas& c) {
                              return c.epsilon * std::exp((c.epsilon - 1.0) * std::log(lambda));
                          },
                      },
                      v_);
}

double ProductionFunction::wage_share(double lambda) const {
    check_lambda(lambda);
    return std::visit(Overloaded{
                          // (1-eps) [eps lambda^gamma + 1 - eps]^(1/gamma - 1)
                          [&](const Ces& c) {
                              const double lg = c.gamma * std::log(lambda);
                              const double log_bracket = lg + std::log(ces_inner(c, lambda));
                              return (1.0 - c.epsilon) * std::exp(log_bracket * (1.0 - c.gamma) / c.gamma);
                          },
                          [&](const CobbDouglas& c) {
                              return (1.0 - c.epsilon) * std::exp(c.epsilon * std::log(lambda));
                          },
                      },
                      v_);
}

double ProductionFunction::g_prime_limit() const noexcept {
    return std::visit(Overloaded{
                          [](const Ces& c) { return std::pow(c.epsilon, 1.0 / c.gamma); },
                          [](const CobbDouglas&) { return 0.0; },
                      },
                      v_);
}

double ProductionFunction::g_at_zero() const noexcept {
    return std::visit(Overloaded{
                          [](const Ces& c) { return std::pow(1.0 - c.epsilon, 1.0 / c.gamma); },
                          [](const CobbDouglas&) { return 0.0; },
                      },
                      v_);
}

std::vector<std::string> check_shape(const ProductionFunction& pf, double lo, double hi, int points) {
    std::vector<std::string> out;
    double prev = 0.0;
    for (int i = 0; i < points; ++i) {
        const double lambda = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
        const double d = pf.g_prime(lambda);
        std::ostringstream os;
        if (!(d > 0.0)) {
            os << "g' not positive at lambda=" << lambda;
            out.push_back(os.str());
        } else if (i > 0 && d > prev * (1.0 + 1e-12)) {
            os << "g' increases at lambda=" << lambda;
            out.push_back(os.str());
        }
        prev = d;
    }
    return out;
}

}  // namespace wealth

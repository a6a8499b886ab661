#include "wealth/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

#include "wealth/errors.hpp"

namespace wealth {

namespace {

constexpr int kChunk = 4096;
constexpr std::uint32_t kStreamFirm = 1;
constexpr std::uint32_t kStreamRelative = 2;
constexpr std::uint32_t kStreamDirect = 3;
constexpr int kPositivityRetries = 16;
constexpr int kMaxHalvings = 30;

int chunk_count(int n) { return (n + kChunk - 1) / kChunk; }

// Runs body(chunk, begin, end) for every fixed-size chunk. Chunk boundaries do
// not depend on `threads`, so per-chunk partial results combine identically.
template <typename Body>
void for_chunks(int n, int threads, Body&& body) {
    const int chunks = chunk_count(n);
    const int workers = std::min(threads, chunks);
    if (workers <= 1) {
        for (int c = 0; c < chunks; ++c) body(c, c * kChunk, std::min(n, (c + 1) * kChunk));
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int c = w; c < chunks; c += workers) body(c, c * kChunk, std::min(n, (c + 1) * kChunk));
        });
    }
    for (auto& t : pool) t.join();
}

double chunked_sum(std::span<const double> x, int threads) {
    const int n = static_cast<int>(x.size());
    std::vector<double> partial(chunk_count(n), 0.0);
    for_chunks(n, threads, [&](int c, int b, int e) {
        double s = 0.0;
        for (int i = b; i < e; ++i) s += x[i];
        partial[c] = s;
    });
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

double mean_of(std::span<const double> x, int threads = 1) {
    return chunked_sum(x, threads) / static_cast<double>(x.size());
}

std::uint32_t mix32(std::uint32_t x) {
    x ^= x >> 16;
    x *= 0x7feb352dU;
    x ^= x >> 15;
    x *= 0x846ca68bU;
    x ^= x >> 16;
    return x;
}

// Schedules snapshot m at step round((burn_in + m record_every) / dt).
std::vector<std::int64_t> snapshot_steps(const SimulationConfig& cfg, std::int64_t n_steps) {
    std::vector<std::int64_t> steps;
    const int count = snapshot_count(cfg);
    steps.reserve(count);
    for (int m = 0; m < count; ++m) {
        const double t = cfg.burn_in + m * cfg.record_every;
        steps.push_back(std::min(n_steps, static_cast<std::int64_t>(std::llround(t / cfg.dt))));
    }
    return steps;
}

std::int64_t step_count(const SimulationConfig& cfg) {
    return static_cast<std::int64_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
}

template <typename E>
[[noreturn]] void rethrow_at(const E& e, std::int64_t step, double dt) {
    std::ostringstream os;
    os << "step " << step << " (t=" << step * dt << "): " << e.what();
    throw E(os.str());
}

void require_size(std::size_t got, int want, const char* what) {
    if (static_cast<int>(got) != want) {
        std::ostringstream os;
        os << what << ": expected " << want << " entries, got " << got;
        throw DimensionMismatch(os.str());
    }
}

}  // namespace

std::string to_string(NoiseModel m) {
    return m == NoiseModel::FirmShocks ? "FirmShocks" : "DirectCovariance";
}

std::string to_string(Scheme s) { return s == Scheme::EulerMaruyama ? "EulerMaruyama" : "Milstein"; }

std::string to_string(WageSetting w) { return w == WageSetting::Flexible ? "Flexible" : "Staggered"; }

void validate(const SimulationConfig& cfg) {
    std::vector<std::string> bad;
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) bad.emplace_back("dt must be > 0");
    if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) bad.emplace_back("t_end must be > 0");
    if (!(cfg.burn_in >= 0.0) || !(cfg.burn_in < cfg.t_end)) bad.emplace_back("burn_in must lie in [0, t_end)");
    if (!(cfg.record_every > 0.0)) bad.emplace_back("record_every must be > 0");
    if (cfg.threads < 1) bad.emplace_back("threads must be >= 1");
    if (!bad.empty()) {
        std::string msg = "invalid simulation config:";
        for (const auto& b : bad) msg += " " + b + ";";
        throw DomainError(msg);
    }
}

double default_dt(const EconomyParams& params, const ProductionFunction& pf, double lambda0) {
    return 0.01 / std::max(params.nu, params.s * params.a * pf.g_prime(lambda0));
}

std::vector<double> WealthPanel::pooled() const {
    std::vector<double> out;
    std::size_t total = 0;
    for (const auto& s : snapshots) total += s.size();
    out.reserve(total);
    for (const auto& s : snapshots) out.insert(out.end(), s.begin(), s.end());
    return out;
}

int snapshot_count(const SimulationConfig& cfg) {
    return static_cast<int>(std::floor((cfg.t_end - cfg.burn_in) / cfg.record_every + 1e-9)) + 1;
}

std::vector<double> sample_firm_shocks(int n_firms, const EconomyParams& params, double dt,
                                       const rng::CounterRng& rng, std::uint64_t step, bool remove_aggregate) {
    if (!(dt > 0.0)) throw DomainError("sample_firm_shocks: dt must be > 0");
    std::vector<double> dA(n_firms, params.a * dt);
    if (params.delta == 0.0) return dA;
    std::vector<double> xi(n_firms);
    for (int j = 0; j < n_firms; ++j) xi[j] = rng.normal(kStreamFirm, step, static_cast<std::uint32_t>(j));
    if (remove_aggregate) {
        double m = 0.0;
        for (double v : xi) m += v;
        m /= n_firms;
        for (double& v : xi) v -= m;
    }
    const double scale = params.a * std::sqrt(params.delta * dt);
    for (int j = 0; j < n_firms; ++j) dA[j] += scale * xi[j];
    return dA;
}

std::vector<double> step_absolute(std::span<const double> state, const EconomyParams& params,
                                  const AllocationNetwork& net, const ProductionFunction& pf,
                                  std::span<const double> shocks, double dt, const StepOptions& opts) {
    const int n = net.n_households();
    require_size(state.size(), n, "step_absolute state");
    require_size(shocks.size(), net.n_firms(), "step_absolute shocks");

    const double lambda = mean_of(state, opts.threads);
    if (!(lambda > 0.0)) {
        std::ostringstream os;
        os << "mean wealth " << lambda << " <= 0, prices undefined";
        throw PriceUndefined(os.str());
    }
    const double gp = pf.g_prime(lambda);
    const double wage = pf.wage_share(lambda);
    const bool staggered = opts.wage_setting == WageSetting::Staggered;

    // Uniform rows see the same firm average; compute it once.
    const Allocation& th = net.theta();
    const Allocation& ph = net.phi();
    const double theta_avg = th.is_uniform() ? th.row_dot(0, shocks) : 0.0;
    const double phi_avg = ph.is_uniform() ? ph.row_dot(0, shocks) : 0.0;

    std::vector<double> capital(n), labour(n);
    std::vector<double> tax_partial(chunk_count(n), 0.0);
    for_chunks(n, opts.threads, [&](int c, int b, int e) {
        double tax = 0.0;
        for (int i = b; i < e; ++i) {
            const double x = th.is_uniform() ? theta_avg : th.row_dot(i, shocks);
            const double y = staggered ? params.a * dt : (ph.is_uniform() ? phi_avg : ph.row_dot(i, shocks));
            capital[i] = state[i] * gp * x;
            labour[i] = wage * y;
            tax += params.tau_k * capital[i] + params.tau_l * labour[i];
        }
        tax_partial[c] = tax;
    });
    double revenue = 0.0;
    for (double t : tax_partial) revenue += t;
    const double transfer = revenue / n;

    std::vector<double> next(n);
    std::vector<char> bad(chunk_count(n), 0);
    for_chunks(n, opts.threads, [&](int c, int b, int e) {
        for (int i = b; i < e; ++i) {
            const double net_income =
                (1.0 - params.tau_k) * capital[i] + (1.0 - params.tau_l) * labour[i] + transfer;
            next[i] = state[i] + params.s * net_income - params.chi * dt - params.nu * state[i] * dt;
            if (!std::isfinite(next[i])) bad[c] = 1;
        }
    });
    if (std::find(bad.begin(), bad.end(), 1) != bad.end()) throw NonFinite("wealth update overflowed");
    return next;
}

std::vector<double> drift(std::span<const double> state, const EconomyParams& params, const ProductionFunction& pf,
                          WageSetting) {
    const double lambda = mean_of(state);
    if (!(lambda > 0.0)) throw PriceUndefined("drift: mean wealth <= 0, prices undefined");
    const MarketState m = clear(params, pf, lambda);
    // Expected labour income is omega under either wage setting.
    const double common =
        params.s * ((1.0 - params.tau_l) * m.omega + params.tau_k * m.rho * lambda + params.tau_l * m.omega) -
        params.chi;
    const double slope = params.s * (1.0 - params.tau_k) * m.rho - params.nu;
    std::vector<double> out(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) out[i] = common + slope * state[i];
    return out;
}

WealthPanel run_absolute(const SimulationConfig& cfg_in, const EconomyParams& params, const AllocationNetwork& net,
                         const ProductionFunction& pf, std::span<const double> initial) {
    require_valid(params);
    const int n = net.n_households();
    require_size(initial.size(), n, "run_absolute initial");
    const double lambda0 = mean_of(initial);
    if (!(lambda0 > 0.0)) throw PriceUndefined("run_absolute: initial mean wealth <= 0");

    SimulationConfig cfg = cfg_in;
    if (cfg.dt == 0.0) cfg.dt = default_dt(params, pf, lambda0);
    validate(cfg);
    const double guard = params.s * (1.0 - params.tau_k) * params.a * pf.g_prime(lambda0) * cfg.dt;
    if (!(guard < 0.1)) {
        std::ostringstream os;
        os << "run_absolute: s (1 - tau_k) rho dt = " << guard << " >= 0.1, reduce dt";
        throw DomainError(os.str());
    }

    const std::int64_t n_steps = step_count(cfg);
    const std::vector<std::int64_t> record_at = snapshot_steps(cfg, n_steps);
    const rng::CounterRng rng(cfg.seed);
    const StepOptions opts{cfg.wage_setting, cfg.threads};

    WealthPanel panel;
    panel.kind = PanelKind::Absolute;
    panel.config = cfg;
    panel.mean_path.reserve(n_steps + 1);

    std::vector<double> state(initial.begin(), initial.end());
    std::size_t next_record = 0;
    const auto record = [&](std::int64_t k) {
        while (next_record < record_at.size() && record_at[next_record] == k) {
            panel.times.push_back(k * cfg.dt);
            panel.snapshots.push_back(state);
            ++next_record;
        }
    };
    panel.mean_path.push_back(lambda0);
    record(0);

    for (std::int64_t k = 0; k < n_steps; ++k) {
        try {
            if (cfg.noise_model == NoiseModel::FirmShocks) {
                const auto shocks = sample_firm_shocks(net.n_firms(), params, cfg.dt, rng,
                                                       static_cast<std::uint64_t>(k), cfg.remove_aggregate_shock);
                state = step_absolute(state, params, net, pf, shocks, cfg.dt, opts);
            } else {
                const auto mu = drift(state, params, pf, cfg.wage_setting);
                const Eigen::MatrixXd H = analytic_noise_covariance(params, net, pf, state, cfg.wage_setting);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
                const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
                Eigen::VectorXd xi(n);
                for (int i = 0; i < n; ++i)
                    xi[i] = rng.normal(kStreamDirect, static_cast<std::uint64_t>(k), static_cast<std::uint32_t>(i));
                const Eigen::VectorXd noise =
                    eig.eigenvectors() * (root.cwiseProduct(xi)) * std::sqrt(cfg.dt);
                for (int i = 0; i < n; ++i) {
                    state[i] += mu[i] * cfg.dt + noise[i];
                    if (!std::isfinite(state[i])) throw NonFinite("wealth update overflowed");
                }
            }
        } catch (const PriceUndefined& e) {
            rethrow_at(e, k, cfg.dt);
        } catch (const NonFinite& e) {
            rethrow_at(e, k, cfg.dt);
        }
        panel.mean_path.push_back(mean_of(state, cfg.threads));
        record(k + 1);
    }
    return panel;
}

MeanFieldPath integrate_mean_field(const EconomyParams& params, const ProductionFunction& pf, double p_bar_0,
                                   double t_end, double dt) {
    if (!(p_bar_0 > 0.0)) throw DomainError("integrate_mean_field: p_bar_0 must be > 0");
    if (!(dt > 0.0) || !(t_end >= 0.0)) throw DomainError("integrate_mean_field: need dt > 0 and t_end >= 0");
    const double sa = params.s * params.a;
    const auto f = [&](double p) { return sa * pf.g(p) - params.chi - params.nu * p; };
    MeanFieldPath out;
    out.dt = dt;
    const auto n = static_cast<std::int64_t>(std::ceil(t_end / dt - 1e-9));
    out.p_bar.reserve(n + 1);
    double p = p_bar_0;
    out.p_bar.push_back(p);
    for (std::int64_t k = 0; k < n; ++k) {
        const double h = std::min(dt, t_end - k * dt);
        const double k1 = f(p);
        const double k2 = f(p + 0.5 * h * k1);
        const double k3 = f(p + 0.5 * h * k2);
        const double k4 = f(p + h * k3);
        p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.p_bar.push_back(p);
    }
    return out;
}

namespace {

struct RelativeDynamics {
    double kappa;  // s rho* tau_k
    double sigma;  // per unit of u
    bool milstein;
};

double relative_proposal(const RelativeDynamics& d, double u, double h, double z) {
    const double dw = std::sqrt(h) * z;
    double next = u + d.kappa * (1.0 - u) * h + d.sigma * u * dw;
    if (d.milstein) next += 0.5 * d.sigma * d.sigma * u * (dw * dw - h);
    return next;
}

// Advances one household over `h`. Non-positive proposals are redrawn; after
// kPositivityRetries failures the interval is split in two.
double advance_relative(const RelativeDynamics& d, const rng::CounterRng& rng, double u, double h,
                        std::uint64_t step, std::uint32_t household, std::uint32_t stream, int depth) {
    for (int r = 0; r < kPositivityRetries; ++r) {
        const std::uint32_t s = r == 0 ? stream : mix32(stream ^ (0x9E3779B9u * static_cast<std::uint32_t>(r)));
        const double next = relative_proposal(d, u, h, rng.normal(s, step, household));
        if (next > 0.0) return next;
    }
    if (depth >= kMaxHalvings) throw DegenerateDynamics("relative wealth could not be kept positive");
    const std::uint32_t left = mix32(stream * 2u + 1u);
    const std::uint32_t right = mix32(stream * 2u + 2u);
    const double mid = advance_relative(d, rng, u, 0.5 * h, step, household, left, depth + 1);
    return advance_relative(d, rng, mid, 0.5 * h, step, household, right, depth + 1);
}

void renormalize(std::vector<double>& u, const SimulationConfig& cfg) {
    if (!cfg.renormalize_relative) return;
    const double m = mean_of(u, cfg.threads);
    if (!(m > 0.0) || !std::isfinite(m)) throw NonFinite("relative wealth mean is not positive and finite");
    const double inv = 1.0 / m;
    for_chunks(static_cast<int>(u.size()), cfg.threads, [&](int, int b, int e) {
        for (int i = b; i < e; ++i) u[i] *= inv;
    });
}

WealthPanel prepare_relative(SimulationConfig& cfg, const EconomyParams& params, double kappa,
                             std::span<const double> initial) {
    require_valid(params);
    if (params.tau_k == 0.0)
        throw DegenerateDynamics(
            "tau_k = 0: relative wealth reduces to independent log-normal processes with no stationary law");
    for (double u : initial)
        if (!(u > 0.0)) throw DomainError("run_relative_eg: initial relative wealth must be > 0");
    if (cfg.dt == 0.0) cfg.dt = 0.01 / kappa;
    validate(cfg);
    WealthPanel panel;
    panel.kind = PanelKind::Relative;
    panel.config = cfg;
    return panel;
}

}  // namespace

WealthPanel run_relative_eg(const SimulationConfig& cfg_in, const EconomyParams& params, double theta_bar,
                            double rho_star, std::span<const double> initial) {
    if (!(theta_bar >= 0.0) || !(rho_star > 0.0)) throw DomainError("run_relative_eg: need theta_bar >= 0, rho* > 0");
    SimulationConfig cfg = cfg_in;
    const RelativeDynamics d{params.s * rho_star * params.tau_k,
                             std::sqrt(params.delta * theta_bar) * params.s * (1.0 - params.tau_k) * rho_star,
                             cfg.scheme == Scheme::Milstein};
    WealthPanel panel = prepare_relative(cfg, params, d.kappa, initial);

    const int n = static_cast<int>(initial.size());
    const std::int64_t n_steps = step_count(cfg);
    const std::vector<std::int64_t> record_at = snapshot_steps(cfg, n_steps);
    const rng::CounterRng rng(cfg.seed);
    std::vector<double> u(initial.begin(), initial.end());
    std::size_t next_record = 0;
    const auto record = [&](std::int64_t k) {
        while (next_record < record_at.size() && record_at[next_record] == k) {
            panel.times.push_back(k * cfg.dt);
            panel.snapshots.push_back(u);
            ++next_record;
        }
    };
    panel.mean_path.push_back(mean_of(u));
    record(0);
    for (std::int64_t k = 0; k < n_steps; ++k) {
        for_chunks(n, cfg.threads, [&](int, int b, int e) {
            for (int i = b; i < e; ++i)
                u[i] = advance_relative(d, rng, u[i], cfg.dt, static_cast<std::uint64_t>(k),
                                        static_cast<std::uint32_t>(i), kStreamRelative, 0);
        });
        renormalize(u, cfg);
        panel.mean_path.push_back(mean_of(u, cfg.threads));
        record(k + 1);
    }
    return panel;
}

WealthPanel run_relative_eg(const SimulationConfig& cfg_in, const EconomyParams& params, const AllocationNetwork& net,
                            double rho_star, std::span<const double> initial) {
    if (!(rho_star > 0.0)) throw DomainError("run_relative_eg: need rho* > 0");
    require_size(initial.size(), net.n_households(), "run_relative_eg initial");
    SimulationConfig cfg = cfg_in;
    const double kappa = params.s * rho_star * params.tau_k;
    const double sigma0 = std::sqrt(params.delta) * params.s * (1.0 - params.tau_k) * rho_star;
    WealthPanel panel = prepare_relative(cfg, params, kappa, initial);

    const int n = net.n_households();
    const int f = net.n_firms();
    const std::int64_t n_steps = step_count(cfg);
    const std::vector<std::int64_t> record_at = snapshot_steps(cfg, n_steps);
    const rng::CounterRng rng(cfg.seed);
    const double sq = std::sqrt(cfg.dt);
    std::vector<double> u(initial.begin(), initial.end());
    std::vector<double> xi(f);
    std::size_t next_record = 0;
    const auto record = [&](std::int64_t k) {
        while (next_record < record_at.size() && record_at[next_record] == k) {
            panel.times.push_back(k * cfg.dt);
            panel.snapshots.push_back(u);
            ++next_record;
        }
    };
    panel.mean_path.push_back(mean_of(u));
    record(0);
    for (std::int64_t k = 0; k < n_steps; ++k) {
        for (int j = 0; j < f; ++j) xi[j] = rng.normal(kStreamFirm, static_cast<std::uint64_t>(k), j);
        for_chunks(n, cfg.threads, [&](int, int b, int e) {
            for (int i = b; i < e; ++i) {
                const double z = net.theta().row_dot(i, xi);
                double next = u[i] + kappa * (1.0 - u[i]) * cfg.dt + sigma0 * u[i] * z * sq;
                if (!(next > 0.0)) {
                    // Correlated draws cannot be redrawn per household; fall back to
                    // an independent draw with the same variance.
                    const double theta_ii = net.theta().row_square_norm(i);
                    RelativeDynamics d{kappa, sigma0 * std::sqrt(theta_ii), false};
                    next = advance_relative(d, rng, u[i], cfg.dt, static_cast<std::uint64_t>(k),
                                            static_cast<std::uint32_t>(i), mix32(kStreamRelative + 17u), 0);
                }
                u[i] = next;
            }
        });
        renormalize(u, cfg);
        panel.mean_path.push_back(mean_of(u, cfg.threads));
        record(k + 1);
    }
    return panel;
}

Eigen::MatrixXd analytic_noise_covariance(const EconomyParams& params, const AllocationNetwork& net,
                                          const ProductionFunction& pf, std::span<const double> wealth,
                                          WageSetting wage_setting) {
    const int n = net.n_households();
    require_size(wealth.size(), n, "analytic_noise_covariance wealth");
    const double lambda = mean_of(wealth);
    if (!(lambda > 0.0)) throw PriceUndefined("analytic_noise_covariance: mean wealth <= 0");
    const MarketState m = clear(params, pf, lambda);
    const bool staggered = wage_setting == WageSetting::Staggered;

    const OverlapStats ov = overlap_matrices(net);
    const Eigen::MatrixXd Theta(ov.Theta);
    const Eigen::MatrixXd Omega(ov.Omega);
    const Eigen::MatrixXd Phi(ov.Phi);
    const Eigen::Map<const Eigen::VectorXd> p(wealth.data(), n);

    const double ck = (1.0 - params.tau_k) * m.rho;
    const double cl = staggered ? 0.0 : (1.0 - params.tau_l) * m.omega;
    const double c = params.tau_k * m.rho + (staggered ? 0.0 : params.tau_l * m.omega / lambda);

    const Eigen::VectorXd vartheta = Theta * p;
    const Eigen::VectorXd varphi = Omega.transpose() * p;
    const FirmInputs inputs = firm_inputs(net, wealth);
    double sum_k2 = 0.0;
    for (double k : inputs.capital) sum_k2 += k * k;

    Eigen::MatrixXd H = ck * ck * (p * p.transpose()).cwiseProduct(Theta) + cl * cl * Phi;
    const Eigen::MatrixXd cross = p.asDiagonal() * Omega;
    H += ck * cl * (cross + cross.transpose());
    const Eigen::VectorXd own = ck * p.cwiseProduct(vartheta) + cl * varphi;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    H += (c / n) * (own * ones.transpose() + ones * own.transpose());
    H.array() += c * c / (static_cast<double>(n) * n) * sum_k2;
    return params.delta * params.s * params.s * H;
}

NoiseCovariance empirical_noise_covariance(const EconomyParams& params, const AllocationNetwork& net,
                                           const ProductionFunction& pf, std::span<const double> wealth,
                                           int n_samples, std::uint64_t seed, double dt) {
    if (n_samples < 2) throw InsufficientData("empirical_noise_covariance: need at least two samples");
    const int n = net.n_households();
    require_size(wealth.size(), n, "empirical_noise_covariance wealth");
    const std::vector<double> mu = drift(wealth, params, pf);
    const rng::CounterRng rng(seed);

    constexpr int kBatch = 512;
    Eigen::MatrixXd sum_outer = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd batch(n, kBatch);
    int filled = 0;
    for (int k = 0; k < n_samples; ++k) {
        const auto shocks = sample_firm_shocks(net.n_firms(), params, dt, rng, static_cast<std::uint64_t>(k));
        const auto next = step_absolute(wealth, params, net, pf, shocks, dt);
        for (int i = 0; i < n; ++i) batch(i, filled) = next[i] - wealth[i] - mu[i] * dt;
        if (++filled == kBatch || k + 1 == n_samples) {
            const auto block = batch.leftCols(filled);
            sum_outer.noalias() += block * block.transpose();
            sum += block.rowwise().sum();
            filled = 0;
        }
    }
    const double ns = n_samples;
    NoiseCovariance out;
    out.empirical = (sum_outer - sum * sum.transpose() / ns) / ((ns - 1.0) * dt);
    out.analytic = analytic_noise_covariance(params, net, pf, wealth);
    return out;
}

std::vector<double> balanced_wealth(const AllocationNetwork& net, double level, double spread, std::uint64_t seed) {
    if (!(level > 0.0)) throw DomainError("balanced_wealth: level must be > 0");
    const int n = net.n_households();
    const Eigen::MatrixXd theta(net.theta().materialize());
    rng::PhiloxEngine engine(seed, 7);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = engine.normal();
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(theta);
    const Eigen::VectorXd residual = v - theta * cod.solve(v);
    const double scale = residual.cwiseAbs().maxCoeff();
    std::vector<double> p(n, level);
    if (scale > 1e-12)
        for (int i = 0; i < n; ++i) p[i] = level * (1.0 + spread * residual[i] / scale);
    return p;
}

void write_panel_csv(std::ostream& os, const WealthPanel& panel) {
    const auto old = os.precision(17);
    os << "t,household_id,wealth\n";
    for (std::size_t m = 0; m < panel.snapshots.size(); ++m)
        for (std::size_t i = 0; i < panel.snapshots[m].size(); ++i)
            os << panel.times[m] << ',' << i << ',' << panel.snapshots[m][i] << '\n';
    os.precision(old);
}

}  // namespace wealth

#include "wealth/commands.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "wealth/errors.hpp"
#include "wealth/tail_stats.hpp"

namespace wealth {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string format_optional(const std::optional<double>& v) {
    if (!v) return "";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, *v);
    return std::string(buf, res.ptr);
}

std::string short_number(double v) {
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

json moments_json(std::span<const double> x) {
    const Moments m = moments(x);
    return {{"n", m.n},
            {"mean", m.mean},
            {"variance", m.variance},
            {"skewness", m.skewness},
            {"excess_kurtosis", m.excess_kurtosis}};
}

json tail_json(const TailEstimate& t) {
    return {{"alpha_hat", t.alpha_hat},
            {"k", t.k},
            {"stderr", t.stderr_},
            {"threshold", t.threshold},
            {"negative_fraction", t.negative_fraction}};
}

double theta_bar_for(const RunConfig& cfg, const AllocationNetwork& net) {
    if (cfg.network.theta_bar) return *cfg.network.theta_bar;
    if (cfg.delta_theta_product) return 1.0;
    return diagonal_means(net).theta_bar;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f << content;
}

std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.output.dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + cfg.output.dir + "': " + ec.message());
    return dir;
}

// "key,value" lines for the scalars of a summary, one nesting level deep.
void write_flat(std::ostream& os, const json& j) {
    os << "key,value\n";
    for (const auto& [k, v] : j.items()) {
        if (v.is_object()) {
            for (const auto& [k2, v2] : v.items())
                if (v2.is_primitive())
                    os << k << '.' << k2 << ',' << (v2.is_string() ? v2.get<std::string>() : v2.dump()) << '\n';
        } else if (v.is_string() && v.get<std::string>().find('\n') != std::string::npos) {
            continue;  // the config echo lives in summary.json
        } else if (v.is_primitive()) {
            os << k << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
        }
    }
}

std::vector<double> quantile_grid(const DensityHandle& d, int points) {
    std::vector<double> grid;
    for (int i = 0; i < points; ++i) grid.push_back(d.quantile(0.001 + 0.998 * i / (points - 1)));
    return grid;
}

}  // namespace

AllocationNetwork build_network(const RunConfig& cfg) {
    const NetworkSpec& n = cfg.network;
    if (n.kind == NetworkSpec::Kind::File) return read_network(n.file);
    const bool full_theta = n.d_theta == n.firms, full_phi = n.d_phi == n.firms;
    if (!full_theta && !full_phi) return build_regular(n.households, n.firms, n.d_theta, n.d_phi, n.seed);
    // Supports are drawn per side from their own streams, so swapping in the
    // implicit uniform rows leaves the other side unchanged.
    if (full_theta && full_phi)
        return {Allocation::uniform(n.households, n.firms), Allocation::uniform(n.households, n.firms)};
    const int d = full_theta ? n.d_phi : n.d_theta;
    const AllocationNetwork drawn = build_regular(n.households, n.firms, d, d, n.seed);
    return {full_theta ? Allocation::uniform(n.households, n.firms) : drawn.theta(),
            full_phi ? Allocation::uniform(n.households, n.firms) : drawn.phi()};
}

json to_json(const RegimeReport& r) {
    return {{"regime", to_string(r.regime)},
            {"p_bar_star", optional_number(r.p_bar_star)},
            {"poverty_threshold", optional_number(r.poverty_threshold)},
            {"psi_eg", optional_number(r.psi_eg)},
            {"rho_star", r.rho_star},
            {"omega_star", r.omega_star},
            {"alpha", optional_number(r.alpha)},
            {"note", r.note}};
}

std::vector<double> parse_grid(const std::string& text) {
    const auto number = [&](const std::string& t) {
        double v = 0.0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || t.empty())
            throw ConfigError("grid: '" + t + "' is not a number");
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(trim(p));
        if (parts.size() != 3) throw ConfigError("grid: expected lo:hi:n");
        const double lo = number(parts[0]), hi = number(parts[1]);
        const double n = number(parts[2]);
        if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("grid: n must be a positive integer");
        const int count = static_cast<int>(n);
        for (int i = 0; i < count; ++i) out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    } else {
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ',');) out.push_back(number(trim(p)));
    }
    if (out.empty()) throw ConfigError("grid: no values");
    return out;
}

std::vector<SweepRow> sweep(const RunConfig& cfg, const std::string& param, std::span<const double> grid) {
    static const std::vector<std::string> params = {"nu", "s", "tau_k", "delta", "theta_bar"};
    if (std::find(params.begin(), params.end(), param) == params.end())
        throw ConfigError("sweep: parameter must be one of nu, s, tau_k, delta, theta_bar");
    if (grid.empty()) throw ConfigError("sweep: empty grid");
    const double base_theta = analytic_theta_bar(cfg);

    std::vector<SweepRow> rows;
    for (double v : grid) {
        EconomyParams e = cfg.economy;
        double theta = base_theta;
        if (param == "nu") e.nu = v;
        if (param == "s") e.s = v;
        if (param == "tau_k") e.tau_k = v;
        if (param == "delta") e.delta = v;
        if (param == "theta_bar") theta = v;
        SweepRow row;
        row.value = v;
        try {
            const RegimeReport r = classify_regime(e, cfg.production, theta);
            row.regime = to_string(r.regime);
            row.alpha = r.alpha;
            row.p_bar_star = r.p_bar_star;
            row.psi_eg = r.psi_eg;
            row.rho_star = r.rho_star;
            row.note = r.note;
        } catch (const KnifeEdge& k) {
            row.regime = "KnifeEdge";
            row.alpha = k.alpha_stationary_limit;
            row.note = "knife-edge point";
        } catch (const Error& err) {
            row.regime = "Invalid";
            row.note = err.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::string& param, const std::vector<SweepRow>& rows) {
    os << "param,value,regime,alpha,p_bar_star,psi_eg,rho_star,note\n";
    for (const auto& r : rows) {
        std::string note = r.note;
        std::replace(note.begin(), note.end(), ',', ';');
        os << param << ',' << format_optional(r.value) << ',' << r.regime << ',' << format_optional(r.alpha) << ','
           << format_optional(r.p_bar_star) << ',' << format_optional(r.psi_eg) << ','
           << format_optional(r.rho_star) << ',' << note << '\n';
    }
}

SimulationOutcome simulate(const RunConfig& cfg) {
    const EconomyParams& e = cfg.economy;
    const ProductionFunction& pf = cfg.production;
    const AllocationNetwork net = build_network(cfg);
    const int n = net.n_households();
    const Sections echo = to_sections(cfg);

    SimulationOutcome out;
    json s;
    s["scenario"] = to_string(cfg.scenario);
    s["config"] = echo;
    s["config_text"] = render_sections(echo);
    s["n_households"] = n;
    s["n_firms"] = net.n_firms();

    const double theta = theta_bar_for(cfg, net);
    // Without a stationary state an absolute run can still be integrated from
    // an explicit starting level; it then reports where wealth collapses.
    RegimeReport report;
    try {
        report = classify_regime(e, pf, theta);
        s["regime"] = to_json(report);
    } catch (const NoStationaryState& err) {
        if (cfg.scenario == Scenario::EndogenousGrowthRelative) throw;
        s["regime"] = {{"regime", "NoStationaryState"}, {"note", err.what()}};
    }
    const bool use_level = cfg.initial != "stationary";
    const double level = use_level ? std::stod(cfg.initial) : 1.0;

    if (cfg.scenario == Scenario::EndogenousGrowthRelative) {
        if (report.regime == Regime::Stationary)
            throw RegimeMismatch("EndogenousGrowthRelative needs parameters in the growth regime");
        const std::vector<double> init(n, level);
        out.panel = run_relative_eg(cfg.simulation, e, theta, report.rho_star, init);
        if (report.alpha) out.density = DensityHandle::endogenous_growth(*report.alpha);
        s["analytic"] = {{"kind", to_string(DensityKind::EndogenousGrowthRelative)},
                         {"alpha", optional_number(report.alpha)},
                         {"theta_bar", theta}};
    } else {
        if (!use_level && !report.p_bar_star)
            throw ConfigError("[simulation] initial = stationary needs a stationary regime; give a number");
        const double p0 = use_level ? level : *report.p_bar_star;
        const std::vector<double> init(n, p0);
        out.panel = run_absolute(cfg.simulation, e, net, pf, init);

        json analytic;
        if (report.p_bar_star) {
            const double pbar = *report.p_bar_star;
            analytic["p_bar_star"] = pbar;
            try {
                const MarketState m = clear(e, pf, pbar);
                DiagonalMeans dm = diagonal_means(net, cfg.simulation.remove_aggregate_shock);
                if (cfg.simulation.wage_setting == WageSetting::Staggered) dm.omega_bar = dm.phi_bar = 0.0;
                analytic["theta_bar"] = dm.theta_bar;
                analytic["omega_bar"] = dm.omega_bar;
                analytic["phi_bar"] = dm.phi_bar;
                const ClosedFormCoeffs c = coeffs(e, m, dm);
                analytic["coefficients"] = {{"z0", c.z0}, {"z1", c.z1}, {"a0", c.a0}, {"a1", c.a1}, {"a2", c.a2}};
                switch (cfg.scenario) {
                    case Scenario::CompleteMarkets: out.density = DensityHandle::delta(pbar); break;
                    case Scenario::LaborOnlyRisk: out.density = DensityHandle::gaussian(c); break;
                    case Scenario::IncompleteMarkets: out.density = DensityHandle::incomplete(c); break;
                    case Scenario::StaggeredWages: out.density = DensityHandle::staggered(c); break;
                    case Scenario::EndogenousGrowthRelative: break;
                }
                if (out.density) {
                    analytic["kind"] = to_string(out.density->kind());
                    analytic["alpha"] = out.density->tail_exponent();
                    analytic["mean"] = out.density->mean();
                }
            } catch (const Error& err) {
                analytic["error"] = err.what();
            }
        }
        s["analytic"] = analytic;
    }

    const WealthPanel& panel = out.panel;
    s["dt"] = panel.config.dt;
    s["snapshots"] = panel.snapshots.size();
    s["times"] = panel.times;
    std::vector<double> means;
    for (double t : panel.times)
        means.push_back(panel.mean_path[static_cast<std::size_t>(std::llround(t / panel.config.dt))]);
    s["mean_path"] = means;

    const std::vector<double> pooled = panel.pooled();
    s["final_moments"] = moments_json(panel.snapshots.back());
    s["pooled_moments"] = moments_json(pooled);
    s["min_wealth_after_burn_in"] = *std::min_element(pooled.begin(), pooled.end());
    const auto negatives = std::count_if(pooled.begin(), pooled.end(), [](double x) { return x <= 0.0; });
    s["negative_fraction"] = static_cast<double>(negatives) / pooled.size();

    const auto positives = pooled.size() - negatives;
    try {
        s["hill"] = tail_json(hill(pooled, default_hill_k(positives)));
        json curve = json::array();
        for (const auto& h : hill_sensitivity(pooled)) curve.push_back({{"k", h.k}, {"alpha_hat", h.alpha_hat}});
        s["hill_sensitivity"] = curve;
        s["hill_top_1pct"] = tail_json(hill(pooled, static_cast<int>(positives / 100)));
    } catch (const Error& err) {
        s["hill_error"] = err.what();
    }

    if (out.density && out.density->kind() != DensityKind::DeltaComplete) {
        const DensityHandle& d = *out.density;
        s["ks_distance"] = ks_distance(pooled, [&d](double x) { return d.cdf(x); });
        s["ks_band_95"] = 1.36 / std::sqrt(static_cast<double>(pooled.size()));
    }

    switch (cfg.scenario) {
        case Scenario::CompleteMarkets:
            if (report.p_bar_star) {
                const double pbar = *report.p_bar_star;
                double dev = 0.0;
                for (double x : pooled) dev = std::max(dev, std::abs(x - pbar));
                s["max_abs_deviation"] = dev;
                s["relative_max_deviation"] = dev / pbar;
                s["delta_degenerate"] = dev < 1e-6 * pbar;
            }
            break;
        case Scenario::StaggeredWages:
            s["bounded_away_from_zero"] = *std::min_element(pooled.begin(), pooled.end()) > 0.0;
            break;
        case Scenario::EndogenousGrowthRelative: {
            const Moments m = moments(panel.snapshots.back());
            const double se = std::sqrt(m.variance / m.n);
            s["mean_u"] = m.mean;
            s["mean_u_standard_error"] = se;
            s["mean_u_within_3se"] = std::abs(m.mean - 1.0) <= 3.0 * se;
            break;
        }
        default: break;
    }
    out.summary = std::move(s);
    return out;
}

std::vector<Check> run_validation(const RunConfig& cfg) {
    std::vector<Check> checks;
    const EconomyParams& e = cfg.economy;
    const auto record = [&](const std::string& name, auto&& body) {
        Check c{name, false, ""};
        try {
            body(c);
        } catch (const std::exception& err) {
            c.passed = false;
            c.detail = err.what();
        }
        checks.push_back(std::move(c));
    };

    // Reference wealth level for price-dependent checks.
    std::optional<double> pbar;
    try {
        pbar = stationary_pbar(e, cfg.production);
    } catch (const Error&) {
    }

    record("euler_identity", [&](Check& c) {
        rng::PhiloxEngine eng(cfg.simulation.seed, 31);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double eps = 0.05 + 0.9 * eng.uniform();
            const ProductionFunction pf = i % 2 ? ProductionFunction::ces(eps, 0.05 + 0.9 * eng.uniform())
                                                : ProductionFunction::cobb_douglas(eps);
            const double lambda = std::exp(std::log(1e-3) + eng.uniform() * std::log(1e6));
            EconomyParams p = e;
            p.a = 0.1 + 10.0 * eng.uniform();
            const MarketState m = clear(p, pf, lambda);
            const double y = p.a * pf.g(lambda);
            worst = std::max(worst, std::abs(m.rho * lambda + m.omega - y) / y);
        }
        c.passed = worst < 1e-12;
        c.detail = "max relative error " + short_number(worst);
    });

    record("covariance_oracle", [&](Check& c) {
        const AllocationNetwork net = build_regular(40, 20, 10, 10, cfg.network.seed);
        const auto wealth = balanced_wealth(net, pbar.value_or(1.0), 0.5, cfg.simulation.seed);
        const NoiseCovariance cov = empirical_noise_covariance(e, net, cfg.production, wealth, 100000,
                                                               cfg.simulation.seed, 1.0);
        const double peak = cov.analytic.cwiseAbs().maxCoeff();
        if (peak == 0.0) {
            c.passed = cov.empirical.cwiseAbs().maxCoeff() == 0.0;
            c.detail = "zero noise (delta = 0)";
            return;
        }
        double worst = 0.0;
        for (int i = 0; i < 40; ++i)
            for (int j = 0; j < 40; ++j)
                if (std::abs(cov.analytic(i, j)) > 1e-3 * peak)
                    worst = std::max(worst, std::abs(cov.empirical(i, j) / cov.analytic(i, j) - 1.0));
        c.passed = worst < 0.05;
        c.detail = "max relative deviation " + short_number(worst);
    });

    record("density_normalization", [&](Check& c) {
        std::vector<DensityHandle> densities;
        if (pbar && e.delta > 0.0) {
            const MarketState m = clear(e, cfg.production, *pbar);
            const double th = analytic_theta_bar(cfg);
            const double ph = cfg.network.kind == NetworkSpec::Kind::Regular ? 1.0 / cfg.network.d_phi : th;
            const ClosedFormCoeffs full = coeffs(e, m, DiagonalMeans{th, 0.5 * std::min(th, ph), ph});
            densities.push_back(DensityHandle::gaussian(coeffs(e, m, DiagonalMeans{0.0, 0.0, ph})));
            if (full.discriminant() > 0.0) densities.push_back(DensityHandle::incomplete(full));
            densities.push_back(DensityHandle::staggered(coeffs(e, m, DiagonalMeans{th, 0.0, 0.0})));
        }
        densities.push_back(DensityHandle::endogenous_growth(3.0));
        boost::math::quadrature::tanh_sinh<double> ts;
        double worst = 0.0;
        for (const auto& d : densities) {
            const auto f = [&d](double x) { return d.pdf(x); };
            double total = 0.0;
            if (d.kind() == DensityKind::StaggeredWages || d.kind() == DensityKind::EndogenousGrowthRelative) {
                total = boost::math::quadrature::exp_sinh<double>().integrate(f, 0.0, std::numeric_limits<double>::infinity());
            } else {
                const double mid = d.mode();
                total = ts.integrate(f, -std::numeric_limits<double>::infinity(), mid) +
                        ts.integrate(f, mid, std::numeric_limits<double>::infinity());
            }
            worst = std::max(worst, std::abs(total - 1.0));
        }
        c.passed = worst < 1e-8;
        c.detail = std::to_string(densities.size()) + " densities, max |mass - 1| " + short_number(worst);
    });

    record("transition_continuity", [&](Check& c) {
        const double rho = e.a * cfg.production.g_prime_limit();
        if (rho == 0.0 || e.tau_k == 0.0 || e.delta == 0.0) {
            c.passed = true;
            c.detail = "not applicable (no growth regime, tau_k = 0 or delta = 0)";
            return;
        }
        EconomyParams edge = e;
        edge.nu = e.s * rho;
        const double theta = analytic_theta_bar(cfg);
        const double a_stat = alpha_stationary(edge, rho, theta);
        const double a_eg = alpha_eg(edge, rho, theta);
        const double gap = std::abs(a_stat - a_eg);
        c.passed = gap < 1e-12 * std::max(1.0, a_eg);
        c.detail = "alpha at the transition " + short_number(a_eg) + ", gap " + short_number(gap);
    });

    record("network_invariants", [&](Check& c) {
        NetworkFile file;
        if (cfg.network.kind == NetworkSpec::Kind::File) {
            std::ifstream in(cfg.network.file);
            if (!in) throw InvalidNetwork("cannot open '" + cfg.network.file + "'");
            file = parse_network(in);
        } else {
            std::stringstream ss;
            write_network(ss, build_network(cfg));
            file = parse_network(ss);
        }
        const auto violations = network_violations(file);
        c.passed = violations.empty();
        c.detail = violations.empty() ? "ok" : violations.front() + " (" + std::to_string(violations.size()) + " total)";
    });

    record("mean_field_consistency", [&](Check& c) {
        EconomyParams quiet = e;
        quiet.delta = 0.0;
        const double p0 = pbar ? 0.5 * *pbar : 1.0;
        const double t_end = 10.0;
        const AllocationNetwork net(Allocation::uniform(4, 2), Allocation::uniform(4, 2));
        const MeanFieldPath reference = integrate_mean_field(quiet, cfg.production, p0, t_end, 1e-3);
        double err[2];
        for (int h = 0; h < 2; ++h) {
            SimulationConfig sc;
            sc.dt = 0.1 / (1 << h);
            sc.t_end = t_end;
            sc.record_every = t_end;
            const WealthPanel panel = run_absolute(sc, quiet, net, cfg.production, std::vector<double>(4, p0));
            err[h] = std::abs(panel.mean_path.back() - reference.p_bar.back());
        }
        const double ratio = err[0] / err[1];
        c.passed = (err[0] == 0.0 && err[1] == 0.0) || (ratio > 1.8 && ratio < 2.2);
        c.detail = "error ratio dt/(dt/2) = " + short_number(ratio);
    });
    return checks;
}

int cmd_regime(const RunConfig& cfg, std::ostream& out) {
    const double theta = analytic_theta_bar(cfg);
    RegimeReport r;
    try {
        r = classify_regime(cfg.economy, cfg.production, theta);
    } catch (const KnifeEdge& k) {
        out << "knife-edge: " << k.what() << '\n';
        return kExitKnifeEdge;
    }
    json j = to_json(r);
    j["theta_bar"] = theta;
    if (!cfg.output.dir.empty()) write_file(prepare_out_dir(cfg) / "regime.json", j.dump(2) + "\n");
    if (cfg.output.format == "json") {
        out << j.dump(2) << '\n';
        return kExitOk;
    }
    out << std::setprecision(6) << to_string(r.regime);
    if (r.p_bar_star) out << ", p_bar_star=" << *r.p_bar_star;
    if (r.poverty_threshold) out << ", poverty_threshold=" << *r.poverty_threshold;
    if (r.psi_eg) out << ", psi=" << *r.psi_eg;
    out << ", rho=" << r.rho_star << ", omega=" << r.omega_star;
    if (r.alpha) out << ", alpha=" << *r.alpha;
    out << '\n';
    if (!r.note.empty()) out << "note: " << r.note << '\n';
    return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const SimulationOutcome o = simulate(cfg);
    if (!cfg.output.dir.empty()) {
        const auto dir = prepare_out_dir(cfg);
        std::ostringstream panel;
        write_panel_csv(panel, o.panel);
        write_file(dir / "panel.csv", panel.str());
        write_file(dir / "summary.json", o.summary.dump(2) + "\n");
        if (o.density && o.density->kind() != DensityKind::DeltaComplete) {
            std::ostringstream dens;
            write_density_csv(dens, *o.density, quantile_grid(*o.density, 400));
            write_file(dir / "density.csv", dens.str());
        }
        const std::vector<double> pooled = o.panel.pooled();
        if (std::any_of(pooled.begin(), pooled.end(), [](double x) { return x > 0.0; })) {
            std::ostringstream cc;
            write_ccdf_csv(cc, ccdf_loglog(pooled, 60));
            write_file(dir / "ccdf.csv", cc.str());
        }
    }
    if (cfg.output.format == "json")
        out << o.summary.dump(2) << '\n';
    else
        write_flat(out, o.summary);
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const std::string& param, std::span<const double> grid, std::ostream& out) {
    const auto rows = sweep(cfg, param, grid);
    std::ostringstream csv;
    write_sweep_csv(csv, param, rows);
    if (!cfg.output.dir.empty()) write_file(prepare_out_dir(cfg) / "sweep.csv", csv.str());
    if (cfg.output.format == "json") {
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back({{"param", param},
                           {"value", r.value},
                           {"regime", r.regime},
                           {"alpha", optional_number(r.alpha)},
                           {"p_bar_star", optional_number(r.p_bar_star)},
                           {"psi_eg", optional_number(r.psi_eg)},
                           {"rho_star", optional_number(r.rho_star)},
                           {"note", r.note}});
        out << arr.dump(2) << '\n';
    } else {
        out << csv.str();
    }
    return kExitOk;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    const auto checks = run_validation(cfg);
    const bool all = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    json j = json::array();
    for (const auto& c : checks) j.push_back({{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    if (!cfg.output.dir.empty()) write_file(prepare_out_dir(cfg) / "validate.json", j.dump(2) + "\n");
    if (cfg.output.format == "json") {
        out << j.dump(2) << '\n';
    } else {
        out << "check,passed,detail\n";
        for (const auto& c : checks) {
            std::string detail = c.detail;
            std::replace(detail.begin(), detail.end(), ',', ';');
            out << c.name << ',' << (c.passed ? "pass" : "FAIL") << ',' << detail << '\n';
        }
    }
    return all ? kExitOk : kExitValidationFailed;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"wealthsim: household wealth dynamics on production networks"};
    app.fallthrough();
    app.require_subcommand(1);
    std::string config_path, out_dir, format;
    std::uint64_t seed = 0;
    int threads = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Simulation seed (overrides the config)");
    app.add_option("--config", config_path, "Configuration file")->required();
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--format", format, "Stdout format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

    auto* regime = app.add_subcommand("regime", "Classify the long-run regime");
    auto* simulate_cmd = app.add_subcommand("simulate", "Run the configured scenario");
    auto* sweep_cmd = app.add_subcommand("sweep", "Tabulate the regime over a parameter grid");
    auto* validate_cmd = app.add_subcommand("validate", "Run the internal consistency checks");
    std::string param, grid_text;
    sweep_cmd->add_option("--param", param, "nu | s | tau_k | delta | theta_bar")->required();
    sweep_cmd->add_option("--grid", grid_text, "v1,v2,... or lo:hi:n")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (*seed_opt) cfg.simulation.seed = seed;
        if (!out_dir.empty()) cfg.output.dir = out_dir;
        if (!format.empty()) cfg.output.format = format;
        if (threads > 0) {
            cfg.simulation.threads = threads;
        } else if (const char* env = std::getenv("WEALTHSIM_THREADS")) {
            const int t = std::atoi(env);
            if (t < 1) throw ConfigError("WEALTHSIM_THREADS must be a positive integer");
            cfg.simulation.threads = t;
        }

        if (regime->parsed()) return cmd_regime(cfg, out);
        if (simulate_cmd->parsed()) return cmd_simulate(cfg, out);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg, param, parse_grid(grid_text), out);
        if (validate_cmd->parsed()) return cmd_validate(cfg, out);
    } catch (const KnifeEdge& e) {
        err << "knife-edge: " << e.what() << '\n';
        return kExitKnifeEdge;
    } catch (const PriceUndefined& e) {
        err << "simulation failed: " << e.what() << '\n';
        return kExitRunFailed;
    } catch (const NonFinite& e) {
        err << "simulation failed: " << e.what() << '\n';
        return kExitRunFailed;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    return kExitConfigError;
}

}  // namespace wealth

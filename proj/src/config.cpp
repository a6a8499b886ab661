#include "wealth/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "wealth/errors.hpp"
#include "wealth/network.hpp"

namespace wealth {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Typed access to one section; records which keys were read so leftovers can
// be reported as unknown.
class SectionReader {
public:
    SectionReader(const Sections& all, const std::string& name) : name_(name) {
        const auto it = all.find(name);
        if (it != all.end()) values_ = &it->second;
    }

    bool has(const std::string& key) const { return values_ && values_->count(key); }

    std::optional<std::string> text(const std::string& key) {
        used_.insert(key);
        if (!has(key)) return std::nullopt;
        return values_->at(key);
    }

    std::optional<double> number(const std::string& key) {
        const auto t = text(key);
        if (!t) return std::nullopt;
        double v = 0.0;
        const auto res = std::from_chars(t->data(), t->data() + t->size(), v);
        if (res.ec != std::errc{} || res.ptr != t->data() + t->size()) fail(key, "not a number: '" + *t + "'");
        return v;
    }

    std::optional<std::int64_t> integer(const std::string& key) {
        const auto t = text(key);
        if (!t) return std::nullopt;
        std::int64_t v = 0;
        const auto res = std::from_chars(t->data(), t->data() + t->size(), v);
        if (res.ec != std::errc{} || res.ptr != t->data() + t->size()) fail(key, "not an integer: '" + *t + "'");
        return v;
    }

    std::optional<bool> boolean(const std::string& key) {
        const auto t = text(key);
        if (!t) return std::nullopt;
        if (*t == "true" || *t == "1" || *t == "yes") return true;
        if (*t == "false" || *t == "0" || *t == "no") return false;
        fail(key, "not a boolean: '" + *t + "'");
    }

    void reject_unknown() const {
        if (!values_) return;
        for (const auto& [k, v] : *values_)
            if (!used_.count(k)) fail(k, "unknown key");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& why) const {
        throw ConfigError("[" + name_ + "] " + key + ": " + why);
    }

private:
    std::string name_;
    const std::map<std::string, std::string>* values_ = nullptr;
    std::set<std::string> used_;
};

template <typename E>
E parse_enum(SectionReader& r, const std::string& key, const std::vector<std::pair<std::string, E>>& options,
             E fallback) {
    const auto t = r.text(key);
    if (!t) return fallback;
    for (const auto& [name, value] : options)
        if (*t == name) return value;
    std::string allowed;
    for (const auto& [name, value] : options) allowed += (allowed.empty() ? "" : ", ") + name;
    r.fail(key, "'" + *t + "' is not one of {" + allowed + "}");
}

const std::vector<std::pair<std::string, Scenario>> kScenarios = {
    {"CompleteMarkets", Scenario::CompleteMarkets},
    {"LaborOnlyRisk", Scenario::LaborOnlyRisk},
    {"IncompleteMarkets", Scenario::IncompleteMarkets},
    {"StaggeredWages", Scenario::StaggeredWages},
    {"EndogenousGrowthRelative", Scenario::EndogenousGrowthRelative},
};

int checked_int(SectionReader& r, const std::string& key, std::int64_t v) {
    if (v < 1 || v > std::numeric_limits<int>::max()) r.fail(key, "must be a positive count");
    return static_cast<int>(v);
}

}  // namespace

std::string to_string(Scenario s) {
    for (const auto& [name, value] : kScenarios)
        if (value == s) return name;
    return "Unknown";
}

Sections parse_sections(const std::string& text) {
    Sections out;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            out[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (out[section].count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        out[section][key] = trim(line.substr(eq + 1));
    }
    return out;
}

std::string render_sections(const Sections& sections) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [name, values] : sections) {
        if (!first) os << '\n';
        first = false;
        os << '[' << name << "]\n";
        for (const auto& [k, v] : values) os << k << " = " << v << '\n';
    }
    return os.str();
}

RunConfig from_sections(const Sections& sections) {
    static const std::set<std::string> known = {"economy", "production", "network", "simulation", "scenario",
                                                 "output"};
    for (const auto& [name, values] : sections)
        if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");

    RunConfig cfg;

    SectionReader sc(sections, "scenario");
    cfg.scenario = parse_enum(sc, "name", kScenarios, Scenario::IncompleteMarkets);
    sc.reject_unknown();

    SectionReader ec(sections, "economy");
    EconomyParams& e = cfg.economy;
    if (auto v = ec.number("s")) e.s = *v;
    if (auto v = ec.number("tau_k")) e.tau_k = *v;
    if (auto v = ec.number("tau_l")) e.tau_l = *v;
    if (auto v = ec.number("chi")) e.chi = *v;
    if (auto v = ec.number("nu")) e.nu = *v;
    if (auto v = ec.number("a")) e.a = *v;
    const auto delta = ec.number("delta");
    cfg.delta_theta_product = ec.number("delta_theta_product");
    if (delta && cfg.delta_theta_product) ec.fail("delta_theta_product", "give either delta or delta_theta_product");
    if (delta) e.delta = *delta;
    if (cfg.delta_theta_product) e.delta = *cfg.delta_theta_product;
    ec.reject_unknown();
    if (const auto bad = validate_params(e); !bad.empty()) {
        std::string msg = "[economy]";
        for (const auto& b : bad) msg += " " + b + ";";
        throw ConfigError(msg);
    }

    SectionReader pc(sections, "production");
    const std::string kind = pc.text("kind").value_or("cobb_douglas");
    try {
        if (kind == "ces") {
            const auto eps = pc.number("epsilon");
            const auto gam = pc.number("gamma");
            if (!eps || !gam) pc.fail("kind", "ces needs epsilon and gamma");
            cfg.production = ProductionFunction::ces(*eps, *gam);
        } else if (kind == "cobb_douglas") {
            const auto eps = pc.number("epsilon");
            if (pc.has("gamma")) pc.fail("gamma", "not used by cobb_douglas");
            cfg.production = ProductionFunction::cobb_douglas(eps.value_or(0.3));
        } else {
            pc.fail("kind", "'" + kind + "' is not one of {ces, cobb_douglas}");
        }
    } catch (const DomainError& err) {
        throw ConfigError(std::string("[production] ") + err.what());
    }
    pc.reject_unknown();

    SectionReader nc(sections, "network");
    NetworkSpec& n = cfg.network;
    n.kind = parse_enum(nc, "kind",
                        std::vector<std::pair<std::string, NetworkSpec::Kind>>{
                            {"regular", NetworkSpec::Kind::Regular}, {"file", NetworkSpec::Kind::File}},
                        NetworkSpec::Kind::Regular);
    if (auto v = nc.integer("households")) n.households = checked_int(nc, "households", *v);
    if (auto v = nc.integer("firms")) n.firms = checked_int(nc, "firms", *v);
    const auto d_theta = nc.integer("d_theta");
    const auto d_phi = nc.integer("d_phi");
    if (d_theta) n.d_theta = checked_int(nc, "d_theta", *d_theta);
    if (d_phi) n.d_phi = checked_int(nc, "d_phi", *d_phi);
    if (auto v = nc.integer("seed")) n.seed = static_cast<std::uint64_t>(*v);
    if (auto v = nc.text("file")) n.file = *v;
    n.theta_bar = nc.number("theta_bar");
    if (n.theta_bar && !(*n.theta_bar > 0.0)) nc.fail("theta_bar", "must be > 0");
    nc.reject_unknown();
    if (n.kind == NetworkSpec::Kind::File) {
        if (n.file.empty()) nc.fail("file", "required when kind = file");
        if (!std::filesystem::exists(n.file)) nc.fail("file", "'" + n.file + "' does not exist");
    }

    SectionReader sim(sections, "simulation");
    SimulationConfig& s = cfg.simulation;
    if (auto v = sim.number("dt")) s.dt = *v;
    if (auto v = sim.number("t_end")) s.t_end = *v;
    if (auto v = sim.number("burn_in")) s.burn_in = *v;
    if (auto v = sim.number("record_every")) s.record_every = *v;
    if (auto v = sim.integer("seed")) s.seed = static_cast<std::uint64_t>(*v);
    if (auto v = sim.integer("threads")) s.threads = checked_int(sim, "threads", *v);
    s.noise_model = parse_enum(sim, "noise_model",
                               std::vector<std::pair<std::string, NoiseModel>>{
                                   {"FirmShocks", NoiseModel::FirmShocks},
                                   {"DirectCovariance", NoiseModel::DirectCovariance}},
                               NoiseModel::FirmShocks);
    const bool scheme_given = sim.has("scheme");
    s.scheme = parse_enum(sim, "scheme",
                          std::vector<std::pair<std::string, Scheme>>{{"EulerMaruyama", Scheme::EulerMaruyama},
                                                                      {"Milstein", Scheme::Milstein}},
                          Scheme::EulerMaruyama);
    const bool wages_given = sim.has("wage_setting");
    s.wage_setting = parse_enum(sim, "wage_setting",
                                std::vector<std::pair<std::string, WageSetting>>{
                                    {"Flexible", WageSetting::Flexible}, {"Staggered", WageSetting::Staggered}},
                                WageSetting::Flexible);
    const auto remove_aggregate = sim.boolean("remove_aggregate_shock");
    if (auto v = sim.boolean("renormalize_relative")) s.renormalize_relative = *v;
    if (auto v = sim.text("initial")) cfg.initial = *v;
    sim.reject_unknown();
    if (s.dt < 0.0) sim.fail("dt", "must be > 0 (or 0 for the default)");
    if (!(s.t_end > 0.0)) sim.fail("t_end", "must be > 0");
    if (!(s.burn_in >= 0.0 && s.burn_in < s.t_end)) sim.fail("burn_in", "must lie in [0, t_end)");
    if (!(s.record_every > 0.0)) sim.fail("record_every", "must be > 0");
    if (cfg.initial != "stationary") {
        double v = 0.0;
        const auto res = std::from_chars(cfg.initial.data(), cfg.initial.data() + cfg.initial.size(), v);
        if (res.ec != std::errc{} || res.ptr != cfg.initial.data() + cfg.initial.size() || !(v > 0.0))
            sim.fail("initial", "must be 'stationary' or a positive number");
    }

    // Scenario-implied structure.
    switch (cfg.scenario) {
        case Scenario::CompleteMarkets:
            if ((d_theta && *d_theta != n.firms) || (d_phi && *d_phi != n.firms))
                throw ConfigError("CompleteMarkets requires d_theta = d_phi = firms");
            if (n.kind == NetworkSpec::Kind::File) throw ConfigError("CompleteMarkets builds its own network");
            n.d_theta = n.d_phi = n.firms;
            break;
        case Scenario::LaborOnlyRisk:
            if (d_theta && *d_theta != n.firms) throw ConfigError("LaborOnlyRisk requires d_theta = firms");
            if (n.kind == NetworkSpec::Kind::File) throw ConfigError("LaborOnlyRisk builds its own network");
            n.d_theta = n.firms;
            if (!d_phi) n.d_phi = 1;
            break;
        case Scenario::StaggeredWages:
            if (wages_given && s.wage_setting != WageSetting::Staggered)
                throw ConfigError("StaggeredWages requires wage_setting = Staggered");
            s.wage_setting = WageSetting::Staggered;
            break;
        case Scenario::EndogenousGrowthRelative:
            if (!scheme_given) s.scheme = Scheme::Milstein;
            break;
        case Scenario::IncompleteMarkets: break;
    }
    if (s.scheme == Scheme::Milstein && cfg.scenario != Scenario::EndogenousGrowthRelative)
        throw ConfigError("Milstein is only available for EndogenousGrowthRelative");
    const bool pooled_risk = cfg.scenario == Scenario::CompleteMarkets || cfg.scenario == Scenario::LaborOnlyRisk;
    s.remove_aggregate_shock = remove_aggregate.value_or(pooled_risk);

    if (n.kind == NetworkSpec::Kind::Regular) {
        if (n.d_theta > n.firms || n.d_phi > n.firms) throw ConfigError("[network] degrees cannot exceed firms");
        const auto prod_t = static_cast<std::int64_t>(n.households) * n.d_theta;
        const auto prod_p = static_cast<std::int64_t>(n.households) * n.d_phi;
        if ((n.d_theta < n.firms && prod_t % n.firms) || (n.d_phi < n.firms && prod_p % n.firms))
            throw ConfigError("[network] households * degree must be divisible by firms");
    }

    SectionReader oc(sections, "output");
    if (auto v = oc.text("dir")) cfg.output.dir = *v;
    if (auto v = oc.text("format")) cfg.output.format = *v;
    oc.reject_unknown();
    if (cfg.output.format != "csv" && cfg.output.format != "json")
        oc.fail("format", "'" + cfg.output.format + "' is not one of {csv, json}");
    return cfg;
}

Sections to_sections(const RunConfig& cfg) {
    Sections out;
    out["scenario"]["name"] = to_string(cfg.scenario);

    auto& e = out["economy"];
    e["s"] = format_double(cfg.economy.s);
    e["tau_k"] = format_double(cfg.economy.tau_k);
    e["tau_l"] = format_double(cfg.economy.tau_l);
    e["chi"] = format_double(cfg.economy.chi);
    e["nu"] = format_double(cfg.economy.nu);
    e["a"] = format_double(cfg.economy.a);
    if (cfg.delta_theta_product)
        e["delta_theta_product"] = format_double(*cfg.delta_theta_product);
    else
        e["delta"] = format_double(cfg.economy.delta);

    auto& p = out["production"];
    if (const auto* ces = std::get_if<Ces>(&cfg.production.variant())) {
        p["kind"] = "ces";
        p["epsilon"] = format_double(ces->epsilon);
        p["gamma"] = format_double(ces->gamma);
    } else {
        p["kind"] = "cobb_douglas";
        p["epsilon"] = format_double(std::get<CobbDouglas>(cfg.production.variant()).epsilon);
    }

    auto& n = out["network"];
    n["kind"] = cfg.network.kind == NetworkSpec::Kind::Regular ? "regular" : "file";
    if (cfg.network.kind == NetworkSpec::Kind::Regular) {
        n["households"] = std::to_string(cfg.network.households);
        n["firms"] = std::to_string(cfg.network.firms);
        n["d_theta"] = std::to_string(cfg.network.d_theta);
        n["d_phi"] = std::to_string(cfg.network.d_phi);
        n["seed"] = std::to_string(cfg.network.seed);
    } else {
        n["file"] = cfg.network.file;
    }
    if (cfg.network.theta_bar) n["theta_bar"] = format_double(*cfg.network.theta_bar);

    auto& s = out["simulation"];
    s["dt"] = format_double(cfg.simulation.dt);
    s["t_end"] = format_double(cfg.simulation.t_end);
    s["burn_in"] = format_double(cfg.simulation.burn_in);
    s["record_every"] = format_double(cfg.simulation.record_every);
    s["seed"] = std::to_string(cfg.simulation.seed);
    s["threads"] = std::to_string(cfg.simulation.threads);
    s["noise_model"] = to_string(cfg.simulation.noise_model);
    s["scheme"] = to_string(cfg.simulation.scheme);
    s["wage_setting"] = to_string(cfg.simulation.wage_setting);
    s["remove_aggregate_shock"] = cfg.simulation.remove_aggregate_shock ? "true" : "false";
    s["renormalize_relative"] = cfg.simulation.renormalize_relative ? "true" : "false";
    s["initial"] = cfg.initial;

    auto& o = out["output"];
    o["format"] = cfg.output.format;
    if (!cfg.output.dir.empty()) o["dir"] = cfg.output.dir;
    return out;
}

RunConfig parse_config(const std::string& text) { return from_sections(parse_sections(text)); }

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

double analytic_theta_bar(const RunConfig& cfg) {
    if (cfg.network.theta_bar) return *cfg.network.theta_bar;
    if (cfg.delta_theta_product) return 1.0;
    if (cfg.network.kind == NetworkSpec::Kind::Regular) return 1.0 / cfg.network.d_theta;
    return diagonal_means(read_network(cfg.network.file)).theta_bar;
}

}  // namespace wealth

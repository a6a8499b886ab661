#pragma once

// Run configuration: sectioned "key = value" text, e.g.
//
//   [economy]
//   s = 0.2
//   delta_theta_product = 300   # sets delta = 300 and theta_bar = 1
//
// Unknown sections or keys are rejected so typos do not pass silently.

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "wealth/production.hpp"
#include "wealth/simulator.hpp"

namespace wealth {

enum class Scenario { CompleteMarkets, LaborOnlyRisk, IncompleteMarkets, StaggeredWages, EndogenousGrowthRelative };

std::string to_string(Scenario s);

struct NetworkSpec {
    enum class Kind { Regular, File };
    Kind kind = Kind::Regular;
    int households = 1000;
    int firms = 100;
    int d_theta = 10;
    int d_phi = 10;
    std::uint64_t seed = 1;
    std::string file;
    /// Overrides the portfolio concentration used by regime and sweep.
    std::optional<double> theta_bar;
};

struct OutputSpec {
    std::string dir;             // empty: no files written
    std::string format = "csv";  // csv | json, the stdout format
};

struct RunConfig {
    EconomyParams economy;
    ProductionFunction production = ProductionFunction::cobb_douglas(0.3);
    std::optional<double> delta_theta_product;
    NetworkSpec network;
    SimulationConfig simulation;
    /// "stationary" (p_bar* for absolute runs, 1 for relative runs) or a number.
    std::string initial = "stationary";
    Scenario scenario = Scenario::IncompleteMarkets;
    OutputSpec output;
};

using Sections = std::map<std::string, std::map<std::string, std::string>>;

/// Syntax only: sections, "key = value", '#' and ';' comments.
Sections parse_sections(const std::string& text);
std::string render_sections(const Sections& sections);

/// Builds and validates a RunConfig. Throws ConfigError.
RunConfig from_sections(const Sections& sections);
Sections to_sections(const RunConfig& cfg);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Portfolio concentration used by closed-form commands: network.theta_bar if
/// given, 1 under delta_theta_product, otherwise the configured network's.
double analytic_theta_bar(const RunConfig& cfg);

}  // namespace wealth

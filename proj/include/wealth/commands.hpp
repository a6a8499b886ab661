#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "wealth/analytics.hpp"
#include "wealth/config.hpp"
#include "wealth/simulator.hpp"

namespace wealth {

// Exit codes of the command-line driver.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitKnifeEdge = 3;
inline constexpr int kExitRunFailed = 4;

/// The allocation network a scenario runs on (uniform rows where the
/// scenario diversifies fully).
AllocationNetwork build_network(const RunConfig& cfg);

nlohmann::json to_json(const RegimeReport& r);

struct SweepRow {
    double value = 0.0;
    std::string regime;
    std::optional<double> alpha;
    std::optional<double> p_bar_star;
    std::optional<double> psi_eg;
    std::optional<double> rho_star;
    std::string note;
};

/// "v1,v2,..." or "lo:hi:n" (n evenly spaced points, both ends included).
std::vector<double> parse_grid(const std::string& text);

/// One row per grid value of `param` (nu, s, tau_k, delta or theta_bar).
/// Knife-edge and invalid points are flagged in the row, not thrown.
std::vector<SweepRow> sweep(const RunConfig& cfg, const std::string& param, std::span<const double> grid);

void write_sweep_csv(std::ostream& os, const std::string& param, const std::vector<SweepRow>& rows);

struct SimulationOutcome {
    WealthPanel panel;
    std::optional<DensityHandle> density;  // analytic law the scenario should approach
    nlohmann::json summary;
};

SimulationOutcome simulate(const RunConfig& cfg);

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

std::vector<Check> run_validation(const RunConfig& cfg);

int cmd_regime(const RunConfig& cfg, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, std::ostream& out);
int cmd_sweep(const RunConfig& cfg, const std::string& param, std::span<const double> grid, std::ostream& out);
int cmd_validate(const RunConfig& cfg, std::ostream& out);

/// Parses argv, runs the subcommand and maps errors to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wealth

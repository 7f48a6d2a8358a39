#ifndef KDVTOWER_COMMANDS_HPP
#define KDVTOWER_COMMANDS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace kdvtower {

inline constexpr const char* tool_version = "1.0.0";

// Exit codes shared by every subcommand.
inline constexpr int exit_pass = 0;
inline constexpr int exit_failure = 1; // verified failure (axiom, type error, blow-up)
inline constexpr int exit_usage = 2;   // invalid configuration

/** Fully resolved run configuration. Flags override config-file values,
 * which override the defaults below; every report embeds the result. */
struct RunConfig {
    std::string command;

    std::vector<int> modes = {64};
    std::vector<int> pairing_levels = {0};
    int trials = 100;
    std::uint64_t seed = 7;
    int jobs = 1;

    std::string morphism = "p2";          // p1 | p2 | p1+p2
    std::string parsing = "symmetrized";  // symmetrized | literal
    double antisymmetry_tolerance = 1e-10;
    double schouten_tolerance = 1e-9;

    double dt = 1e-4;
    double tmax = 1.0;
    int monitor_every = 10;
    int snapshot_every = 0;
    std::string snapshot_prefix;
    bool order_study = false; // add a dt-halving convergence summary to the report
    std::string initial = "cos"; // cos | random | json:<path>
    double amplitude = 1.0;
    int harmonic = 1;
    int band = -1;
    int level = 4;

    int depth = 4;
    double hierarchy_amplitude = 1e-3;
    int hierarchy_band = 1;

    std::string pipeline;
    int base = 0;
    bool base_pinned = false;

    std::string operator_label = "dx";
    int family_top = -1;

    std::string out;        // JSON report path ("" = stdout)
    std::string out_csv;    // conservation CSV path
    std::string dump_state; // last-state JSON on blow-up
    std::string metric_a, metric_b;
};

// Merge a JSON config file (exact RunConfig field names) under the defaults.
RunConfig load_config_file(const std::string& path);
void apply_config_json(RunConfig& config, const std::string& json_text);

int cmd_verify_poisson(const RunConfig& config);
int cmd_simulate(const RunConfig& config);
int cmd_hierarchy(const RunConfig& config);
int cmd_typecheck(const RunConfig& config);
int cmd_norms(const RunConfig& config);

} // namespace kdvtower

#endif

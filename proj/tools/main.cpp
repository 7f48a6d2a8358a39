#include "kdvtower/commands.hpp"
#include "kdvtower/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using kdvtower::RunConfig;

// Flags override config-file values, which override defaults, so the file is
// loaded first and each flag writes through only when the user passed it.
void add_common(CLI::App* cmd, RunConfig& config, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON config file (RunConfig field names)");
    cmd->add_option("--modes,-M", config.modes, "mode counts M (repeatable for sweeps)");
    cmd->add_option("--seed", config.seed, "RNG seed");
    cmd->add_option("--jobs", config.jobs, "worker count for trial batches (1 = serial)");
    cmd->add_option("--out", config.out, "report JSON path (default stdout)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"shift-operator calculus on the Sobolev tower of the circle, "
                 "with the bihamiltonian KdV verification suite"};
    app.require_subcommand(1);

    RunConfig config;
    std::string config_path;

    auto* verify = app.add_subcommand("verify-poisson", "randomized Poisson-tensor axiom checks");
    add_common(verify, config, config_path);
    verify->add_option("--morphism", config.morphism, "p1 | p2 | p1+p2 (mixed bracket)");
    verify->add_option("--parsing", config.parsing, "symmetrized | literal second structure");
    verify->add_option("--trials", config.trials, "trials per (level, M)");
    verify->add_option("--pairing-level", config.pairing_levels, "pairing levels (repeatable)");
    verify->add_option("--antisymmetry-tolerance", config.antisymmetry_tolerance, "");
    verify->add_option("--schouten-tolerance", config.schouten_tolerance, "");

    auto* simulate = app.add_subcommand("simulate", "KdV evolution with conservation monitoring");
    add_common(simulate, config, config_path);
    simulate->add_option("--dt", config.dt, "time step");
    simulate->add_option("--tmax", config.tmax, "final time");
    simulate->add_option("--monitor-every", config.monitor_every, "steps between samples");
    simulate->add_option("--initial", config.initial, "cos | random | json:<path>");
    simulate->add_option("--amplitude", config.amplitude, "initial amplitude");
    simulate->add_option("--harmonic", config.harmonic, "harmonic index for cos data");
    simulate->add_option("--band", config.band, "band for random data (-1 = full)");
    simulate->add_option("--level", config.level, "declared level of the state");
    simulate->add_option("--out-csv", config.out_csv, "conservation CSV path");
    simulate->add_option("--dump-state", config.dump_state, "final (or last valid) state JSON");
    simulate->add_option("--snapshot-every", config.snapshot_every, "steps between field snapshots");
    simulate->add_option("--snapshot-prefix", config.snapshot_prefix,
                         "path prefix for snapshot field JSON files");
    simulate->add_flag("--order-study", config.order_study,
                       "append a dt-halving convergence summary to the report");

    auto* hierarchy = app.add_subcommand("hierarchy", "Lenard-Magri recursion ladder");
    add_common(hierarchy, config, config_path);
    hierarchy->add_option("--depth", config.depth, "ladder depth (<= 6)");
    hierarchy->add_option("--initial", config.initial, "random | json:<path>");
    hierarchy->add_option("--amplitude", config.hierarchy_amplitude, "random base-point amplitude");
    hierarchy->add_option("--band", config.hierarchy_band, "random base-point band");

    auto* typecheck = app.add_subcommand("typecheck", "compose a pipeline of (r,s)-typed stages");
    add_common(typecheck, config, config_path);
    typecheck->add_option("pipeline", config.pipeline,
                          "semicolon-separated labels, e.g. \"p2;p1;p2\" or \"p2@4;p2@4\"");
    auto* base_opt = typecheck->add_option("--base", config.base, "pin the first stage's base");

    auto* norms = app.add_subcommand("norms", "operator/family norm tables over an M sweep");
    add_common(norms, config, config_path);
    norms->add_option("--operator", config.operator_label, "dx | dx3 | id | <manifest>.json");
    norms->add_option("--base", config.base, "operator base");
    norms->add_option("--family-top", config.family_top, "top base of the operator family");
    norms->add_option("--metric-a", config.metric_a, "field JSON for a Frechet-metric evaluation");
    norms->add_option("--metric-b", config.metric_b, "second field JSON");

    // Exit codes are part of the contract (0 pass, 1 verified failure,
    // 2 config error), so parse failures all map to 2; --help stays 0.
    auto parse = [&]() -> int {
        try {
            app.parse(argc, argv);
            return -1;
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : kdvtower::exit_usage;
        }
    };
    if (const int code = parse(); code >= 0) return code;

    try {
        // Re-parse on top of the config file so explicit flags win.
        if (!config_path.empty()) {
            RunConfig base = kdvtower::load_config_file(config_path);
            std::swap(config, base);
            app.clear();
            if (const int code = parse(); code >= 0) return code;
        }
        config.base_pinned = base_opt->count() > 0;

        if (verify->parsed()) {
            config.command = "verify-poisson";
            return kdvtower::cmd_verify_poisson(config);
        }
        if (simulate->parsed()) {
            config.command = "simulate";
            return kdvtower::cmd_simulate(config);
        }
        if (hierarchy->parsed()) {
            config.command = "hierarchy";
            return kdvtower::cmd_hierarchy(config);
        }
        if (typecheck->parsed()) {
            config.command = "typecheck";
            return kdvtower::cmd_typecheck(config);
        }
        if (norms->parsed()) {
            config.command = "norms";
            return kdvtower::cmd_norms(config);
        }
        std::cerr << "no subcommand selected\n";
        return kdvtower::exit_usage;
    } catch (const kdvtower::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kdvtower::exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kdvtower::exit_failure;
    }
}

#include "kdvtower/commands.hpp"

#include "kdvtower/kdv.hpp"
#include "kdvtower/morphism.hpp"
#include "kdvtower/random_field.hpp"
#include "kdvtower/shift.hpp"
#include "kdvtower/spectral.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace kdvtower {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json config_to_json(const RunConfig& c) {
    ordered_json j;
    j["command"] = c.command;
    j["modes"] = c.modes;
    j["pairing_levels"] = c.pairing_levels;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["morphism"] = c.morphism;
    j["parsing"] = c.parsing;
    j["antisymmetry_tolerance"] = c.antisymmetry_tolerance;
    j["schouten_tolerance"] = c.schouten_tolerance;
    j["dt"] = c.dt;
    j["tmax"] = c.tmax;
    j["monitor_every"] = c.monitor_every;
    j["snapshot_every"] = c.snapshot_every;
    j["snapshot_prefix"] = c.snapshot_prefix;
    j["order_study"] = c.order_study;
    j["initial"] = c.initial;
    j["amplitude"] = c.amplitude;
    j["harmonic"] = c.harmonic;
    j["band"] = c.band;
    j["level"] = c.level;
    j["depth"] = c.depth;
    j["hierarchy_amplitude"] = c.hierarchy_amplitude;
    j["hierarchy_band"] = c.hierarchy_band;
    j["pipeline"] = c.pipeline;
    j["base"] = c.base;
    j["base_pinned"] = c.base_pinned;
    j["operator_label"] = c.operator_label;
    j["family_top"] = c.family_top;
    j["out"] = c.out;
    j["out_csv"] = c.out_csv;
    j["dump_state"] = c.dump_state;
    j["metric_a"] = c.metric_a;
    j["metric_b"] = c.metric_b;
    return j;
}

template <class T>
void maybe(const nlohmann::json& j, const char* key, T& slot) {
    if (j.contains(key)) slot = j.at(key).get<T>();
}

void emit_report(const RunConfig& config, ordered_json payload) {
    ordered_json j;
    j["tool"] = "kdvtower";
    j["version"] = tool_version;
    j["command"] = config.command;
    j["config"] = config_to_json(config);
    j["report"] = std::move(payload);
    const std::string text = j.dump(2) + "\n";
    if (config.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(config.out);
        if (!f) throw config_error("cannot open report path '" + config.out + "'");
        f << text;
    }
}

TowerElement initial_field(const RunConfig& c, const SpectralGrid& grid) {
    if (c.initial == "cos")
        return TowerElement::harmonic(grid, c.level, c.harmonic, c.amplitude);
    if (c.initial == "random") {
        RandomFieldOptions opt;
        opt.band = c.band;
        opt.amplitude = c.amplitude;
        opt.level = c.level;
        return random_band_limited_field(grid, c.seed, opt);
    }
    if (c.initial.rfind("json:", 0) == 0) {
        const std::string path = c.initial.substr(5);
        std::ifstream f(path);
        if (!f) throw config_error("cannot read initial field '" + path + "'");
        std::stringstream buf;
        buf << f.rdbuf();
        return element_from_json(buf.str());
    }
    throw config_error("unknown initial data '" + c.initial + "' (want cos | random | json:<path>)");
}

Morphism morphism_by_label(const std::string& label, const SpectralGrid& grid, Parsing parsing) {
    if (label == "p1") return first_kdv_structure(grid);
    if (label == "p2") return second_kdv_structure(grid, parsing);
    throw config_error("unknown morphism '" + label + "' (want p1 | p2 | p1+p2)");
}

Parsing parsing_from(const RunConfig& c) {
    if (c.parsing == "symmetrized") return Parsing::symmetrized;
    if (c.parsing == "literal") return Parsing::literal;
    throw config_error("unknown parsing '" + c.parsing + "' (want symmetrized | literal)");
}

void validate_common(const RunConfig& c) {
    if (c.trials < 1) throw config_error("trials must be >= 1");
    for (const int m : c.modes)
        if (m < 8 || m % 2 != 0) throw config_error("modes entries must be even and >= 8");
    for (const int l : c.pairing_levels)
        if (l < 0) throw config_error("pairing levels must be >= 0");
}

} // namespace

RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    RunConfig config;
    apply_config_json(config, buf.str());
    return config;
}

void apply_config_json(RunConfig& c, const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    try {
        maybe(j, "command", c.command);
        maybe(j, "modes", c.modes);
        maybe(j, "pairing_levels", c.pairing_levels);
        maybe(j, "trials", c.trials);
        maybe(j, "seed", c.seed);
        maybe(j, "jobs", c.jobs);
        maybe(j, "morphism", c.morphism);
        maybe(j, "parsing", c.parsing);
        maybe(j, "antisymmetry_tolerance", c.antisymmetry_tolerance);
        maybe(j, "schouten_tolerance", c.schouten_tolerance);
        maybe(j, "dt", c.dt);
        maybe(j, "tmax", c.tmax);
        maybe(j, "monitor_every", c.monitor_every);
        maybe(j, "snapshot_every", c.snapshot_every);
        maybe(j, "snapshot_prefix", c.snapshot_prefix);
        maybe(j, "order_study", c.order_study);
        maybe(j, "initial", c.initial);
        maybe(j, "amplitude", c.amplitude);
        maybe(j, "harmonic", c.harmonic);
        maybe(j, "band", c.band);
        maybe(j, "level", c.level);
        maybe(j, "depth", c.depth);
        maybe(j, "hierarchy_amplitude", c.hierarchy_amplitude);
        maybe(j, "hierarchy_band", c.hierarchy_band);
        maybe(j, "pipeline", c.pipeline);
        maybe(j, "base", c.base);
        maybe(j, "base_pinned", c.base_pinned);
        maybe(j, "operator_label", c.operator_label);
        maybe(j, "family_top", c.family_top);
        maybe(j, "out", c.out);
        maybe(j, "out_csv", c.out_csv);
        maybe(j, "dump_state", c.dump_state);
        maybe(j, "metric_a", c.metric_a);
        maybe(j, "metric_b", c.metric_b);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config field error: ") + e.what());
    }
}

int cmd_verify_poisson(const RunConfig& config) {
    validate_common(config);
    const Parsing parsing = parsing_from(config);

    VerifyOptions options;
    options.trials = config.trials;
    options.seed = config.seed;
    options.pairing_levels = config.pairing_levels;
    options.modes_list = config.modes;
    options.antisymmetry_tolerance = config.antisymmetry_tolerance;
    options.schouten_tolerance = config.schouten_tolerance;
    options.jobs = config.jobs;
    options.field_level = std::max(config.level, 4);

    // The grid argument of the builders is replaced per entry of the modes
    // sweep inside verify_*; any valid grid seeds the label dispatch.
    const SpectralGrid probe(config.modes.front());

    VerificationReport report;
    if (config.morphism == "p1+p2") {
        report = verify_compatibility(first_kdv_structure(probe),
                                      second_kdv_structure(probe, parsing), options);
    } else {
        report = verify_poisson(morphism_by_label(config.morphism, probe, parsing), options);
    }

    ordered_json payload = ordered_json::parse(report_to_json(report));
    emit_report(config, std::move(payload));
    return report.all_pass ? exit_pass : exit_failure;
}

namespace {

void write_conservation_csv(const std::string& path, const std::vector<ConservationSample>& rows) {
    std::ofstream f(path);
    if (!f) throw config_error("cannot open CSV path '" + path + "'");
    f << "t,mass,h0,h1,norm0,norm1,norm2\n";
    f.precision(17);
    for (const auto& r : rows)
        f << r.t << "," << r.mass << "," << r.h0 << "," << r.h1 << "," << r.norm0 << ","
          << r.norm1 << "," << r.norm2 << "\n";
}

void dump_state_json(const std::string& path, const SimState& state) {
    std::ofstream f(path);
    if (!f) throw config_error("cannot open state path '" + path + "'");
    f << element_to_json(state.u) << "\n";
}

} // namespace

int cmd_simulate(const RunConfig& config) {
    if (config.modes.empty()) throw config_error("simulate: modes required");
    if (config.dt <= 0.0) throw config_error("simulate: dt must be positive");
    if (config.tmax < 0.0) throw config_error("simulate: tmax must be >= 0");
    const SpectralGrid grid(config.modes.front());
    const TowerElement u0 = initial_field(config, grid);

    SimOptions options;
    options.dt = config.dt;
    options.t_end = config.tmax;
    options.monitor_every = config.monitor_every;
    options.snapshot_every = config.snapshot_prefix.empty() ? 0 : config.snapshot_every;

    ordered_json payload;
    try {
        const SimState state = integrate(u0, options);
        if (!config.out_csv.empty()) write_conservation_csv(config.out_csv, state.history);
        if (!config.dump_state.empty()) dump_state_json(config.dump_state, state);
        for (size_t i = 0; i < state.snapshots.size(); ++i) {
            char suffix[32];
            std::snprintf(suffix, sizeof suffix, "_%05zu.json", i);
            std::ofstream f(config.snapshot_prefix + suffix);
            if (!f) throw config_error("cannot open snapshot path");
            f << element_to_json(state.snapshots[i].u) << "\n";
        }
        const ConservationSample first = state.history.front();
        const ConservationSample last = state.history.back();
        payload["status"] = "completed";
        payload["t_end"] = state.t;
        payload["steps"] = static_cast<long>(std::lround(config.tmax / config.dt));
        payload["snapshots"] = state.snapshots.size();
        payload["mass_drift"] = std::abs(last.mass - first.mass);
        payload["h0_relative_drift"] =
            std::abs(last.h0 - first.h0) / (std::abs(first.h0) + 1e-300);
        payload["h1_relative_drift"] =
            std::abs(last.h1 - first.h1) / (std::abs(first.h1) + 1e-300);

        if (config.order_study) {
            // dt-halving study against a reference 16x finer than the finest
            const CoeffVector ref =
                integrate(u0, SimOptions{config.dt / 64.0, config.tmax, 1 << 30, 0}).u.coeffs();
            auto error_at = [&](double dt) {
                const CoeffVector got =
                    integrate(u0, SimOptions{dt, config.tmax, 1 << 30, 0}).u.coeffs();
                double acc = 0.0;
                for (size_t i = 0; i < got.size(); ++i) acc += std::norm(got[i] - ref[i]);
                return std::sqrt(acc);
            };
            std::vector<double> dts = {config.dt, config.dt / 2.0, config.dt / 4.0};
            std::vector<double> errors;
            for (const double dt : dts) errors.push_back(error_at(dt));
            std::vector<double> observed;
            for (size_t i = 0; i + 1 < errors.size(); ++i)
                observed.push_back(std::log2(errors[i] / (errors[i + 1] + 1e-300)));
            ordered_json study;
            study["dts"] = dts;
            study["errors"] = errors;
            study["observed_orders"] = observed;
            payload["order_study"] = std::move(study);
        }
        emit_report(config, std::move(payload));
        return exit_pass;
    } catch (const blowup_error& e) {
        if (!config.dump_state.empty()) dump_state_json(config.dump_state, e.last_state);
        if (!config.out_csv.empty()) write_conservation_csv(config.out_csv, e.last_state.history);
        payload["status"] = "blow-up";
        payload["what"] = e.what();
        payload["t_last_valid"] = e.last_state.t;
        emit_report(config, std::move(payload));
        return exit_failure;
    }
}

int cmd_hierarchy(const RunConfig& config) {
    if (config.modes.empty()) throw config_error("hierarchy: modes required");
    const SpectralGrid grid(config.modes.front());

    TowerElement q = [&] {
        if (config.initial.rfind("json:", 0) == 0) return initial_field(config, grid);
        RandomFieldOptions opt;
        opt.band = config.hierarchy_band;
        opt.amplitude = config.hierarchy_amplitude;
        opt.level = std::max(config.level, 4);
        return random_band_limited_field(grid, config.seed, opt);
    }();

    ordered_json payload;
    try {
        const HierarchyResult result = lenard_magri_hierarchy(q, config.depth);
        payload["depth"] = config.depth;
        payload["solvability_means"] = result.solvability_means;
        payload["step_residuals"] = result.step_residuals;
        payload["max_bracket"] = result.max_bracket;
        payload["brackets"] = result.brackets;
        auto fields = ordered_json::array();
        for (const auto& gk : result.gradients)
            fields.push_back(ordered_json::parse(element_to_json(gk)));
        payload["gradients"] = std::move(fields);
        emit_report(config, std::move(payload));
        return exit_pass;
    } catch (const config_error& e) {
        payload["status"] = "obstructed";
        payload["what"] = e.what();
        emit_report(config, std::move(payload));
        return exit_failure;
    }
}

namespace {

struct PipelineStage {
    std::string label;
    ShiftType type;
    int base = -1; // -1: chain automatically from the previous stage
};

ShiftType type_by_label(const std::string& label) {
    if (label == "p1" || label == "dx") return ShiftType{1, 0};
    if (label == "p2") return ShiftType{2, 1};
    if (label == "dx3") return ShiftType{3, 0};
    if (label == "id") return ShiftType{0, 0};
    throw config_error("typecheck: unknown operator label '" + label + "'");
}

std::vector<PipelineStage> parse_pipeline(const std::string& text) {
    std::vector<PipelineStage> stages;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ';')) {
        if (token.empty()) continue;
        PipelineStage stage;
        const auto at = token.find('@');
        stage.label = token.substr(0, at);
        if (at != std::string::npos) stage.base = std::stoi(token.substr(at + 1));
        stage.type = type_by_label(stage.label);
        stages.push_back(stage);
    }
    if (stages.empty()) throw config_error("typecheck: empty pipeline");
    return stages;
}

} // namespace

int cmd_typecheck(const RunConfig& config) {
    const std::vector<PipelineStage> stages = parse_pipeline(config.pipeline);

    // Operators without a pinned base form a projective family: chain each
    // stage at the base forced by the previous output. The synthetic offset
    // keeps intermediate levels clear of the type floors; only pinned bases
    // can produce a mismatch.
    const int chain_offset = 64;
    ordered_json payload;
    payload["pipeline"] = config.pipeline;
    try {
        ShiftType acc_type = stages.front().type;
        int acc_base = stages.front().base >= 0 ? stages.front().base
                       : config.base_pinned     ? config.base
                                                : chain_offset;
        if (acc_base < acc_type.s)
            throw level_error("typecheck: stage '" + stages.front().label + "' pinned at base " +
                              std::to_string(acc_base) + " below its type floor s = " +
                              std::to_string(acc_type.s));
        int minimal_base = acc_type.s;
        for (size_t i = 1; i < stages.size(); ++i) {
            const int produced = acc_base - acc_type.s;
            const int next_base =
                stages[i].base >= 0 ? stages[i].base : produced - stages[i].type.r;
            const ComposedType composed =
                compose_types(acc_type, acc_base, stages[i].type, next_base);
            acc_type = composed.type;
            acc_base = composed.base;
            minimal_base = composed.minimal_base;
        }
        payload["composite_type"] = {acc_type.r, acc_type.s};
        payload["minimal_base"] = minimal_base;
        const bool pinned = config.base_pinned || stages.front().base >= 0;
        if (pinned) payload["base"] = acc_base;
        payload["input_level_at_minimal_base"] = minimal_base + acc_type.r;
        payload["output_level_at_minimal_base"] = minimal_base - acc_type.s;
        emit_report(config, std::move(payload));
        return exit_pass;
    } catch (const type_error& e) {
        payload["status"] = "type_error";
        payload["what"] = e.what();
        payload["produced_level"] = e.produced_level;
        payload["required_level"] = e.required_level;
        emit_report(config, std::move(payload));
        return exit_failure;
    } catch (const level_error& e) {
        payload["status"] = "level_error";
        payload["what"] = e.what();
        emit_report(config, std::move(payload));
        return exit_failure;
    }
}

int cmd_norms(const RunConfig& config) {
    validate_common(config);
    ordered_json payload;
    auto table = ordered_json::array();
    for (const int m : config.modes) {
        const SpectralGrid grid(m);
        ShiftOperator op = [&] {
            if (config.operator_label == "dx") return derivative_operator(grid, config.base);
            if (config.operator_label == "dx3") return third_derivative_operator(grid, config.base);
            if (config.operator_label == "id") return identity_operator(grid, config.base);
            if (config.operator_label.size() > 5 &&
                config.operator_label.substr(config.operator_label.size() - 5) == ".json") {
                std::ifstream f(config.operator_label);
                if (!f)
                    throw config_error("norms: cannot read manifest '" + config.operator_label + "'");
                std::stringstream buf;
                buf << f.rdbuf();
                return operator_from_manifest(buf.str(), grid);
            }
            throw config_error("norms: unknown operator '" + config.operator_label + "'");
        }();
        PowerIterationOptions pi;
        pi.seed = config.seed;
        const OperatorNormResult norm = operator_norm(op, pi);
        ordered_json row;
        row["M"] = m;
        row["operator"] = config.operator_label;
        row["base"] = config.base;
        row["type"] = {op.type().r, op.type().s};
        row["norm"] = norm.value;
        row["converged"] = norm.converged;
        row["iterations"] = norm.iterations;
        if (config.family_top >= op.type().s) {
            const OperatorFamily family = make_family(op, config.family_top);
            row["family_top"] = config.family_top;
            row["family_norm"] = family_norm(family, pi);
        }
        table.push_back(std::move(row));
    }
    payload["norms"] = std::move(table);

    if (!config.metric_a.empty() && !config.metric_b.empty()) {
        auto load = [](const std::string& path) {
            std::ifstream f(path);
            if (!f) throw config_error("cannot read field '" + path + "'");
            std::stringstream buf;
            buf << f.rdbuf();
            return element_from_json(buf.str());
        };
        const TowerElement a = load(config.metric_a);
        const TowerElement b = load(config.metric_b);
        payload["frechet_metric"] = frechet_metric(a, b);
    }
    emit_report(config, std::move(payload));
    return exit_pass;
}

} // namespace kdvtower

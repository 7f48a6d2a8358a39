#include "kdvtower/morphism.hpp"

#include "kdvtower/parallel.hpp"
#include "kdvtower/random_field.hpp"
#include "raw_ops.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace kdvtower {

namespace {

double quantile95(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const size_t idx = static_cast<size_t>(std::floor(0.95 * (values.size() - 1)));
    return values[idx];
}

} // namespace

Morphism::Morphism(std::string label, ShiftType type, ParameterDependence dependence,
                   ActionBuilder builder, DomainPredicate domain)
    : label_(std::move(label)), type_(type), dependence_(dependence), builder_(std::move(builder)),
      domain_(std::move(domain)) {}

ShiftOperator Morphism::operator_at(const TowerElement& q, int base) const {
    if (!in_domain(q))
        throw config_error("morphism '" + label_ + "': base point outside the domain");
    return ShiftOperator(label_, type_, base, q.grid(), builder_(q));
}

Morphism first_kdv_structure(const SpectralGrid& grid) {
    return Morphism("p1", ShiftType{1, 0}, ParameterDependence::constant,
                    [grid](const TowerElement&) -> OperatorAction {
                        DiagonalAction a;
                        a.symbol.resize(static_cast<size_t>(grid.modes));
                        for (int m = -grid.modes / 2; m < grid.modes / 2; ++m)
                            a.symbol[static_cast<size_t>(grid.index_of(m))] =
                                Complex(0.0, 2.0 * std::numbers::pi * m);
                        return a;
                    });
}

Morphism second_kdv_structure(const SpectralGrid& grid, Parsing parsing) {
    const double advection = (parsing == Parsing::symmetrized) ? 2.0 : 1.0;
    const std::string label = (parsing == Parsing::symmetrized) ? "p2" : "p2-literal";
    return Morphism(
        label, ShiftType{2, 1}, ParameterDependence::affine,
        [grid, advection](const TowerElement& q) -> OperatorAction {
            CoeffVector qc = q.coeffs();
            CoeffVector dqc = detail::raw_derivative(grid, qc);
            return CallbackAction{[grid, advection, qc = std::move(qc),
                                   dqc = std::move(dqc)](const CoeffVector& u) {
                CoeffVector out = detail::raw_derivative(grid, u, 3);
                const CoeffVector du = detail::raw_derivative(grid, u);
                const CoeffVector q_du = detail::raw_multiply(grid, qc, du);
                const CoeffVector dq_u = detail::raw_multiply(grid, dqc, u);
                for (size_t i = 0; i < out.size(); ++i)
                    out[i] = -0.5 * out[i] + advection * q_du[i] + dq_u[i];
                return out;
            }};
        });
}

TowerElement evaluate(const Morphism& phi, const TowerElement& q, const TowerElement& u) {
    const ShiftType t = phi.type();
    if (u.level() < t.r + t.s)
        throw level_error("evaluate: morphism '" + phi.label() + "' of type (" + std::to_string(t.r) +
                          "," + std::to_string(t.s) + ") needs level >= " + std::to_string(t.r + t.s) +
                          ", element has level " + std::to_string(u.level()));
    const int base = u.level() - t.r; // maximal admissible base
    return apply(phi.operator_at(q, base), u);
}

TowerElement directional_derivative(const Morphism& phi, const TowerElement& q,
                                    const TowerElement& f, const TowerElement& g) {
    switch (phi.dependence()) {
    case ParameterDependence::constant:
        return TowerElement::zero(f.grid(), f.level() - phi.type().total_drop());
    case ParameterDependence::affine:
        return evaluate(phi, add(q, g), f) - evaluate(phi, q, f);
    case ParameterDependence::general:
    default: {
        const double t = 1e-5;
        auto central = [&](double step) {
            const TowerElement plus = evaluate(phi, add(q, scale(step, g)), f);
            const TowerElement minus = evaluate(phi, add(q, scale(-step, g)), f);
            return scale(1.0 / (2.0 * step), plus - minus);
        };
        const TowerElement coarse = central(t);
        const TowerElement fine = central(0.5 * t);
        return scale(1.0 / 3.0, scale(4.0, fine) - coarse); // one Richardson halving
    }
    }
}

Defect antisymmetry_defect(const Morphism& phi, const TowerElement& q, const TowerElement& f,
                           const TowerElement& g, int pairing_level) {
    const TowerElement pf = evaluate(phi, q, f);
    const TowerElement pg = evaluate(phi, q, g);
    Defect d;
    d.raw = std::abs(sobolev_inner(pairing_level, pf, g) + sobolev_inner(pairing_level, pg, f));
    d.normalized = d.raw / (1.0 + sobolev_norm(pairing_level, f) * sobolev_norm(pairing_level, g));
    return d;
}

namespace {

// One cyclic Schouten-type term <a, P'_q(b, direction = T_q c)>_m where the
// tensor supplying the inner application may differ from the one being
// differentiated (that polarization is the mixed bracket).
double bracket_term(const Morphism& outer, const Morphism& inner, const TowerElement& q,
                    const TowerElement& a, const TowerElement& b, const TowerElement& c,
                    int pairing_level) {
    const TowerElement inner_c = evaluate(inner, q, c);
    const TowerElement deriv = directional_derivative(outer, q, b, inner_c);
    return sobolev_inner(pairing_level, a, deriv);
}

double cyclic_sum(const Morphism& outer, const Morphism& inner, const TowerElement& q,
                  const TowerElement& f, const TowerElement& g, const TowerElement& h,
                  int pairing_level) {
    // Rotating (f,g,h) permutes the three terms; summing them in value order
    // keeps the result bit-identical under rotation.
    std::array<double, 3> terms = {bracket_term(outer, inner, q, f, g, h, pairing_level),
                                   bracket_term(outer, inner, q, g, h, f, pairing_level),
                                   bracket_term(outer, inner, q, h, f, g, pairing_level)};
    std::sort(terms.begin(), terms.end());
    return terms[0] + terms[1] + terms[2];
}

double triple_norm(const TowerElement& f, const TowerElement& g, const TowerElement& h, int m) {
    return sobolev_norm(m, f) * sobolev_norm(m, g) * sobolev_norm(m, h);
}

} // namespace

Defect schouten_defect(const Morphism& phi, const TowerElement& q, const TowerElement& f,
                       const TowerElement& g, const TowerElement& h, int pairing_level) {
    Defect d;
    d.raw = std::abs(cyclic_sum(phi, phi, q, f, g, h, pairing_level));
    d.normalized = d.raw / (1.0 + triple_norm(f, g, h, pairing_level));
    return d;
}

Defect compatibility_defect(const Morphism& p, const Morphism& q_tensor, const TowerElement& q,
                            const TowerElement& f, const TowerElement& g, const TowerElement& h,
                            int pairing_level) {
    Defect d;
    d.raw = std::abs(cyclic_sum(p, q_tensor, q, f, g, h, pairing_level) +
                     cyclic_sum(q_tensor, p, q, f, g, h, pairing_level));
    d.normalized = d.raw / (1.0 + triple_norm(f, g, h, pairing_level));
    return d;
}

int schouten_band_cap(int modes) {
    // P_q h must be held exactly before the next product, so twice the field
    // band has to fit under the grid band.
    return (modes / 2 - 1) / 2;
}

namespace {

struct TrialDefects {
    double antisymmetry = 0.0;
    double schouten = 0.0;
};

AxiomCheck summarize(const std::string& morphism, const std::string& axiom, int level, int modes,
                     const VerifyOptions& options, std::vector<double> defects, double tolerance) {
    AxiomCheck check;
    check.morphism = morphism;
    check.axiom = axiom;
    check.pairing_level = level;
    check.modes = modes;
    check.trials = options.trials;
    check.seed = options.seed;
    check.max_defect = defects.empty() ? 0.0 : *std::max_element(defects.begin(), defects.end());
    check.q95_defect = quantile95(std::move(defects));
    check.tolerance = tolerance;
    check.pass = check.max_defect <= tolerance;
    return check;
}

} // namespace

VerificationReport verify_poisson(const Morphism& phi, const VerifyOptions& options) {
    VerificationReport report;
    for (const int modes : options.modes_list) {
        const SpectralGrid grid(modes);
        const int full_band = modes / 2 - 1;
        const int cubic_band = schouten_band_cap(modes);
        for (const int level : options.pairing_levels) {
            auto one_trial = [&](int i) {
                TrialDefects d;
                const auto seed_for = [&](std::uint64_t stream) {
                    return trial_seed(options.seed, static_cast<std::uint64_t>(i), stream);
                };
                RandomFieldOptions field_opts;
                field_opts.decay = options.decay;
                field_opts.level = options.field_level;
                if (options.check_antisymmetry) {
                    field_opts.band = full_band;
                    const TowerElement q = random_band_limited_field(grid, seed_for(1), field_opts);
                    const TowerElement f = random_band_limited_field(grid, seed_for(2), field_opts);
                    const TowerElement g = random_band_limited_field(grid, seed_for(3), field_opts);
                    d.antisymmetry = antisymmetry_defect(phi, q, f, g, level).normalized;
                }
                if (options.check_schouten) {
                    field_opts.band = cubic_band;
                    const TowerElement q = random_band_limited_field(grid, seed_for(4), field_opts);
                    const TowerElement f = random_band_limited_field(grid, seed_for(5), field_opts);
                    const TowerElement g = random_band_limited_field(grid, seed_for(6), field_opts);
                    const TowerElement h = random_band_limited_field(grid, seed_for(7), field_opts);
                    d.schouten = schouten_defect(phi, q, f, g, h, level).normalized;
                }
                return d;
            };
            const auto trial_results = run_trials<TrialDefects>(options.trials, options.jobs, one_trial);
            if (options.check_antisymmetry) {
                std::vector<double> defects;
                defects.reserve(trial_results.size());
                for (const auto& t : trial_results) defects.push_back(t.antisymmetry);
                report.checks.push_back(summarize(phi.label(), "antisymmetry", level, modes, options,
                                                  std::move(defects), options.antisymmetry_tolerance));
            }
            if (options.check_schouten) {
                std::vector<double> defects;
                defects.reserve(trial_results.size());
                for (const auto& t : trial_results) defects.push_back(t.schouten);
                report.checks.push_back(summarize(phi.label(), "schouten", level, modes, options,
                                                  std::move(defects), options.schouten_tolerance));
            }
        }
    }
    for (const auto& c : report.checks) report.all_pass = report.all_pass && c.pass;
    return report;
}

VerificationReport verify_compatibility(const Morphism& p, const Morphism& q_tensor,
                                        const VerifyOptions& options) {
    VerificationReport report;
    for (const int modes : options.modes_list) {
        const SpectralGrid grid(modes);
        RandomFieldOptions field_opts;
        field_opts.decay = options.decay;
        field_opts.level = options.field_level;
        field_opts.band = schouten_band_cap(modes);
        for (const int level : options.pairing_levels) {
            auto one_trial = [&](int i) {
                const auto seed_for = [&](std::uint64_t stream) {
                    return trial_seed(options.seed, static_cast<std::uint64_t>(i), stream);
                };
                const TowerElement q = random_band_limited_field(grid, seed_for(11), field_opts);
                const TowerElement f = random_band_limited_field(grid, seed_for(12), field_opts);
                const TowerElement g = random_band_limited_field(grid, seed_for(13), field_opts);
                const TowerElement h = random_band_limited_field(grid, seed_for(14), field_opts);
                return compatibility_defect(p, q_tensor, q, f, g, h, level).normalized;
            };
            const auto defects = run_trials<double>(options.trials, options.jobs, one_trial);
            report.checks.push_back(summarize(p.label() + "+" + q_tensor.label(), "compatibility",
                                              level, modes, options, defects,
                                              options.schouten_tolerance));
        }
    }
    for (const auto& c : report.checks) report.all_pass = report.all_pass && c.pass;
    return report;
}

std::string report_to_json(const VerificationReport& report) {
    nlohmann::ordered_json j;
    j["all_pass"] = report.all_pass;
    auto checks = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
        nlohmann::ordered_json jc;
        jc["morphism"] = c.morphism;
        jc["axiom"] = c.axiom;
        jc["pairing_level"] = c.pairing_level;
        jc["M"] = c.modes;
        jc["trials"] = c.trials;
        jc["seed"] = c.seed;
        jc["max_defect"] = c.max_defect;
        jc["q95_defect"] = c.q95_defect;
        jc["pass"] = c.pass;
        jc["tolerance"] = c.tolerance;
        checks.push_back(std::move(jc));
    }
    j["checks"] = std::move(checks);
    return j.dump(2);
}

} // namespace kdvtower

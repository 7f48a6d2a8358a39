#include "kdvtower/shift.hpp"

#include "kdvtower/random_field.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kdvtower {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double vector_norm2(const CoeffVector& x) {
    double acc = 0.0;
    for (const auto& z : x) acc += std::norm(z);
    return acc;
}

CoeffVector random_complex_vector(int n, GaussianSource& rng) {
    CoeffVector x(static_cast<size_t>(n));
    for (auto& z : x) z = Complex(rng.normal(), rng.normal());
    return x;
}

// Weighted coefficient norm |x|_n = sqrt(sum w_m(n)^2 |x_m|^2) on raw vectors.
double weighted_norm(int level, const CoeffVector& x) {
    const int m_count = static_cast<int>(x.size());
    double acc = 0.0;
    for (int i = 0; i < m_count; ++i) {
        const double w = sobolev_weight(level, i - m_count / 2);
        acc += w * w * std::norm(x[static_cast<size_t>(i)]);
    }
    return std::sqrt(acc);
}

} // namespace

ShiftType add_types(ShiftType a, ShiftType b) {
    return ShiftType{std::max(a.r, b.r), std::max(a.s, b.s)};
}

ComposedType compose_types(ShiftType t1, int b1, ShiftType t2, int b2) {
    if (b1 < t1.s || b2 < t2.s)
        throw level_error("compose_types: base below the admissible floor of its type");
    const int produced = b1 - t1.s;
    const int required = b2 + t2.r;
    if (produced != required)
        throw type_error("compose_types: first stage lands in H_" + std::to_string(produced) +
                             " but second stage needs H_" + std::to_string(required),
                         produced, required);
    ComposedType out;
    out.type = ShiftType{t1.r + t1.s + t2.r, t2.s};
    out.base = b2;
    // Shifting both bases together preserves composability; the outer stage's
    // floor is always the binding one because b1 - b2 = s1 + r2 >= s1 - s2.
    out.minimal_base = out.type.s;
    return out;
}

CoeffVector apply_action(const OperatorAction& action, const CoeffVector& x) {
    if (const auto* diag = std::get_if<DiagonalAction>(&action)) {
        CoeffVector y(x.size());
        for (size_t i = 0; i < x.size(); ++i) y[i] = diag->symbol[i] * x[i];
        return y;
    }
    if (const auto* dense = std::get_if<DenseAction>(&action)) {
        const int n = dense->size;
        CoeffVector y(static_cast<size_t>(n), Complex(0.0));
#pragma omp parallel for schedule(static) if (n >= 256)
        for (int i = 0; i < n; ++i) {
            Complex acc(0.0);
            const Complex* row = dense->entries.data() + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) acc += row[j] * x[static_cast<size_t>(j)];
            y[static_cast<size_t>(i)] = acc;
        }
        return y;
    }
    return std::get<CallbackAction>(action).forward(x);
}

CoeffVector apply_action_adjoint(const OperatorAction& action, const CoeffVector& x) {
    if (const auto* diag = std::get_if<DiagonalAction>(&action)) {
        CoeffVector y(x.size());
        for (size_t i = 0; i < x.size(); ++i) y[i] = std::conj(diag->symbol[i]) * x[i];
        return y;
    }
    if (const auto* dense = std::get_if<DenseAction>(&action)) {
        const int n = dense->size;
        CoeffVector y(static_cast<size_t>(n), Complex(0.0));
#pragma omp parallel for schedule(static) if (n >= 256)
        for (int i = 0; i < n; ++i) {
            Complex acc(0.0);
            for (int j = 0; j < n; ++j)
                acc += std::conj(dense->entries[static_cast<size_t>(j) * n + static_cast<size_t>(i)]) *
                       x[static_cast<size_t>(j)];
            y[static_cast<size_t>(i)] = acc;
        }
        return y;
    }
    throw config_error("apply_action_adjoint: callback actions carry no adjoint; materialize first");
}

DenseAction materialize_dense(const OperatorAction& action, int m_count) {
    DenseAction out;
    out.size = m_count;
    out.entries.assign(static_cast<size_t>(m_count) * m_count, Complex(0.0));
    CoeffVector basis(static_cast<size_t>(m_count), Complex(0.0));
    for (int j = 0; j < m_count; ++j) {
        basis[static_cast<size_t>(j)] = 1.0;
        const CoeffVector col = apply_action(action, basis);
        basis[static_cast<size_t>(j)] = 0.0;
        for (int i = 0; i < m_count; ++i)
            out.entries[static_cast<size_t>(i) * m_count + static_cast<size_t>(j)] =
                col[static_cast<size_t>(i)];
    }
    return out;
}

ShiftOperator::ShiftOperator(std::string label, ShiftType type, int base, SpectralGrid grid,
                             OperatorAction action)
    : label_(std::move(label)), type_(type), base_(base), grid_(grid), action_(std::move(action)) {
    if (type_.r < 0 || type_.s < 0) throw config_error("ShiftOperator: type components must be >= 0");
    if (base_ < type_.s)
        throw level_error("ShiftOperator '" + label_ + "': base " + std::to_string(base_) +
                          " below type floor s = " + std::to_string(type_.s));
}

ShiftOperator ShiftOperator::rebased(int base) const {
    return ShiftOperator(label_, type_, base, grid_, action_);
}

ShiftOperator derivative_operator(const SpectralGrid& grid, int base) {
    DiagonalAction a;
    a.symbol.resize(static_cast<size_t>(grid.modes));
    for (int m = -grid.modes / 2; m < grid.modes / 2; ++m)
        a.symbol[static_cast<size_t>(grid.index_of(m))] = Complex(0.0, two_pi * m);
    return ShiftOperator("dx", ShiftType{1, 0}, base, grid, std::move(a));
}

ShiftOperator third_derivative_operator(const SpectralGrid& grid, int base) {
    DiagonalAction a;
    a.symbol.resize(static_cast<size_t>(grid.modes));
    for (int m = -grid.modes / 2; m < grid.modes / 2; ++m) {
        const Complex il(0.0, two_pi * m);
        a.symbol[static_cast<size_t>(grid.index_of(m))] = il * il * il;
    }
    return ShiftOperator("dx3", ShiftType{3, 0}, base, grid, std::move(a));
}

ShiftOperator identity_operator(const SpectralGrid& grid, int base) {
    DiagonalAction a;
    a.symbol.assign(static_cast<size_t>(grid.modes), Complex(1.0));
    return ShiftOperator("id", ShiftType{0, 0}, base, grid, std::move(a));
}

ShiftOperator zero_operator(const SpectralGrid& grid, int base) {
    DiagonalAction a;
    a.symbol.assign(static_cast<size_t>(grid.modes), Complex(0.0));
    return ShiftOperator("zero", ShiftType{0, 0}, base, grid, std::move(a));
}

ShiftOperator operator_from_manifest(const std::string& json_text, const SpectralGrid& grid) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("operator manifest parse error: ") + e.what());
    }
    try {
        const std::string label = j.at("label").get<std::string>();
        const ShiftType type{j.at("type").at(0).get<int>(), j.at("type").at(1).get<int>()};
        const int base = j.at("base").get<int>();
        const auto& action = j.at("action");
        if (action.is_string()) {
            const std::string name = action.get<std::string>();
            if (name == "dx")
                return ShiftOperator(label, type, base, grid,
                                     derivative_operator(grid, std::max(base, 0)).action());
            if (name == "dx3")
                return ShiftOperator(label, type, base, grid,
                                     third_derivative_operator(grid, std::max(base, 3)).action());
            if (name == "id")
                return ShiftOperator(label, type, base, grid, identity_operator(grid, 0).action());
            throw config_error("operator manifest: unknown action '" + name + "'");
        }
        const auto& rows = action.at("matrix");
        if (static_cast<int>(rows.size()) != grid.modes)
            throw config_error("operator manifest: matrix size " + std::to_string(rows.size()) +
                               " does not match M = " + std::to_string(grid.modes));
        DenseAction dense;
        dense.size = grid.modes;
        dense.entries.reserve(static_cast<size_t>(grid.modes) * grid.modes);
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != grid.modes)
                throw config_error("operator manifest: ragged matrix row");
            for (const auto& entry : row)
                dense.entries.emplace_back(entry.at(0).get<double>(), entry.at(1).get<double>());
        }
        return ShiftOperator(label, type, base, grid, std::move(dense));
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("operator manifest field error: ") + e.what());
    }
}

TowerElement apply(const ShiftOperator& op, const TowerElement& u) {
    if (!(op.grid() == u.grid())) throw grid_error("apply: operator and element grids differ");
    if (u.level() < op.input_level())
        throw level_error("apply: operator '" + op.label() + "' needs level >= " +
                          std::to_string(op.input_level()) + ", element has level " +
                          std::to_string(u.level()));
    CoeffVector y = apply_action(op.action(), u.coeffs());
    return TowerElement(u.grid(), op.output_level(), std::move(y));
}

OperatorNormResult operator_norm(const ShiftOperator& op, PowerIterationOptions options) {
    const int m_count = op.grid().modes;
    const int in_level = op.input_level();
    const int out_level = op.output_level();

    // B = D_{out} A D_{in}^{-1} applied through the action, plus its adjoint.
    std::vector<double> w_in(static_cast<size_t>(m_count)), w_out(static_cast<size_t>(m_count));
    for (int i = 0; i < m_count; ++i) {
        w_in[static_cast<size_t>(i)] = sobolev_weight(in_level, i - m_count / 2);
        w_out[static_cast<size_t>(i)] = sobolev_weight(out_level, i - m_count / 2);
    }

    // Callback actions carry no adjoint; fall back to their dense matrix.
    OperatorAction materialized;
    const OperatorAction* action = &op.action();
    if (std::holds_alternative<CallbackAction>(*action)) {
        materialized = materialize_dense(*action, m_count);
        action = &materialized;
    }

    auto apply_b = [&](const CoeffVector& x) {
        CoeffVector t(x);
        for (int i = 0; i < m_count; ++i) t[static_cast<size_t>(i)] /= w_in[static_cast<size_t>(i)];
        CoeffVector y = apply_action(*action, t);
        for (int i = 0; i < m_count; ++i) y[static_cast<size_t>(i)] *= w_out[static_cast<size_t>(i)];
        return y;
    };
    auto apply_bt = [&](const CoeffVector& y) {
        CoeffVector t(y);
        for (int i = 0; i < m_count; ++i) t[static_cast<size_t>(i)] *= w_out[static_cast<size_t>(i)];
        CoeffVector x = apply_action_adjoint(*action, t);
        for (int i = 0; i < m_count; ++i) x[static_cast<size_t>(i)] /= w_in[static_cast<size_t>(i)];
        return x;
    };

    OperatorNormResult result;
    std::uint64_t seed = options.seed;
    for (int attempt = 0; attempt < 2; ++attempt) {
        GaussianSource rng(seed);
        CoeffVector x = random_complex_vector(m_count, rng);
        double nx2 = vector_norm2(x);
        if (nx2 == 0.0) continue;
        double rayleigh = 0.0;
        for (int it = 1; it <= options.max_iterations; ++it) {
            const CoeffVector y = apply_b(x);
            const double ny2 = vector_norm2(y);
            const double rq = ny2 / nx2; // |Bx|^2/|x|^2 -> sigma_max^2
            result.iterations = it;
            if (ny2 == 0.0) {
                result.value = 0.0;
                result.converged = true;
                return result;
            }
            const bool settled = std::abs(rq - rayleigh) <= options.tolerance * std::max(1.0, rq);
            rayleigh = rq;
            if (settled) {
                result.value = std::sqrt(rayleigh);
                result.converged = true;
                return result;
            }
            x = apply_bt(y);
            nx2 = vector_norm2(x);
            const double inv = 1.0 / std::sqrt(nx2);
            for (auto& z : x) z *= inv;
            nx2 = 1.0;
        }
        result.value = std::sqrt(rayleigh);
        result.restarts = attempt + 1;
        seed = trial_seed(options.seed, 0xfeedULL + static_cast<std::uint64_t>(attempt));
    }
    result.converged = false; // last Rayleigh quotient with a warning flag
    return result;
}

OperatorFamily::OperatorFamily(std::vector<ShiftOperator> members) : members_(std::move(members)) {
    if (members_.empty()) throw config_error("OperatorFamily: no members");
    const ShiftType t = members_.front().type();
    for (size_t i = 0; i < members_.size(); ++i) {
        if (!(members_[i].type() == t))
            throw config_error("OperatorFamily: members must share one type");
        if (members_[i].base() != t.s + static_cast<int>(i))
            throw config_error("OperatorFamily: bases must run consecutively from s = " +
                               std::to_string(t.s));
    }
}

OperatorFamily make_family(const ShiftOperator& prototype, int top_base) {
    std::vector<ShiftOperator> members;
    for (int b = prototype.type().s; b <= top_base; ++b) members.push_back(prototype.rebased(b));
    return OperatorFamily(std::move(members));
}

double family_norm(const OperatorFamily& family, PowerIterationOptions options) {
    double acc = 0.0;
    for (const auto& member : family.members()) acc += operator_norm(member, options).value;
    return acc;
}

ConsistencyReport check_family_consistency(const OperatorFamily& family, int trials,
                                           std::uint64_t seed, double tolerance) {
    ConsistencyReport report;
    report.trials = trials;
    report.tolerance = tolerance;
    const auto& members = family.members();
    const int m_count = members.front().grid().modes;
    for (int t = 0; t < trials; ++t) {
        GaussianSource rng(trial_seed(seed, static_cast<std::uint64_t>(t)));
        CoeffVector u = random_complex_vector(m_count, rng);
        const double inv = 1.0 / std::sqrt(vector_norm2(u));
        for (auto& z : u) z *= inv;
        for (size_t j = 1; j < members.size(); ++j) {
            const CoeffVector via_j = apply_action(members[j].action(), u);
            for (size_t i = 0; i < j; ++i) {
                // Bonding maps are identity on coefficients, so the diagram
                // reduces to the actions agreeing outright.
                const CoeffVector via_i = apply_action(members[i].action(), u);
                for (size_t k = 0; k < via_i.size(); ++k)
                    report.max_defect = std::max(report.max_defect, std::abs(via_j[k] - via_i[k]));
            }
        }
    }
    report.pass = report.max_defect <= tolerance;
    return report;
}

TameBoundReport check_tame_bound(const ShiftOperator& op, double candidate, int trials,
                                 std::uint64_t seed, double tolerance) {
    TameBoundReport report;
    report.candidate = candidate;
    report.trials = trials;
    const int m_count = op.grid().modes;
    for (int t = 0; t < trials; ++t) {
        GaussianSource rng(trial_seed(seed, static_cast<std::uint64_t>(t)));
        CoeffVector x = random_complex_vector(m_count, rng);
        const double nx = weighted_norm(op.input_level(), x);
        if (nx == 0.0) continue;
        for (auto& z : x) z /= nx;
        const CoeffVector y = apply_action(op.action(), x);
        report.max_ratio = std::max(report.max_ratio, weighted_norm(op.output_level(), y));
    }
    report.defect = std::max(0.0, report.max_ratio - candidate);
    report.pass = report.max_ratio <= candidate * (1.0 + tolerance) + tolerance;
    return report;
}

} // namespace kdvtower

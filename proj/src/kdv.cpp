#include "kdvtower/kdv.hpp"

#include "fft_engine.hpp"
#include "raw_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kdvtower {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

Functional mass_functional() {
    Functional f;
    f.label = "mass";
    f.value = [](const TowerElement& q) { return mean_value(q); };
    f.gradient = [](const TowerElement& q) {
        return TowerElement::constant(q.grid(), q.level(), 1.0);
    };
    return f;
}

Functional quadratic_hamiltonian() {
    Functional f;
    f.label = "h0";
    // integral q^2 = sum |c_m|^2 by Parseval
    f.value = [](const TowerElement& q) { return sobolev_inner(0, q, q); };
    f.gradient = [](const TowerElement& q) { return scale(2.0, q); };
    return f;
}

Functional cubic_hamiltonian() {
    Functional f;
    f.label = "h1";
    f.value = [](const TowerElement& q) {
        const TowerElement dq = derivative(q);
        // <q^2, q>_0 reads only the band the grid retains of q^2, which is
        // exact there, so the cubic term is exact for grid fields.
        const double cubic = sobolev_inner(0, multiply(q, q), q);
        return 0.5 * sobolev_inner(0, dq, dq) + cubic;
    };
    f.gradient = [](const TowerElement& q) {
        return scale(-1.0, derivative(q, 2)) + scale(3.0, multiply(q, q));
    };
    return f;
}

TowerElement kdv_rhs(const TowerElement& u) {
    return scale(-1.0, derivative(u, 3)) + scale(6.0, multiply(u, derivative(u)));
}

BihamiltonianDefects bihamiltonian_defects(const TowerElement& q, Parsing parsing) {
    const TowerElement rhs = kdv_rhs(q);
    const double scale_norm = sobolev_norm(0, rhs) + 1e-300;

    const Morphism p1 = first_kdv_structure(q.grid());
    const Morphism p2 = second_kdv_structure(q.grid(), parsing);
    const TowerElement via_first = evaluate(p1, q, cubic_hamiltonian().gradient(q));
    const TowerElement via_second = evaluate(p2, q, quadratic_hamiltonian().gradient(q));

    BihamiltonianDefects d;
    d.first = sobolev_norm(0, rhs - via_first.with_level(rhs.level())) / scale_norm;
    d.second = sobolev_norm(0, rhs - via_second.with_level(rhs.level())) / scale_norm;
    return d;
}

double poisson_bracket(const Functional& f, const Functional& g, const Morphism& phi,
                       const TowerElement& q) {
    return sobolev_inner(0, f.gradient(q), evaluate(phi, q, g.gradient(q)));
}

// ---- ETDRK4 ----

namespace detail {

namespace {
Complex phi_series(int j, Complex z) {
    // sum_{k>=0} z^k / (k+j)!
    double fact = 1.0;
    for (int k = 2; k <= j; ++k) fact *= k;
    Complex term = 1.0 / fact;
    Complex acc = term;
    Complex zp = 1.0;
    for (int k = 1; k <= 24; ++k) {
        zp *= z;
        fact = 1.0;
        for (int i = 2; i <= k + j; ++i) fact *= i;
        acc += zp / fact;
    }
    return acc;
}
} // namespace

Complex phi1(Complex z) {
    if (std::abs(z) < 0.5) return phi_series(1, z);
    return (std::exp(z) - 1.0) / z;
}

Complex phi2(Complex z) {
    if (std::abs(z) < 0.5) return phi_series(2, z);
    return (std::exp(z) - 1.0 - z) / (z * z);
}

Complex phi3(Complex z) {
    if (std::abs(z) < 0.5) return phi_series(3, z);
    return (std::exp(z) - 1.0 - z - 0.5 * z * z) / (z * z * z);
}

} // namespace detail

namespace {

struct EtdCoefficients {
    // per-mode tables of the Cox-Matthews ETDRK4 factors
    CoeffVector e_full, e_half, q_half, f1, f2, f3;
};

EtdCoefficients etd_coefficients(const SpectralGrid& grid, double dt) {
    EtdCoefficients c;
    const int m_count = grid.modes;
    c.e_full.resize(static_cast<size_t>(m_count));
    c.e_half.resize(static_cast<size_t>(m_count));
    c.q_half.resize(static_cast<size_t>(m_count));
    c.f1.resize(static_cast<size_t>(m_count));
    c.f2.resize(static_cast<size_t>(m_count));
    c.f3.resize(static_cast<size_t>(m_count));
    for (int m = -m_count / 2; m < m_count / 2; ++m) {
        // -d^3/dx^3 has symbol i(2 pi m)^3: purely dispersive
        const Complex z = Complex(0.0, std::pow(two_pi * m, 3)) * dt;
        const size_t i = static_cast<size_t>(grid.index_of(m));
        c.e_full[i] = std::exp(z);
        c.e_half[i] = std::exp(0.5 * z);
        c.q_half[i] = 0.5 * dt * detail::phi1(0.5 * z);
        const Complex p1 = detail::phi1(z), p2 = detail::phi2(z), p3 = detail::phi3(z);
        c.f1[i] = dt * (p1 - 3.0 * p2 + 4.0 * p3);
        c.f2[i] = dt * (p2 - 2.0 * p3);
        c.f3[i] = dt * (4.0 * p3 - p2);
    }
    return c;
}

// N(u) = 6 u u' in coefficient space, dealiased.
CoeffVector nonlinear_term(const SpectralGrid& grid, const CoeffVector& u) {
    CoeffVector n = detail::raw_multiply(grid, u, detail::raw_derivative(grid, u));
    for (auto& z : n) z *= 6.0;
    return n;
}

bool finite(const CoeffVector& c) {
    for (const auto& z : c)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

CoeffVector etdrk4_step(const SpectralGrid& grid, const EtdCoefficients& c, const CoeffVector& v) {
    const size_t n = v.size();
    const CoeffVector k1 = nonlinear_term(grid, v);
    CoeffVector a(n), b(n), d(n), out(n);
    for (size_t i = 0; i < n; ++i) a[i] = c.e_half[i] * v[i] + c.q_half[i] * k1[i];
    const CoeffVector k2 = nonlinear_term(grid, a);
    for (size_t i = 0; i < n; ++i) b[i] = c.e_half[i] * v[i] + c.q_half[i] * k2[i];
    const CoeffVector k3 = nonlinear_term(grid, b);
    for (size_t i = 0; i < n; ++i) d[i] = c.e_half[i] * a[i] + c.q_half[i] * (2.0 * k3[i] - k1[i]);
    const CoeffVector k4 = nonlinear_term(grid, d);
    for (size_t i = 0; i < n; ++i)
        out[i] = c.e_full[i] * v[i] + c.f1[i] * k1[i] + 2.0 * c.f2[i] * (k2[i] + k3[i]) +
                 c.f3[i] * k4[i];
    return out;
}

double max_amplitude(const TowerElement& u) {
    double acc = 0.0;
    for (const auto& z : u.coeffs()) acc += std::abs(z);
    return acc;
}

void check_advective_guard(const TowerElement& u0, double dt) {
    // RK4 covers about 2.8 units along the imaginary axis; the advective
    // speed of the explicit part is at most 6 max|u| over band pi M.
    const double speed = 6.0 * max_amplitude(u0) * (two_pi * u0.grid().modes / 2);
    if (dt * speed > 2.8)
        throw config_error("integrate: dt = " + std::to_string(dt) +
                           " violates the advective stability guard (dt * 6 max|u| * pi M <= 2.8)");
}

} // namespace

ConservationSample conserved_quantities(const TowerElement& u, double t) {
    ConservationSample s;
    s.t = t;
    s.mass = mean_value(u);
    s.h0 = quadratic_hamiltonian().value(u);
    s.h1 = cubic_hamiltonian().value(u);
    s.norm0 = sobolev_norm(0, u);
    s.norm1 = sobolev_norm(1, u);
    s.norm2 = sobolev_norm(2, u);
    return s;
}

SimState kdv_step(const SimState& state, double dt) {
    if (dt <= 0.0) throw config_error("kdv_step: dt must be positive");
    const EtdCoefficients c = etd_coefficients(state.u.grid(), dt);
    CoeffVector next = etdrk4_step(state.u.grid(), c, state.u.coeffs());
    if (!finite(next))
        throw blowup_error("kdv_step: non-finite state after one step", state);
    SimState out{state.t + dt, TowerElement(state.u.grid(), state.u.level(), std::move(next)),
                 state.history, state.snapshots};
    return out;
}

SimState integrate(const TowerElement& u0, const SimOptions& options) {
    if (options.dt <= 0.0) throw config_error("integrate: dt must be positive");
    if (options.t_end < 0.0) throw config_error("integrate: t_end must be >= 0");
    check_advective_guard(u0, options.dt);

    const SpectralGrid grid = u0.grid();
    const EtdCoefficients c = etd_coefficients(grid, options.dt);
    const long n_steps = std::lround(options.t_end / options.dt);
    const int monitor = std::max(1, options.monitor_every);

    SimState state{0.0, u0, {}, {}};
    state.history.push_back(conserved_quantities(u0, 0.0));
    if (options.snapshot_every > 0) state.snapshots.push_back({0.0, u0});

    CoeffVector v = u0.coeffs();
    for (long step = 1; step <= n_steps; ++step) {
        CoeffVector prev = v;
        v = etdrk4_step(grid, c, v);
        const double t = static_cast<double>(step) * options.dt;
        if (!finite(v)) {
            state.t = static_cast<double>(step - 1) * options.dt;
            state.u = TowerElement(grid, u0.level(), std::move(prev));
            throw blowup_error("integrate: blow-up at t = " + std::to_string(t), state);
        }
        if (step % monitor == 0 || step == n_steps) {
            state.t = t;
            state.u = TowerElement(grid, u0.level(), v);
            state.history.push_back(conserved_quantities(state.u, t));
        }
        if (options.snapshot_every > 0 && step % options.snapshot_every == 0)
            state.snapshots.push_back({t, TowerElement(grid, u0.level(), v)});
    }
    state.t = static_cast<double>(n_steps) * options.dt;
    state.u = TowerElement(grid, u0.level(), std::move(v));
    return state;
}

HierarchyResult lenard_magri_hierarchy(const TowerElement& q, int depth,
                                       double solvability_tolerance) {
    if (depth < 0 || depth > hierarchy_depth_cap)
        throw config_error("hierarchy: depth must lie in [0, " +
                           std::to_string(hierarchy_depth_cap) + "]");
    const Morphism p2 = second_kdv_structure(q.grid());

    HierarchyResult result;
    result.gradients.push_back(TowerElement::constant(q.grid(), q.level(), 1.0));
    for (int k = 0; k < depth; ++k) {
        const TowerElement rhs = evaluate(p2, q, result.gradients.back().with_level(q.level()));
        const double residual_mean = mean_value(rhs);
        result.solvability_means.push_back(std::abs(residual_mean));
        if (std::abs(residual_mean) > solvability_tolerance)
            throw config_error("hierarchy: rung " + std::to_string(k + 1) +
                               " is obstructed, right side has mean " + std::to_string(residual_mean));
        TowerElement next = antiderivative_zero_mean(rhs);
        // residual |P1 g_{k+1} - rhs|_0 after removing the solvability mean
        const TowerElement back = derivative(next);
        result.step_residuals.push_back(
            sobolev_norm(0, back - (rhs - TowerElement::constant(q.grid(), rhs.level(), residual_mean))
                                      .with_level(back.level())));
        result.gradients.push_back(std::move(next));
    }

    const size_t n = result.gradients.size();
    result.brackets.assign(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            const TowerElement gj = result.gradients[j].with_level(std::max(1, result.gradients[j].level()));
            const double bracket =
                std::abs(sobolev_inner(0, result.gradients[i], derivative(gj)));
            result.brackets[i][j] = bracket;
            result.max_bracket = std::max(result.max_bracket, bracket);
        }
    }
    return result;
}

} // namespace kdvtower

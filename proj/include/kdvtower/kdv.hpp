#ifndef KDVTOWER_KDV_HPP
#define KDVTOWER_KDV_HPP

#include "kdvtower/morphism.hpp"
#include "kdvtower/spectral.hpp"

#include <functional>
#include <string>
#include <vector>

namespace kdvtower {

/** A functional on fields together with its L2 (Riesz) gradient. */
struct Functional {
    std::string label;
    std::function<double(const TowerElement&)> value;
    std::function<TowerElement(const TowerElement&)> gradient;
};

Functional mass_functional();      // integral of q; gradient 1; Casimir of the first structure
Functional quadratic_hamiltonian(); // integral of q^2; gradient 2q
Functional cubic_hamiltonian();     // integral of q'^2/2 + q^3; gradient -q'' + 3q^2

// Right side of dt u = -u''' + 6 u u', dealiased. Needs u.level >= 3.
TowerElement kdv_rhs(const TowerElement& u);

struct BihamiltonianDefects {
    double first = 0.0;  // |rhs - P1 grad H1| / (|rhs| + eps)
    double second = 0.0; // |rhs - P2 grad H0| / (|rhs| + eps)
};

BihamiltonianDefects bihamiltonian_defects(const TowerElement& q,
                                           Parsing parsing = Parsing::symmetrized);

// {F, G}_Phi(q) = <grad F(q), Phi_q grad G(q)>_0.
double poisson_bracket(const Functional& f, const Functional& g, const Morphism& phi,
                       const TowerElement& q);

// ---- time integration ----

struct SimOptions {
    double dt = 1e-4;
    double t_end = 1.0;
    int monitor_every = 10;  // record conserved quantities every k steps
    int snapshot_every = 0;  // keep full field snapshots every k steps (0 = off)
};

struct ConservationSample {
    double t = 0.0;
    double mass = 0.0;
    double h0 = 0.0;
    double h1 = 0.0;
    double norm0 = 0.0;
    double norm1 = 0.0;
    double norm2 = 0.0;
};

struct Snapshot {
    double t = 0.0;
    TowerElement u;
};

struct SimState {
    double t = 0.0;
    TowerElement u;
    std::vector<ConservationSample> history;
    std::vector<Snapshot> snapshots;
};

// Blow-up carries the last finite state so the CLI can dump it.
class blowup_error : public std::runtime_error {
public:
    blowup_error(std::string what, SimState last)
        : std::runtime_error(std::move(what)), last_state(std::move(last)) {}
    SimState last_state;
};

/** Fourth-order exponential time differencing (Cox-Matthews ETDRK4).
 *
 * The dispersive symbol i(2 pi m)^3 is integrated exactly by the
 * e^{L dt} factors, so there is no linear stability restriction; the guard
 * below only protects the explicit treatment of the advective term
 * (dt * 6 max|u| * pi M bounded by the RK4 imaginary-axis limit).
 */
SimState kdv_step(const SimState& state, double dt);
SimState integrate(const TowerElement& u0, const SimOptions& options);

ConservationSample conserved_quantities(const TowerElement& u, double t);

// ---- recursion hierarchy ----

struct HierarchyResult {
    std::vector<TowerElement> gradients;      // g_0 = 1, g_1, ..., g_depth
    std::vector<double> solvability_means;    // residual mean before each inversion
    std::vector<std::vector<double>> brackets; // |<g_i, d/dx g_j>_0|
    double max_bracket = 0.0;
    std::vector<double> step_residuals;       // |P1 g_{k+1} - (P2 g_k - mean)|_0
};

/** Lenard-Magri ladder P1 g_{k+1} = P2(q) g_k from g_0 = 1.
 *
 * Each inversion of d/dx demands a mean-free right side (checked, reported)
 * and fixes the additive constant by the zero-mean normalization; the
 * leftover constant ambiguity is a multiple of the Casimir gradient and
 * drops out of the P1 brackets. Depth is capped: the rungs amplify by about
 * (2 pi band)^2/2 each, so deep ladders lose conditioning.
 */
HierarchyResult lenard_magri_hierarchy(const TowerElement& q, int depth,
                                       double solvability_tolerance = 1e-10);

constexpr int hierarchy_depth_cap = 6;

// ---- ETD coefficient machinery (exposed for direct testing) ----
namespace detail {
// phi_j(z) = (e^z - sum_{k<j} z^k/k!)/z^j, stable near z = 0 via Taylor series.
Complex phi1(Complex z);
Complex phi2(Complex z);
Complex phi3(Complex z);
} // namespace detail

} // namespace kdvtower

#endif

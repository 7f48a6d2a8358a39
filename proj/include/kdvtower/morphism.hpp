#ifndef KDVTOWER_MORPHISM_HPP
#define KDVTOWER_MORPHISM_HPP

#include "kdvtower/shift.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace kdvtower {

enum class ParameterDependence { constant, affine, general };

// Which reading of the second KdV structure's first-order part is in force.
// The symmetrized operator -1/2 u''' + 2 q u' + q' u is the antisymmetric
// one; the literal grouping -1/2 u''' + q u' + q' u = -1/2 u''' + (q u)' is
// kept behind this switch as a regression witness.
enum class Parsing { symmetrized, literal };

/** An operator-valued map q -> P_q of fixed type (r, s): a local shift
 * morphism realized on the grid. The builder returns the coefficient action
 * of P_q, which must be level-independent (the projective-consistency
 * diagram); the base is chosen at application time. */
class Morphism {
public:
    using ActionBuilder = std::function<OperatorAction(const TowerElement& q)>;
    using DomainPredicate = std::function<bool(const TowerElement& q)>;

    Morphism(std::string label, ShiftType type, ParameterDependence dependence,
             ActionBuilder builder, DomainPredicate domain = nullptr);

    const std::string& label() const { return label_; }
    ShiftType type() const { return type_; }
    ParameterDependence dependence() const { return dependence_; }
    bool in_domain(const TowerElement& q) const { return !domain_ || domain_(q); }

    // Materialize P_q as a shift operator at the given base (>= type.s).
    ShiftOperator operator_at(const TowerElement& q, int base) const;

private:
    std::string label_;
    ShiftType type_;
    ParameterDependence dependence_;
    ActionBuilder builder_;
    DomainPredicate domain_;
};

// First KdV structure: q |-> d/dx, type (1, 0), constant in q.
Morphism first_kdv_structure(const SpectralGrid& grid);

// Second KdV structure: type (2, 1), affine in q.
Morphism second_kdv_structure(const SpectralGrid& grid, Parsing parsing = Parsing::symmetrized);

// P_q applied to u at the maximal admissible base u.level - r. Throws
// level_error when u.level < r + s and config_error outside the domain.
TowerElement evaluate(const Morphism& phi, const TowerElement& q, const TowerElement& u);

// P'_q(f, g) = d/dt P_{q+tg} f at t=0: exact increment for affine morphisms,
// Richardson-extrapolated central difference (t = 1e-5, one halving) for
// general ones, zero for constant ones.
TowerElement directional_derivative(const Morphism& phi, const TowerElement& q,
                                    const TowerElement& f, const TowerElement& g);

struct Defect {
    double raw = 0.0;
    double normalized = 0.0; // raw / (1 + product of level-m norms of the vector arguments)
};

// |<P_q f, g>_m + <P_q g, f>_m|: the antisymmetry residual at pairing level m.
Defect antisymmetry_defect(const Morphism& phi, const TowerElement& q, const TowerElement& f,
                           const TowerElement& g, int pairing_level = 0);

// |sum_cyc <f, P'_q(g, P_q h)>_m| over (f,g,h), (g,h,f), (h,f,g): the
// Schouten-bracket residual, whose vanishing is the Jacobi identity.
Defect schouten_defect(const Morphism& phi, const TowerElement& q, const TowerElement& f,
                       const TowerElement& g, const TowerElement& h, int pairing_level = 0);

// Mixed bracket |sum_cyc <f, P'_q(g, Q_q h) + Q'_q(g, P_q h)>_m|; vanishes
// when P and Q are compatible.
Defect compatibility_defect(const Morphism& p, const Morphism& q_tensor, const TowerElement& q,
                            const TowerElement& f, const TowerElement& g, const TowerElement& h,
                            int pairing_level = 0);

// ---- randomized verification ----

struct VerifyOptions {
    int trials = 100;
    std::uint64_t seed = 7;
    std::vector<int> pairing_levels = {0};
    std::vector<int> modes_list = {64};
    double antisymmetry_tolerance = 1e-10;
    double schouten_tolerance = 1e-9;
    double decay = 2.0;
    int field_level = 4;
    int jobs = 1;
    bool check_antisymmetry = true;
    bool check_schouten = true;
};

struct AxiomCheck {
    std::string morphism;
    std::string axiom; // "antisymmetry" | "schouten" | "compatibility"
    int pairing_level = 0;
    int modes = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    double max_defect = 0.0;
    double q95_defect = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::vector<AxiomCheck> checks;
    bool all_pass = true;
};

// Randomized antisymmetry and Schouten trials over band-limited Gaussian
// fields for every (pairing level, M) combination. Failures are data, not
// errors.
VerificationReport verify_poisson(const Morphism& phi, const VerifyOptions& options);

// Mixed-bracket trials for a pair of tensors.
VerificationReport verify_compatibility(const Morphism& p, const Morphism& q,
                                        const VerifyOptions& options);

// Band cap under which the cubic chains of the Schouten/compatibility
// expressions are computed without truncation loss at M modes.
int schouten_band_cap(int modes);

std::string report_to_json(const VerificationReport& report);

} // namespace kdvtower

#endif

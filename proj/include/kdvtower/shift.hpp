#ifndef KDVTOWER_SHIFT_HPP
#define KDVTOWER_SHIFT_HPP

#include "kdvtower/spectral.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace kdvtower {

/** Regularity type (r, s): the operator consumes r derivatives above its
 * base and loses s below it, mapping H_{base+r} -> H_{base-s}. */
struct ShiftType {
    int r = 0;
    int s = 0;

    bool operator==(const ShiftType& o) const { return r == o.r && s == o.s; }
    int total_drop() const { return r + s; }
};

// Componentwise max: the conservative tag for a sum of same-base operators.
ShiftType add_types(ShiftType a, ShiftType b);

/** Result of composing "t1 then t2" as shift types.
 *
 * Composable iff the first output level equals the second input level,
 * b1 - s1 == b2 + r2; the composite maps H_{b1+r1} -> H_{b2-s2} and is
 * reported at the base of the outer (second) operator: type
 * (r1 + s1 + r2, s2) at base b2. minimal_base is the smallest base at which
 * the whole chain stays admissible when both stages are shifted together.
 */
struct ComposedType {
    ShiftType type;
    int base;
    int minimal_base;
};

ComposedType compose_types(ShiftType t1, int b1, ShiftType t2, int b2);

// ---- coefficient actions ----

// Per-mode closed form: c_m -> symbol[m] * c_m (constant-coefficient operators).
struct DiagonalAction {
    CoeffVector symbol; // ascending mode order, length M
};

// Dense M x M complex matrix in row-major order, acting on ascending-order
// coefficient vectors. Memory-heavy; intended for multiplication-type
// operators and oracles, single use per worker.
struct DenseAction {
    int size = 0;
    CoeffVector entries;
};

// Arbitrary linear coefficient map. No adjoint is available, so norm
// computations first materialize the dense matrix.
struct CallbackAction {
    std::function<CoeffVector(const CoeffVector&)> forward;
};

using OperatorAction = std::variant<DiagonalAction, DenseAction, CallbackAction>;

CoeffVector apply_action(const OperatorAction& action, const CoeffVector& x);
CoeffVector apply_action_adjoint(const OperatorAction& action, const CoeffVector& x);
DenseAction materialize_dense(const OperatorAction& action, int m_count);

/** A linear map H_{base+r} -> H_{base-s} on the grid, with its regularity
 * metadata. The action works on coefficients and is level-independent; the
 * (base, type) pair is what the type checker consumes. */
class ShiftOperator {
public:
    ShiftOperator(std::string label, ShiftType type, int base, SpectralGrid grid, OperatorAction action);

    const std::string& label() const { return label_; }
    ShiftType type() const { return type_; }
    int base() const { return base_; }
    const SpectralGrid& grid() const { return grid_; }
    const OperatorAction& action() const { return action_; }

    int input_level() const { return base_ + type_.r; }
    int output_level() const { return base_ - type_.s; }

    ShiftOperator rebased(int base) const; // same action, new admissible base

private:
    std::string label_;
    ShiftType type_;
    int base_;
    SpectralGrid grid_;
    OperatorAction action_;
};

// Builtin constant-coefficient operators.
ShiftOperator derivative_operator(const SpectralGrid& grid, int base);        // type (1,0)
ShiftOperator third_derivative_operator(const SpectralGrid& grid, int base);  // type (3,0)
ShiftOperator identity_operator(const SpectralGrid& grid, int base);          // type (0,0)
ShiftOperator zero_operator(const SpectralGrid& grid, int base);              // type (0,0)

// Operator manifest: {"label", "type": [r, s], "base", "action": "dx" |
// "dx3" | "id" | {"matrix": [[[re, im], ...] per row]}}. Matrix rows act on
// ascending-order coefficients and must match the grid size.
ShiftOperator operator_from_manifest(const std::string& json_text, const SpectralGrid& grid);

// Typed application. Throws level_error unless u.level >= base + r.
TowerElement apply(const ShiftOperator& op, const TowerElement& u);

// ---- norms ----

struct PowerIterationOptions {
    double tolerance = 1e-10;
    int max_iterations = 10000;
    std::uint64_t seed = 20260810;
};

struct OperatorNormResult {
    double value = 0.0;   // largest singular value estimate (last Rayleigh quotient)
    bool converged = false;
    int iterations = 0;
    int restarts = 0;
};

// Norm of the truncated operator as a map H_{base+r} -> H_{base-s}: largest
// singular value of D_{n-s} A D_{n+r}^{-1}, D_k = diag(w_m(k)), by power
// iteration on the normal operator. Reports carry the truncation size
// through the operator's grid.
OperatorNormResult operator_norm(const ShiftOperator& op, PowerIterationOptions options = {});

/** Members (L_s, ..., L_n) of one type with consecutive bases starting at
 * s = type.s; the projective-consistency condition says they all share one
 * coefficient action. */
class OperatorFamily {
public:
    explicit OperatorFamily(std::vector<ShiftOperator> members);

    const std::vector<ShiftOperator>& members() const { return members_; }
    ShiftType type() const { return members_.front().type(); }

private:
    std::vector<ShiftOperator> members_;
};

// Family of one shared action over bases type.s .. top_base.
OperatorFamily make_family(const ShiftOperator& prototype, int top_base);

double family_norm(const OperatorFamily& family, PowerIterationOptions options = {});

struct ConsistencyReport {
    double max_defect = 0.0; // max coefficient discrepancy across base pairs
    int trials = 0;
    bool pass = false;
    double tolerance = 0.0;
};

// For random u and every base pair i < j: apply member j then include vs
// include then apply member i. Shared actions give exact zeros; a perturbed
// member shows up at the size of its perturbation.
ConsistencyReport check_family_consistency(const OperatorFamily& family, int trials,
                                           std::uint64_t seed, double tolerance = 1e-12);

struct TameBoundReport {
    double max_ratio = 0.0;  // max |L x|_{n-s} over sampled unit-|x|_{n+r} vectors
    double candidate = 0.0;  // the claimed constant C_n
    double defect = 0.0;     // max(0, max_ratio - candidate)
    int trials = 0;
    bool pass = false;
};

TameBoundReport check_tame_bound(const ShiftOperator& op, double candidate, int trials,
                                 std::uint64_t seed, double tolerance = 1e-12);

} // namespace kdvtower

#endif

#ifndef KDVTOWER_SPECTRAL_HPP
#define KDVTOWER_SPECTRAL_HPP

#include "kdvtower/errors.hpp"

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace kdvtower {

using Complex = std::complex<double>;
using CoeffVector = std::vector<Complex>;

/** Truncated Fourier discretization of the unit-length circle.
 *
 * Retains M modes with indices m in {-M/2, ..., M/2-1}; a field is
 * u(x) = sum_m c_m e^{i 2 pi m x}. Products are dealiased by zero-padding
 * with the given factor (>= 3/2 removes aliasing from quadratic products;
 * cubic expressions are formed as nested quadratics).
 */
struct SpectralGrid {
    int modes;
    double padding_factor;

    explicit SpectralGrid(int modes_, double padding_factor_ = 1.5);

    // Smallest even size >= modes * padding_factor.
    int padded_size() const;

    // Index of mode m in the ascending storage order (m = -M/2 first).
    int index_of(int m) const { return m + modes / 2; }
    int mode_of(int index) const { return index - modes / 2; }

    bool operator==(const SpectralGrid& o) const {
        return modes == o.modes && padding_factor == o.padding_factor;
    }
};

/** A real-valued field on the circle at a declared Sobolev level.
 *
 * Coefficients are stored in ascending mode order. Construction enforces the
 * reality invariants: c_{-m} = conj(c_m) (pairs are averaged) and the
 * unmatched mode -M/2 is forced to zero. The level is a plain tag consumed
 * by norms and the regularity type checks; the bonding maps of the tower are
 * inclusions, i.e. identity on coefficients.
 */
class TowerElement {
public:
    TowerElement(SpectralGrid grid, int level, CoeffVector coeffs);

    static TowerElement zero(SpectralGrid grid, int level);
    // c_k = amplitude/2 at modes +-k: cosine(2 pi k x) when phase = 0.
    static TowerElement harmonic(SpectralGrid grid, int level, int k, double amplitude = 1.0,
                                 double phase = 0.0);
    static TowerElement constant(SpectralGrid grid, int level, double value);

    const SpectralGrid& grid() const { return grid_; }
    int level() const { return level_; }
    const CoeffVector& coeffs() const { return coeffs_; }

    Complex coeff(int m) const { return coeffs_[static_cast<size_t>(grid_.index_of(m))]; }

    // Retag at another level. Tagging down is the tower inclusion; tagging up
    // is legitimate for grid fields, which are trigonometric polynomials and
    // so live in every level of the tower.
    TowerElement with_level(int level) const;

private:
    SpectralGrid grid_;
    int level_;
    CoeffVector coeffs_;
};

// ---- linear field arithmetic (same grid required; level = min of inputs) ----
TowerElement add(const TowerElement& u, const TowerElement& v);
TowerElement subtract(const TowerElement& u, const TowerElement& v);
TowerElement scale(double a, const TowerElement& u);
inline TowerElement operator+(const TowerElement& u, const TowerElement& v) { return add(u, v); }
inline TowerElement operator-(const TowerElement& u, const TowerElement& v) { return subtract(u, v); }
inline TowerElement operator*(double a, const TowerElement& u) { return scale(a, u); }

// ---- transforms ----

// Samples of u at x_j = j/N, N >= M. Output is real up to round-off.
std::vector<double> synthesize(const TowerElement& u, int n_samples);

// Forward transform of N >= M equispaced samples, truncated to the grid band.
TowerElement analyze(std::span<const double> samples, SpectralGrid grid, int level);

// c_m -> (i 2 pi m) c_m; drops one level. Throws level_error at level 0.
TowerElement derivative(const TowerElement& u);
TowerElement derivative(const TowerElement& u, int order);

// Mean-zero antiderivative: c_m -> c_m / (i 2 pi m), mode 0 set to zero.
// Raises the level tag by one.
TowerElement antiderivative_zero_mean(const TowerElement& u);

// Dealiased pointwise product, truncated back to the grid band. The result
// carries level min(u.level, v.level). Level-0 by level-0 products fall
// outside the multiplicative-algebra range n >= 1; they are permitted and
// flagged through the optional warning output.
TowerElement multiply(const TowerElement& u, const TowerElement& v,
                      bool* level_zero_warning = nullptr);

double mean_value(const TowerElement& u); // c_0, i.e. the integral over the circle

// ---- Sobolev structure ----

// w_m(n) = sqrt(sum_{k=0}^{n} (2 pi m)^{2k}): the Fourier diagonalization of
// the level-n norm sqrt(sum_k integral (d^k v)^2 dx).
double sobolev_weight(int level, int m);

double sobolev_inner(int level, const TowerElement& u, const TowerElement& v);
double sobolev_norm(int level, const TowerElement& u);

// nu_n(u) = sum_{i=0}^{n} |u|_i. Requires u.level >= n.
double frechet_seminorm(int level, const TowerElement& u);

// Truncated Frechet metric sum_{k=0}^{n_terms} 2^{-k} d_k/(1+d_k) with
// d_k = |u-v|_k; the dropped tail is bounded by 2^{-n_terms}.
double frechet_metric(const TowerElement& u, const TowerElement& v, int n_terms = 8);

/** A finite stack (w_0, ..., w_n) of per-level functionals, each stored by
 * its Riesz representer in H_i: w_i(x) = <reps[i], x>_i. */
struct CovectorStack {
    std::vector<TowerElement> reps; // reps[i] represents the level-i functional

    int top_level() const { return static_cast<int>(reps.size()) - 1; }
};

double covector_value(const CovectorStack& w, int i, const TowerElement& x);

// Dual norm sum_i max_{|x|_i = 1} |w_i(x)| = sum_i |reps[i]|_i.
double dual_norm(const CovectorStack& w);

// ---- serialization ----

// {"modes": M, "level": n, "coeffs": [[re, im], ...]} ordered m = -M/2 ... M/2-1.
std::string element_to_json(const TowerElement& u);
TowerElement element_from_json(const std::string& text, double padding_factor = 1.5);

// CSV with columns x,u(x) at n_samples equispaced points.
void write_samples_csv(std::ostream& out, const TowerElement& u, int n_samples);

} // namespace kdvtower

#endif

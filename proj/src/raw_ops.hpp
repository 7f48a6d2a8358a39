#ifndef KDVTOWER_RAW_OPS_HPP
#define KDVTOWER_RAW_OPS_HPP

#include "kdvtower/spectral.hpp"

namespace kdvtower::detail {

// Coefficient-space primitives without the reality projection. Operator
// actions built from these stay complex-linear, which the norm machinery
// (power iteration on arbitrary complex vectors) relies on. On Hermitian
// inputs they agree with the TowerElement operations up to round-off.

CoeffVector raw_derivative(const SpectralGrid& grid, const CoeffVector& c, int order = 1);

// Dealiased product of two coefficient vectors (complex bilinear).
CoeffVector raw_multiply(const SpectralGrid& grid, const CoeffVector& a, const CoeffVector& b);

} // namespace kdvtower::detail

#endif

#include "raw_ops.hpp"

#include "fft_engine.hpp"

#include <numbers>

namespace kdvtower::detail {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

std::vector<Complex> padded_spectrum(const SpectralGrid& grid, const CoeffVector& c, int k) {
    std::vector<Complex> buf(static_cast<size_t>(k), Complex(0.0));
    for (int m = -grid.modes / 2; m < grid.modes / 2; ++m)
        buf[static_cast<size_t>((m % k + k) % k)] = c[static_cast<size_t>(grid.index_of(m))];
    return buf;
}
} // namespace

CoeffVector raw_derivative(const SpectralGrid& grid, const CoeffVector& c, int order) {
    CoeffVector out(c);
    for (int m = -grid.modes / 2; m < grid.modes / 2; ++m) {
        Complex factor(1.0);
        const Complex il(0.0, two_pi * m);
        for (int j = 0; j < order; ++j) factor *= il;
        out[static_cast<size_t>(grid.index_of(m))] *= factor;
    }
    return out;
}

CoeffVector raw_multiply(const SpectralGrid& grid, const CoeffVector& a, const CoeffVector& b) {
    const int k = grid.padded_size();
    std::vector<Complex> sa = padded_spectrum(grid, a, k);
    std::vector<Complex> sb = padded_spectrum(grid, b, k);
    fft_backward(sa);
    fft_backward(sb);
    for (int j = 0; j < k; ++j) sa[static_cast<size_t>(j)] *= sb[static_cast<size_t>(j)];
    fft_forward(sa);
    CoeffVector out(static_cast<size_t>(grid.modes));
    const double inv_k = 1.0 / k;
    for (int m = -grid.modes / 2; m < grid.modes / 2; ++m)
        out[static_cast<size_t>(grid.index_of(m))] = sa[static_cast<size_t>((m % k + k) % k)] * inv_k;
    return out;
}

} // namespace kdvtower::detail

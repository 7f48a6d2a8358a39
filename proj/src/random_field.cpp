#include "kdvtower/random_field.hpp"

#include <cmath>
#include <numbers>

namespace kdvtower {

double GaussianSource::uniform() {
    // 53-bit mantissa draw in [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double GaussianSource::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

TowerElement random_band_limited_field(const SpectralGrid& grid, std::uint64_t seed,
                                       const RandomFieldOptions& opt) {
    GaussianSource rng(seed);
    const int band = (opt.band < 0) ? grid.modes / 2 - 1 : std::min(opt.band, grid.modes / 2 - 1);
    CoeffVector c(static_cast<size_t>(grid.modes), Complex(0.0));
    if (!opt.zero_mean)
        c[static_cast<size_t>(grid.index_of(0))] = opt.amplitude * rng.normal();
    for (int k = 1; k <= band; ++k) {
        const double w = opt.amplitude / std::pow(1.0 + k, opt.decay);
        const Complex z = 0.5 * w * Complex(rng.normal(), rng.normal());
        c[static_cast<size_t>(grid.index_of(k))] = z;
        c[static_cast<size_t>(grid.index_of(-k))] = std::conj(z);
    }
    return TowerElement(grid, opt.level, std::move(c));
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial, std::uint64_t stream) {
    // splitmix64 over a combined key; decorrelates consecutive trials
    std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * (trial + 1) + 0xbf58476d1ce4e5b9ULL * stream;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace kdvtower

#ifndef KDVTOWER_RANDOM_FIELD_HPP
#define KDVTOWER_RANDOM_FIELD_HPP

#include "kdvtower/spectral.hpp"

#include <cstdint>
#include <random>

namespace kdvtower {

/** Deterministic Gaussian sampler.
 *
 * mt19937_64 produces a portable bit stream; the normal transform is a
 * hand-rolled Box-Muller so that results do not depend on the standard
 * library's std::normal_distribution implementation. Reports built from the
 * same seed are byte-identical across runs.
 */
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    double normal();
    double uniform(); // in [0, 1)

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct RandomFieldOptions {
    int band = -1;          // highest excited mode; -1 means M/2 - 1 (full band)
    double decay = 2.0;     // |c_m| ~ (1 + |m|)^{-decay}
    double amplitude = 1.0;
    int level = 4;
    bool zero_mean = true;
};

// Random real field with Gaussian coefficients, Hermitian-symmetrized.
TowerElement random_band_limited_field(const SpectralGrid& grid, std::uint64_t seed,
                                       const RandomFieldOptions& opt = {});

// Derive an independent stream for trial i of a seeded experiment.
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial, std::uint64_t stream = 0);

} // namespace kdvtower

#endif

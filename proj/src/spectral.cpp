#include "kdvtower/spectral.hpp"

#include "fft_engine.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace kdvtower {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require_same_grid(const TowerElement& u, const TowerElement& v, const char* op) {
    if (!(u.grid() == v.grid()))
        throw grid_error(std::string(op) + ": grid mismatch (" + std::to_string(u.grid().modes) +
                         " vs " + std::to_string(v.grid().modes) + " modes)");
}

} // namespace

SpectralGrid::SpectralGrid(int modes_, double padding_factor_)
    : modes(modes_), padding_factor(padding_factor_) {
    if (modes < 8 || modes % 2 != 0)
        throw config_error("SpectralGrid: modes must be even and >= 8, got " + std::to_string(modes));
    if (padding_factor < 1.5)
        throw config_error("SpectralGrid: padding_factor must be >= 3/2");
}

int SpectralGrid::padded_size() const {
    int k = static_cast<int>(std::ceil(padding_factor * modes));
    if (k % 2 != 0) ++k;
    return k;
}

TowerElement::TowerElement(SpectralGrid grid, int level, CoeffVector coeffs)
    : grid_(grid), level_(level), coeffs_(std::move(coeffs)) {
    if (level_ < 0) throw level_error("TowerElement: negative level");
    const int m_count = grid_.modes;
    if (static_cast<int>(coeffs_.size()) != m_count)
        throw config_error("TowerElement: expected " + std::to_string(m_count) + " coefficients, got " +
                           std::to_string(coeffs_.size()));
    // Reality invariants: Hermitian-symmetrize matched pairs, drop the
    // unmatched Nyquist mode, keep the mean real.
    coeffs_[0] = 0.0;
    coeffs_[static_cast<size_t>(grid_.index_of(0))] =
        Complex(coeffs_[static_cast<size_t>(grid_.index_of(0))].real(), 0.0);
    for (int m = 1; m < m_count / 2; ++m) {
        const size_t ip = static_cast<size_t>(grid_.index_of(m));
        const size_t in = static_cast<size_t>(grid_.index_of(-m));
        const Complex avg = 0.5 * (coeffs_[ip] + std::conj(coeffs_[in]));
        coeffs_[ip] = avg;
        coeffs_[in] = std::conj(avg);
    }
}

TowerElement TowerElement::zero(SpectralGrid grid, int level) {
    return TowerElement(grid, level, CoeffVector(static_cast<size_t>(grid.modes), Complex(0.0)));
}

TowerElement TowerElement::harmonic(SpectralGrid grid, int level, int k, double amplitude, double phase) {
    if (k <= 0 || k >= grid.modes / 2)
        throw config_error("harmonic: mode index out of band");
    CoeffVector c(static_cast<size_t>(grid.modes), Complex(0.0));
    const Complex half = 0.5 * amplitude * std::exp(Complex(0.0, phase));
    c[static_cast<size_t>(grid.index_of(k))] = half;
    c[static_cast<size_t>(grid.index_of(-k))] = std::conj(half);
    return TowerElement(grid, level, std::move(c));
}

TowerElement TowerElement::constant(SpectralGrid grid, int level, double value) {
    CoeffVector c(static_cast<size_t>(grid.modes), Complex(0.0));
    c[static_cast<size_t>(grid.index_of(0))] = value;
    return TowerElement(grid, level, std::move(c));
}

TowerElement TowerElement::with_level(int level) const {
    return TowerElement(grid_, level, coeffs_);
}

TowerElement add(const TowerElement& u, const TowerElement& v) {
    require_same_grid(u, v, "add");
    CoeffVector c(u.coeffs());
    for (size_t i = 0; i < c.size(); ++i) c[i] += v.coeffs()[i];
    return TowerElement(u.grid(), std::min(u.level(), v.level()), std::move(c));
}

TowerElement subtract(const TowerElement& u, const TowerElement& v) {
    require_same_grid(u, v, "subtract");
    CoeffVector c(u.coeffs());
    for (size_t i = 0; i < c.size(); ++i) c[i] -= v.coeffs()[i];
    return TowerElement(u.grid(), std::min(u.level(), v.level()), std::move(c));
}

TowerElement scale(double a, const TowerElement& u) {
    CoeffVector c(u.coeffs());
    for (auto& z : c) z *= a;
    return TowerElement(u.grid(), u.level(), std::move(c));
}

std::vector<double> synthesize(const TowerElement& u, int n_samples) {
    const int m_count = u.grid().modes;
    if (n_samples < m_count)
        throw config_error("synthesize: need at least " + std::to_string(m_count) + " samples");
    std::vector<Complex> buf(static_cast<size_t>(n_samples), Complex(0.0));
    for (int m = -m_count / 2; m < m_count / 2; ++m) {
        const int slot = (m % n_samples + n_samples) % n_samples;
        buf[static_cast<size_t>(slot)] = u.coeff(m);
    }
    detail::fft_backward(buf); // sum_k c_k e^{+2 pi i jk/N}
    std::vector<double> out(static_cast<size_t>(n_samples));
    for (int j = 0; j < n_samples; ++j) out[static_cast<size_t>(j)] = buf[static_cast<size_t>(j)].real();
    return out;
}

TowerElement analyze(std::span<const double> samples, SpectralGrid grid, int level) {
    const int n = static_cast<int>(samples.size());
    if (n < grid.modes)
        throw config_error("analyze: need at least " + std::to_string(grid.modes) + " samples");
    std::vector<Complex> buf(samples.begin(), samples.end());
    detail::fft_forward(buf);
    CoeffVector c(static_cast<size_t>(grid.modes));
    const double inv_n = 1.0 / n;
    for (int m = -grid.modes / 2; m < grid.modes / 2; ++m) {
        const int slot = (m % n + n) % n;
        c[static_cast<size_t>(grid.index_of(m))] = buf[static_cast<size_t>(slot)] * inv_n;
    }
    return TowerElement(grid, level, std::move(c));
}

TowerElement derivative(const TowerElement& u) {
    if (u.level() < 1)
        throw level_error("derivative: level 0 element cannot leave the tower");
    CoeffVector c(u.coeffs());
    const int m_count = u.grid().modes;
    for (int m = -m_count / 2; m < m_count / 2; ++m)
        c[static_cast<size_t>(u.grid().index_of(m))] *= Complex(0.0, two_pi * m);
    return TowerElement(u.grid(), u.level() - 1, std::move(c));
}

TowerElement derivative(const TowerElement& u, int order) {
    TowerElement out = u;
    for (int k = 0; k < order; ++k) out = derivative(out);
    return out;
}

TowerElement antiderivative_zero_mean(const TowerElement& u) {
    CoeffVector c(u.coeffs());
    const int m_count = u.grid().modes;
    for (int m = -m_count / 2; m < m_count / 2; ++m) {
        auto& z = c[static_cast<size_t>(u.grid().index_of(m))];
        z = (m == 0) ? Complex(0.0) : z / Complex(0.0, two_pi * m);
    }
    return TowerElement(u.grid(), u.level() + 1, std::move(c));
}

TowerElement multiply(const TowerElement& u, const TowerElement& v, bool* level_zero_warning) {
    require_same_grid(u, v, "multiply");
    if (level_zero_warning) *level_zero_warning = (u.level() == 0 && v.level() == 0);
    const int k = u.grid().padded_size();
    const int m_count = u.grid().modes;

    auto padded_samples = [&](const TowerElement& w) {
        std::vector<Complex> buf(static_cast<size_t>(k), Complex(0.0));
        for (int m = -m_count / 2; m < m_count / 2; ++m)
            buf[static_cast<size_t>((m % k + k) % k)] = w.coeff(m);
        detail::fft_backward(buf);
        return buf;
    };

    std::vector<Complex> a = padded_samples(u);
    std::vector<Complex> b = padded_samples(v);
    for (int j = 0; j < k; ++j)
        a[static_cast<size_t>(j)] = Complex(a[static_cast<size_t>(j)].real() * b[static_cast<size_t>(j)].real(), 0.0);
    detail::fft_forward(a);

    CoeffVector c(static_cast<size_t>(m_count));
    const double inv_k = 1.0 / k;
    for (int m = -m_count / 2; m < m_count / 2; ++m)
        c[static_cast<size_t>(u.grid().index_of(m))] = a[static_cast<size_t>((m % k + k) % k)] * inv_k;
    return TowerElement(u.grid(), std::min(u.level(), v.level()), std::move(c));
}

double mean_value(const TowerElement& u) { return u.coeff(0).real(); }

double sobolev_weight(int level, int m) {
    // sum_{k=0}^{n} t^k with t = (2 pi m)^2
    const double t = (two_pi * m) * (two_pi * m);
    double sum = 1.0, pow_t = 1.0;
    for (int k = 1; k <= level; ++k) {
        pow_t *= t;
        sum += pow_t;
    }
    return std::sqrt(sum);
}

double sobolev_inner(int level, const TowerElement& u, const TowerElement& v) {
    require_same_grid(u, v, "sobolev_inner");
    const int m_count = u.grid().modes;
    double acc = 0.0;
    for (int m = -m_count / 2; m < m_count / 2; ++m) {
        const double w = sobolev_weight(level, m);
        acc += w * w * (u.coeff(m) * std::conj(v.coeff(m))).real();
    }
    return acc;
}

double sobolev_norm(int level, const TowerElement& u) {
    return std::sqrt(std::max(0.0, sobolev_inner(level, u, u)));
}

double frechet_seminorm(int level, const TowerElement& u) {
    if (u.level() < level)
        throw level_error("frechet_seminorm: element level " + std::to_string(u.level()) +
                          " below requested level " + std::to_string(level));
    double acc = 0.0;
    for (int i = 0; i <= level; ++i) acc += sobolev_norm(i, u);
    return acc;
}

double frechet_metric(const TowerElement& u, const TowerElement& v, int n_terms) {
    require_same_grid(u, v, "frechet_metric");
    const TowerElement d = subtract(u.with_level(0), v.with_level(0));
    double acc = 0.0, scale2 = 1.0;
    for (int k = 0; k <= n_terms; ++k) {
        const double dk = sobolev_norm(k, d);
        acc += scale2 * dk / (1.0 + dk);
        scale2 *= 0.5;
    }
    return acc;
}

double covector_value(const CovectorStack& w, int i, const TowerElement& x) {
    if (i < 0 || i > w.top_level())
        throw config_error("covector_value: level out of range");
    return sobolev_inner(i, w.reps[static_cast<size_t>(i)], x);
}

double dual_norm(const CovectorStack& w) {
    double acc = 0.0;
    for (int i = 0; i <= w.top_level(); ++i)
        acc += sobolev_norm(i, w.reps[static_cast<size_t>(i)]);
    return acc;
}

std::string element_to_json(const TowerElement& u) {
    nlohmann::ordered_json j;
    j["modes"] = u.grid().modes;
    j["level"] = u.level();
    auto coeffs = nlohmann::ordered_json::array();
    for (const auto& z : u.coeffs()) coeffs.push_back({z.real(), z.imag()});
    j["coeffs"] = std::move(coeffs);
    return j.dump();
}

TowerElement element_from_json(const std::string& text, double padding_factor) {
    nlohmann::json j = nlohmann::json::parse(text);
    SpectralGrid grid(j.at("modes").get<int>(), padding_factor);
    const int level = j.at("level").get<int>();
    CoeffVector c;
    for (const auto& pair : j.at("coeffs"))
        c.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    return TowerElement(grid, level, std::move(c));
}

void write_samples_csv(std::ostream& out, const TowerElement& u, int n_samples) {
    const auto samples = synthesize(u, n_samples);
    out << "x,u\n";
    std::ostringstream line;
    line.precision(17);
    for (int j = 0; j < n_samples; ++j) {
        line.str("");
        line << static_cast<double>(j) / n_samples << "," << samples[static_cast<size_t>(j)] << "\n";
        out << line.str();
    }
}

} // namespace kdvtower

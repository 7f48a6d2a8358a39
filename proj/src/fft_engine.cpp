#include "fft_engine.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace kdvtower::detail {

namespace {

std::mutex plan_mutex;

fftw_plan get_plan(int n, int sign) {
    // FFTW_UNALIGNED lets the cached plan execute on any std::vector buffer.
    static std::map<std::pair<int, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<std::complex<double>> probe(static_cast<size_t>(n));
    auto* buf = reinterpret_cast<fftw_complex*>(probe.data());
    fftw_plan p = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, p);
    return p;
}

void execute(std::vector<std::complex<double>>& inout, int sign) {
    fftw_plan p = get_plan(static_cast<int>(inout.size()), sign);
    auto* buf = reinterpret_cast<fftw_complex*>(inout.data());
    fftw_execute_dft(p, buf, buf);
}

} // namespace

void fft_forward(std::vector<std::complex<double>>& inout) { execute(inout, FFTW_FORWARD); }
void fft_backward(std::vector<std::complex<double>>& inout) { execute(inout, FFTW_BACKWARD); }

} // namespace kdvtower::detail

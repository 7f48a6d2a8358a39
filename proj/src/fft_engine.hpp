#ifndef KDVTOWER_FFT_ENGINE_HPP
#define KDVTOWER_FFT_ENGINE_HPP

#include <complex>
#include <vector>

namespace kdvtower::detail {

// Thin wrapper over FFTW complex transforms. Plans are cached per size and
// created under a mutex (FFTW plan creation is not thread safe); execution
// runs on caller buffers and may be called concurrently. Transforms are
// unnormalized, matching FFTW: forward uses e^{-2*pi*i*jk/N}, backward e^{+...}.
void fft_forward(std::vector<std::complex<double>>& inout);
void fft_backward(std::vector<std::complex<double>>& inout);

} // namespace kdvtower::detail

#endif

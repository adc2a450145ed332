#pragma once

#include <complex>
#include <vector>

namespace seld3d::detail {

/// In-place iterative radix-2 FFT. Length must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a);

/// Inverse transform (includes the 1/N scaling).
void ifft_radix2(std::vector<std::complex<double>>& a);

bool is_power_of_two(std::size_t n);

}  // namespace seld3d::detail

#pragma once

#include <complex>
#include <span>

namespace qdk::detail {

/// Unnormalized in-place DFT. sign = -1: forward (e^{-2 pi i jk/N}), +1: backward.
void fft_inplace(std::span<std::complex<double>> data, int sign);

} // namespace qdk::detail

#pragma once

#include <cstddef>
#include <vector>

namespace qdk {

/// J_0(x) ... J_{n_max}(x) by Miller's backward recurrence, x >= 0.
std::vector<double> bessel_j_sequence(double x, std::size_t n_max);

/// e^{-x} I_0(x) ... e^{-x} I_{n_max}(x), x >= 0.
std::vector<double> bessel_i_scaled_sequence(double x, std::size_t n_max);

} // namespace qdk

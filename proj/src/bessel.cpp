#include "qdynkit/bessel.hpp"

#include <algorithm>
#include <cmath>

#include "qdynkit/error.hpp"

namespace qdk {

namespace {

constexpr double big = 1e250;

std::size_t start_index(double x, std::size_t n_max) {
    const double top = std::max(static_cast<double>(n_max), x);
    auto m = static_cast<std::size_t>(top + 30.0 + 10.0 * std::sqrt(top));
    return m + (m % 2);
}

void check_arg(double x) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw NumericError("Bessel argument must be finite and >= 0");
}

} // namespace

std::vector<double> bessel_j_sequence(double x, std::size_t n_max) {
    check_arg(x);
    std::vector<double> out(n_max + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const std::size_t m = start_index(x, n_max);
    std::vector<double> j(m + 2, 0.0);
    j[m + 1] = 0.0;
    j[m] = 1e-300;
    for (std::size_t k = m; k >= 1; --k) {
        j[k - 1] = 2.0 * static_cast<double>(k) / x * j[k] - j[k + 1];
        if (std::abs(j[k - 1]) > big)
            for (std::size_t i = k - 1; i <= m; ++i) j[i] /= big;
    }
    // J_0 + 2 sum_k J_2k = 1
    double norm = j[0];
    for (std::size_t k = 2; k <= m; k += 2) norm += 2.0 * j[k];
    for (std::size_t n = 0; n <= n_max; ++n) out[n] = j[n] / norm;
    return out;
}

std::vector<double> bessel_i_scaled_sequence(double x, std::size_t n_max) {
    check_arg(x);
    std::vector<double> out(n_max + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const std::size_t m = start_index(x, n_max);
    std::vector<double> v(m + 2, 0.0);
    v[m] = 1e-300;
    for (std::size_t k = m; k >= 1; --k) {
        v[k - 1] = 2.0 * static_cast<double>(k) / x * v[k] + v[k + 1];
        if (v[k - 1] > big)
            for (std::size_t i = k - 1; i <= m; ++i) v[i] /= big;
    }
    // I_0 + 2 sum_k I_k = e^x
    double norm = v[0];
    for (std::size_t k = 1; k <= m; ++k) norm += 2.0 * v[k];
    for (std::size_t n = 0; n <= n_max; ++n) out[n] = v[n] / norm;
    return out;
}

} // namespace qdk

#include "qdynkit/observe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "fft.hpp"
#include "qdynkit/error.hpp"

namespace qdk {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// sum_p w_p conj(a_p) b_p
cplx weighted_dot(const std::vector<double>& w, std::span<const cplx> a, std::span<const cplx> b) {
    cplx s = 0.0;
    for (std::size_t p = 0; p < w.size(); ++p) s += w[p] * std::conj(a[p]) * b[p];
    return s;
}

double matrix_expectation(const SystemSpec& sys, const std::vector<std::optional<Field>>& m,
                          const WaveFunction& psi) {
    const auto& w = sys.grid.weights();
    const std::size_t nu = sys.n_channels;
    double s = 0.0;
    for (std::size_t c = 0; c < nu; ++c)
        for (std::size_t d = 0; d < nu; ++d) {
            const auto& f = m[c * nu + d];
            if (!f) continue;
            const auto& a = psi.channels[c];
            const auto& b = psi.channels[d];
            for (std::size_t p = 0; p < w.size(); ++p)
                s += w[p] * (*f)[p] * (std::conj(a[p]) * b[p]).real();
        }
    return s;
}

// Applies a 1-D operator along axis k of a tensor.
template <class Op>
std::vector<cplx> along(const ProductGrid& grid, std::size_t k, std::span<const cplx> psi, Op op) {
    std::vector<cplx> out(psi.begin(), psi.end());
    for_each_line(grid.shape(), k, out, op);
    return out;
}

} // namespace

ExpectationRecord expect(const SystemSpec& sys, const WaveFunction& psi, const WaveFunction& psi0,
                         double t, double field) {
    check_shape(sys, psi);
    const auto& grid = sys.grid;
    const auto& w = grid.weights();
    const std::size_t nu = sys.n_channels;
    const std::size_t nd = grid.n_dofs();
    ExpectationRecord r;
    r.t = t;
    r.populations.resize(nu);
    for (std::size_t c = 0; c < nu; ++c) {
        double s = 0.0;
        for (std::size_t p = 0; p < w.size(); ++p) s += w[p] * std::norm(psi.channels[c][p]);
        r.populations[c] = s;
    }
    const double n2 = std::accumulate(r.populations.begin(), r.populations.end(), 0.0);
    r.norm = std::sqrt(n2);
    if (nu > 1) {
        auto adi = adiabatic_transform(sys, psi);
        r.adiabatic_populations.resize(nu);
        for (std::size_t a = 0; a < nu; ++a) {
            double s = 0.0;
            for (std::size_t p = 0; p < w.size(); ++p) s += w[p] * std::norm(adi.psi.channels[a][p]);
            r.adiabatic_populations[a] = s;
        }
    }
    if (psi0.n_channels() == nu) r.autocorrelation = inner(grid, psi0, psi);

    const double inv = n2 > 0.0 ? 1.0 / n2 : nan;
    r.position.assign(nd, 0.0);
    r.position_unc.assign(nd, 0.0);
    r.momentum.assign(nd, 0.0);
    r.momentum_unc.assign(nd, 0.0);
    for (std::size_t k = 0; k < nd; ++k) {
        const Grid1D& g = grid.dof(k);
        const auto x = grid.coordinate(k);
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t c = 0; c < nu; ++c)
            for (std::size_t p = 0; p < w.size(); ++p) {
                const double d = w[p] * std::norm(psi.channels[c][p]);
                m1 += d * x[p];
                m2 += d * x[p] * x[p];
            }
        m1 *= inv;
        m2 *= inv;
        r.position[k] = m1;
        r.position_unc[k] = std::sqrt(std::max(0.0, m2 - m1 * m1));

        if (g.kind() == GridKind::legendre) {
            r.momentum[k] = nan;
            r.momentum_unc[k] = nan;
            continue;
        }
        double p1 = 0.0, p2 = 0.0;
        for (std::size_t c = 0; c < nu; ++c) {
            const auto& a = psi.channels[c];
            auto dp = along(grid, k, a, [&](std::span<cplx> l) { apply_momentum_inplace(g, l); });
            auto tp = along(grid, k, a, [&](std::span<cplx> l) { apply_kinetic_inplace(g, l); });
            p1 += weighted_dot(w, a, dp).real();
            p2 += 2.0 * g.mass() * weighted_dot(w, a, tp).real();
        }
        p1 *= inv;
        p2 *= inv;
        r.momentum[k] = p1;
        r.momentum_unc[k] = std::sqrt(std::max(0.0, p2 - p1 * p1));
    }

    double kin = 0.0;
    for (std::size_t c = 0; c < nu; ++c) {
        std::vector<cplx> tpsi(grid.size(), 0.0);
        add_kinetic(sys, psi.channels[c], tpsi);
        kin += weighted_dot(w, psi.channels[c], tpsi).real();
    }
    r.kinetic = kin * inv;
    r.potential = matrix_expectation(sys, sys.pot, psi) * inv;
    r.total = r.kinetic + r.potential;
    if (sys.has_dipole()) {
        r.dipole = matrix_expectation(sys, sys.dip, psi) * inv;
        r.total -= field * r.dipole;
    } else {
        r.dipole = nan;
    }
    return r;
}

Spectrum spectrum(const std::vector<cplx>& autocorrelation, double dt, bool hann) {
    const std::size_t n = autocorrelation.size();
    if (n < 4) throw ConfigError("spectrum: at least 4 samples are required, got " + std::to_string(n));
    if (!(dt > 0.0)) throw ConfigError("spectrum: time step must be positive");
    std::vector<cplx> a(autocorrelation);
    if (hann)
        for (std::size_t j = 0; j < n; ++j)
            a[j] *= 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(j) /
                                          static_cast<double>(n - 1)));
    detail::fft_inplace(a, +1);
    Spectrum s;
    s.omega.resize(n);
    s.intensity.resize(n);
    const double dw = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
    // ascending: indices n - n/2 ... n-1, 0 ... n - n/2 - 1
    const std::size_t neg = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t m = (i + n - neg) % n;
        const auto signed_m = static_cast<long long>(m) - (m >= n - neg ? static_cast<long long>(n) : 0);
        s.omega[i] = dw * static_cast<double>(signed_m);
        s.intensity[i] = std::abs(a[m]) * dt;
    }
    return s;
}

WignerResult wigner(const Grid1D& grid, std::span<const cplx> psi) {
    if (grid.kind() != GridKind::fft)
        throw UnsupportedError("Wigner transform needs an fft grid, got " + std::string(to_string(grid.kind())));
    if (psi.size() != grid.size()) throw ShapeError("wigner: length does not match grid");
    const std::size_t n = grid.size();
    const std::size_t n2 = 2 * n;
    const double dx = grid.spacing();
    const double dq = std::numbers::pi / (static_cast<double>(n) * dx);

    // phi(q_m) with q_m = -pi/dx + m dq, X_i = i dx
    std::vector<cplx> phi(n2, 0.0);
    for (std::size_t i = 0; i < n; ++i) phi[i] = (i % 2 == 0 ? 1.0 : -1.0) * psi[i];
    detail::fft_inplace(phi, -1);
    const double pref = dx / std::sqrt(2.0 * std::numbers::pi);
    for (auto& v : phi) v *= pref;

    WignerResult r;
    r.dx = dx;
    r.dp = dq;
    r.x.assign(grid.points().begin(), grid.points().end());
    r.p.resize(n2);
    r.momentum_density.resize(n2);
    for (std::size_t m = 0; m < n2; ++m) {
        r.p[m] = -std::numbers::pi / dx + static_cast<double>(m) * dq;
        r.momentum_density[m] = std::norm(phi[m]);
    }
    r.w.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n2));
    std::vector<cplx> h(n);
    for (std::size_t m = 0; m < n2; ++m) {
        std::fill(h.begin(), h.end(), cplx(0.0));
        const std::size_t jmax = std::min(m, n2 - 1 - m);
        for (std::size_t j = 0; j <= jmax; ++j) {
            h[j % n] += std::conj(phi[m + j]) * phi[m - j];
            if (j > 0) h[(n - j % n) % n] += std::conj(phi[m - j]) * phi[m + j];
        }
        // sum_j h_j e^{-2 i j dq X_i} = sum_j h_j e^{-2 pi i j i / N}
        detail::fft_inplace(h, -1);
        for (std::size_t i = 0; i < n; ++i) {
            const cplx v = h[i] * (dq / std::numbers::pi);
            r.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = v.real();
            r.max_imag = std::max(r.max_imag, std::abs(v.imag()));
        }
    }
    return r;
}

std::vector<Field> flux(const SystemSpec& sys, const WaveFunction& psi) {
    check_shape(sys, psi);
    const auto& grid = sys.grid;
    std::vector<Field> out;
    for (std::size_t k = 0; k < grid.n_dofs(); ++k) {
        const Grid1D& g = grid.dof(k);
        if (g.kind() != GridKind::fft)
            throw UnsupportedError("flux needs fft grids; dof " + std::to_string(k + 1) + " is " +
                                   std::string(to_string(g.kind())));
        Field j(grid.size(), 0.0);
        for (const auto& c : psi.channels) {
            auto dp = along(grid, k, c, [&](std::span<cplx> l) { apply_momentum_inplace(g, l); });
            for (std::size_t p = 0; p < j.size(); ++p) j[p] += (std::conj(c[p]) * dp[p]).real() / g.mass();
        }
        out.push_back(std::move(j));
    }
    return out;
}

ReducedDensity reduced_density(const ProductGrid& grid, const WaveFunction& psi, std::size_t k) {
    if (k >= grid.n_dofs()) throw ConfigError("reduced density: dof " + std::to_string(k + 1) + " does not exist");
    const std::size_t nk = grid.shape()[k];
    const std::size_t stride = grid.strides()[k];
    const std::size_t outer = grid.size() / (nk * stride);
    const auto& w = grid.weights();
    ReducedDensity r;
    r.rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(nk), static_cast<Eigen::Index>(nk));
    // rows of the (nk x rest) matrix sqrt(w) psi, contracted over rest
    Eigen::MatrixXcd a(static_cast<Eigen::Index>(nk), static_cast<Eigen::Index>(outer * stride));
    for (const auto& c : psi.channels) {
        if (c.size() != grid.size()) throw ShapeError("reduced density: tensor size mismatch");
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t i = 0; i < nk; ++i)
                for (std::size_t s = 0; s < stride; ++s) {
                    const std::size_t p = o * nk * stride + i * stride + s;
                    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(o * stride + s)) =
                        std::sqrt(w[p]) * c[p];
                }
        r.rho += a * a.adjoint();
    }
    const cplx tr = r.rho.trace();
    if (!(tr.real() > 0.0)) throw NumericError("reduced density of a zero wavefunction");
    r.rho /= tr.real();
    r.purity = (r.rho * r.rho).trace().real();
    return r;
}

std::vector<double> level_populations(const ProductGrid& grid, const WaveFunction& psi,
                                      const std::vector<WaveFunction>& basis) {
    std::vector<double> pop;
    pop.reserve(basis.size());
    for (const auto& b : basis) {
        if (b.n_channels() != psi.n_channels())
            throw ShapeError("level populations: channel count mismatch");
        for (std::size_t c = 0; c < b.n_channels(); ++c)
            if (b.channels[c].size() != grid.size() || psi.channels[c].size() != grid.size())
                throw ShapeError("level populations: grid mismatch");
        pop.push_back(std::norm(inner(grid, b, psi)));
    }
    return pop;
}

} // namespace qdk

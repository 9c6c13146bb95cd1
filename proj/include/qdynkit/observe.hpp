#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "qdynkit/system.hpp"

namespace qdk {

/// Diagnostics of one wavefunction. Expectation values are normalized by the
/// squared norm; populations and the autocorrelation are not.
struct ExpectationRecord {
    double t = 0.0;
    double norm = 0.0;
    std::vector<double> populations;
    /// Adiabatic populations (nu > 1 only).
    std::vector<double> adiabatic_populations;
    std::vector<double> position, position_unc;
    /// NaN for legendre dofs.
    std::vector<double> momentum, momentum_unc;
    double potential = 0.0;
    double kinetic = 0.0;
    /// <mu>; NaN without dipole operators.
    double dipole = 0.0;
    /// <T> + <V> - F <mu>
    double total = 0.0;
    cplx autocorrelation = 0.0;
};

ExpectationRecord expect(const SystemSpec& sys, const WaveFunction& psi, const WaveFunction& psi0,
                         double t = 0.0, double field = 0.0);

struct Spectrum {
    std::vector<double> omega;
    std::vector<double> intensity;
};

/// |sum_j w_j a_j e^{+i omega t_j}| dt on the conjugate frequency grid, omega
/// ascending; w is a Hann window unless disabled.
Spectrum spectrum(const std::vector<cplx>& autocorrelation, double dt, bool hann = true);

struct WignerResult {
    /// Rows: positions (the N DVR points); columns: 2N momenta spaced pi/L.
    Eigen::MatrixXd w;
    std::vector<double> x;
    std::vector<double> p;
    double dx = 0.0;
    double dp = 0.0;
    /// Largest imaginary part discarded when taking the real part.
    double max_imag = 0.0;
    /// |phi(p)|^2 on the momentum grid.
    std::vector<double> momentum_density;
};

/// Discrete Wigner transform of a 1-D wavefunction on an fft grid. The grid is
/// zero-padded to 2N, so momenta are spaced at half the FBR spacing; the
/// marginals give |psi(x_i)|^2 and |phi(p_m)|^2 exactly.
WignerResult wigner(const Grid1D& grid, std::span<const cplx> psi);

/// Probability flux Re(psi^* (-i d/dR_k) psi) / M_k summed over channels, one
/// tensor per dof. fft dofs only.
std::vector<Field> flux(const SystemSpec& sys, const WaveFunction& psi);

struct ReducedDensity {
    Eigen::MatrixXcd rho;
    double purity = 0.0;
};

/// Density matrix of dof k in the orthonormal DVR basis, traced over all other
/// dofs and channels, unit trace.
ReducedDensity reduced_density(const ProductGrid& grid, const WaveFunction& psi, std::size_t k);

/// |<psi_v|psi>|^2 for normalized basis states.
std::vector<double> level_populations(const ProductGrid& grid, const WaveFunction& psi,
                                      const std::vector<WaveFunction>& basis);

} // namespace qdk

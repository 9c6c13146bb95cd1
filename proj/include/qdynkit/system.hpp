#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "qdynkit/grids.hpp"
#include "qdynkit/operators.hpp"

namespace qdk {

/// Real function sampled on every point of a ProductGrid.
using Field = std::vector<double>;

/// Model term acting on one degree of freedom; a FieldSpec is a sum of terms.
struct Term {
    ScalarModel model;
    std::size_t dof = 0;
};
using FieldSpec = std::vector<Term>;

using ChannelPair = std::pair<std::size_t, std::size_t>;

/// Declarative operator input for assemble(). Channel pairs are 0-based and
/// must satisfy first <= second; the lower triangle is implied.
struct OperatorSpecs {
    std::size_t n_channels = 1;
    std::map<ChannelPair, FieldSpec> pot;
    /// Two-channel linear model on dofs (0, 1); excludes `pot`.
    std::optional<JahnTellerParams> jahn_teller;
    std::optional<FieldSpec> nip;
    /// (c, c): permanent dipole of channel c; (c, d), c < d: transition dipole.
    std::map<ChannelPair, FieldSpec> dip;
};

struct SystemSpec {
    ProductGrid grid;
    std::size_t n_channels = 1;
    /// Row-major nu x nu; absent entries are zero. pot[c*nu+d] == pot[d*nu+c].
    std::vector<std::optional<Field>> pot;
    /// Same layout; diagonal = permanent, off-diagonal = transition dipoles.
    std::vector<std::optional<Field>> dip;
    std::optional<Field> nip;
    /// Per-dof kinetic cap (infinite unless the energy range is truncated).
    std::vector<double> kinetic_cap;
    /// Spectral range fixed by truncate_energy_range(), if applied.
    std::optional<std::pair<double, double>> truncated_bounds;

    const std::optional<Field>& pot_at(std::size_t c, std::size_t d) const {
        return pot[c * n_channels + d];
    }
    const std::optional<Field>& dip_at(std::size_t c, std::size_t d) const {
        return dip[c * n_channels + d];
    }
    bool has_dipole() const;
};

struct WaveFunction {
    std::vector<std::vector<cplx>> channels;

    WaveFunction() = default;
    WaveFunction(std::size_t n_channels, std::size_t size)
        : channels(n_channels, std::vector<cplx>(size)) {}
    explicit WaveFunction(std::vector<std::vector<cplx>> c) : channels(std::move(c)) {}
    std::size_t n_channels() const { return channels.size(); }
};

Field sample(const ProductGrid& grid, const FieldSpec& spec);

SystemSpec assemble(const ProductGrid& grid, const OperatorSpecs& specs);

/// Clips the potential to [V_min, V_min + delta_e/2] and the kinetic spectrum
/// to delta_e/2 (shared equally between dofs), so that the Hamiltonian range is
/// [V_min, V_min + delta_e]. One channel and non-hermite grids only.
void truncate_energy_range(SystemSpec& sys, double delta_e);

void check_shape(const SystemSpec& sys, const WaveFunction& psi);

double norm2(const ProductGrid& grid, const WaveFunction& psi);
double norm(const ProductGrid& grid, const WaveFunction& psi);
cplx inner(const ProductGrid& grid, const WaveFunction& a, const WaveFunction& b);
void normalize(const ProductGrid& grid, WaveFunction& psi);

/// Adds sum_k T_k psi to `out` for one channel tensor.
void add_kinetic(const SystemSpec& sys, std::span<const cplx> psi, std::span<cplx> out);

/// (T + V - F mu) psi. The absorber is not part of the Hamiltonian.
WaveFunction apply_hamiltonian(const SystemSpec& sys, const WaveFunction& psi, double field);
void apply_hamiltonian(const SystemSpec& sys, const WaveFunction& psi, double field,
                       WaveFunction& out);

/// Pointwise eigenvalues (ascending) and eigenvectors of the potential matrix.
struct AdiabaticBasis {
    std::vector<Field> surfaces;
    /// vectors[p] is nu x nu with eigenvectors in columns, row-major.
    std::vector<std::vector<double>> vectors;
};
AdiabaticBasis adiabatic_basis(const SystemSpec& sys);

struct AdiabaticResult {
    std::vector<Field> surfaces;
    WaveFunction psi;
};
AdiabaticResult adiabatic_transform(const SystemSpec& sys, const WaveFunction& psi);
WaveFunction adiabatic_to_diabatic(const SystemSpec& sys, const WaveFunction& psi_adi);

std::vector<cplx> init_gauss(const Grid1D& grid, double pos_0, double width, double momentum_0);

/// Number of bound Morse levels, floor(lambda - 1/2) + 1.
std::size_t morse_bound_count(double d_e, double alf, double mass);
/// Analytic Morse energy E_v relative to the well bottom.
double morse_energy(double d_e, double alf, double mass, std::size_t v);
std::vector<cplx> init_morse_eigenstate(const Grid1D& grid, double d_e, double r_e, double alf,
                                        double mass, std::size_t n);

WaveFunction product_state(const ProductGrid& grid, std::size_t n_channels,
                           const std::vector<std::vector<cplx>>& per_dof, std::size_t channel);

} // namespace qdk

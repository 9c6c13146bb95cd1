#include "qdynkit/system.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "qdynkit/error.hpp"
#include "qdynkit/log.hpp"

namespace qdk {

namespace {

std::string pair_name(const char* what, const ChannelPair& p) {
    return std::string(what) + "." + std::to_string(p.first + 1) + "." + std::to_string(p.second + 1);
}

void validate_term(const ProductGrid& grid, const Term& t, const std::string& where) {
    if (t.dof >= grid.n_dofs())
        throw ConfigError(where + ": dof " + std::to_string(t.dof + 1) + " does not exist (" +
                          std::to_string(grid.n_dofs()) + " dofs)");
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            try {
                if constexpr (std::is_same_v<P, MorseParams> || std::is_same_v<P, MeckeParams> ||
                              std::is_same_v<P, PowerNipParams>)
                    validate(p);
            } catch (const ConfigError& e) {
                throw ConfigError(where + ": " + e.what());
            }
        },
        t.model);
}

// Fills a symmetric channel matrix of fields from the (c <= d) specs.
std::vector<std::optional<Field>> sample_matrix(const ProductGrid& grid, std::size_t nu,
                                                const std::map<ChannelPair, FieldSpec>& specs,
                                                const char* what) {
    std::vector<std::optional<Field>> out(nu * nu);
    for (const auto& [key, spec] : specs) {
        if (key.first >= nu || key.second >= nu)
            throw ConfigError(pair_name(what, key) + ": channel index exceeds n_eqs = " +
                              std::to_string(nu));
        for (const auto& t : spec) validate_term(grid, t, pair_name(what, key));
        Field f = sample(grid, spec);
        auto& slot = out[key.first * nu + key.second];
        if (slot) {
            // both (c, d) and (d, c) given: must agree
            for (std::size_t p = 0; p < f.size(); ++p)
                if (std::abs(f[p] - (*slot)[p]) > 1e-12 * std::max(1.0, std::abs(f[p])))
                    throw ConfigError(pair_name(what, key) + ": asymmetric channel matrix");
            continue;
        }
        slot = f;
        out[key.second * nu + key.first] = std::move(f);
    }
    return out;
}

} // namespace

bool SystemSpec::has_dipole() const {
    return std::any_of(dip.begin(), dip.end(), [](const auto& f) { return f.has_value(); });
}

Field sample(const ProductGrid& grid, const FieldSpec& spec) {
    Field f(grid.size(), 0.0);
    for (const auto& term : spec) {
        auto x = grid.coordinate(term.dof);
        for (std::size_t p = 0; p < f.size(); ++p) f[p] += evaluate(term.model, x[p]);
    }
    return f;
}

SystemSpec assemble(const ProductGrid& grid, const OperatorSpecs& specs) {
    if (specs.n_channels < 1) throw ConfigError("hamilt.coupling.n_eqs: must be at least 1");
    SystemSpec sys;
    sys.grid = grid;
    sys.n_channels = specs.n_channels;
    const std::size_t nu = specs.n_channels;
    sys.kinetic_cap.assign(grid.n_dofs(), no_cap);

    if (specs.jahn_teller) {
        if (!specs.pot.empty())
            throw ConfigError("hamilt.pot: the jahn_teller model excludes per-entry potentials");
        if (nu != 2) throw ConfigError("hamilt.pot: jahn_teller requires n_eqs = 2");
        if (grid.n_dofs() < 2) throw ConfigError("hamilt.pot: jahn_teller requires two dofs");
        const auto x = grid.coordinate(0);
        const auto y = grid.coordinate(1);
        Field v11(grid.size()), v22(grid.size()), v12(grid.size());
        for (std::size_t p = 0; p < grid.size(); ++p) {
            Eigen::Matrix2d m = eval_jahn_teller(*specs.jahn_teller, x[p], y[p]);
            v11[p] = m(0, 0);
            v22[p] = m(1, 1);
            v12[p] = m(0, 1);
        }
        sys.pot.resize(4);
        sys.pot[0] = std::move(v11);
        sys.pot[3] = std::move(v22);
        sys.pot[1] = v12;
        sys.pot[2] = std::move(v12);
    } else {
        sys.pot = sample_matrix(grid, nu, specs.pot, "hamilt.pot");
    }
    sys.dip = sample_matrix(grid, nu, specs.dip, "hamilt.dip");

    if (specs.nip) {
        for (const auto& t : *specs.nip) validate_term(grid, t, "hamilt.nip");
        Field w = sample(grid, *specs.nip);
        for (double v : w)
            if (v < 0.0) throw ConfigError("hamilt.nip: absorber must be nonnegative");
        sys.nip = std::move(w);
    }
    return sys;
}

void truncate_energy_range(SystemSpec& sys, double delta_e) {
    if (!(delta_e > 0.0)) throw ConfigError("hamilt.truncate.delta_e: must be positive");
    if (sys.n_channels != 1)
        throw UnsupportedError("energy-range truncation needs a single channel");
    for (const auto& g : sys.grid.dofs())
        if (g.kind() == GridKind::hermite)
            throw UnsupportedError("energy-range truncation is not available on hermite grids");
    auto& v = sys.pot[0];
    if (!v) v = Field(sys.grid.size(), 0.0);
    const double vmin = *std::min_element(v->begin(), v->end());
    for (double& x : *v) x = std::min(x, vmin + 0.5 * delta_e);
    const double cap = 0.5 * delta_e / static_cast<double>(sys.grid.n_dofs());
    sys.kinetic_cap.assign(sys.grid.n_dofs(), cap);
    sys.truncated_bounds = std::make_pair(vmin, vmin + delta_e);
}

void check_shape(const SystemSpec& sys, const WaveFunction& psi) {
    if (psi.n_channels() != sys.n_channels)
        throw ShapeError("wavefunction has " + std::to_string(psi.n_channels()) +
                         " channels, system has " + std::to_string(sys.n_channels));
    for (const auto& c : psi.channels)
        if (c.size() != sys.grid.size())
            throw ShapeError("wavefunction tensor size " + std::to_string(c.size()) +
                             " does not match grid size " + std::to_string(sys.grid.size()));
}

double norm2(const ProductGrid& grid, const WaveFunction& psi) {
    const auto& w = grid.weights();
    double s = 0.0;
    for (const auto& c : psi.channels)
        for (std::size_t p = 0; p < c.size(); ++p) s += w[p] * std::norm(c[p]);
    return s;
}

double norm(const ProductGrid& grid, const WaveFunction& psi) { return std::sqrt(norm2(grid, psi)); }

cplx inner(const ProductGrid& grid, const WaveFunction& a, const WaveFunction& b) {
    const auto& w = grid.weights();
    cplx s = 0.0;
    for (std::size_t c = 0; c < a.channels.size(); ++c)
        for (std::size_t p = 0; p < w.size(); ++p)
            s += w[p] * std::conj(a.channels[c][p]) * b.channels[c][p];
    return s;
}

void normalize(const ProductGrid& grid, WaveFunction& psi) {
    const double n = norm(grid, psi);
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericError("cannot normalize a zero wavefunction");
    for (auto& c : psi.channels)
        for (auto& v : c) v /= n;
}

void add_kinetic(const SystemSpec& sys, std::span<const cplx> psi, std::span<cplx> out) {
    const auto& grid = sys.grid;
    std::vector<cplx> tmp;
    for (std::size_t k = 0; k < grid.n_dofs(); ++k) {
        tmp.assign(psi.begin(), psi.end());
        const Grid1D& g = grid.dof(k);
        const double cap = sys.kinetic_cap[k];
        for_each_line(grid.shape(), k, tmp,
                      [&](std::span<cplx> line) { apply_kinetic_inplace(g, line, cap); });
        for (std::size_t p = 0; p < tmp.size(); ++p) out[p] += tmp[p];
    }
}

void apply_hamiltonian(const SystemSpec& sys, const WaveFunction& psi, double field,
                       WaveFunction& out) {
    check_shape(sys, psi);
    const std::size_t nu = sys.n_channels;
    const std::size_t n = sys.grid.size();
    out.channels.assign(nu, std::vector<cplx>(n, 0.0));
    for (std::size_t c = 0; c < nu; ++c) {
        auto& o = out.channels[c];
        add_kinetic(sys, psi.channels[c], o);
        for (std::size_t d = 0; d < nu; ++d) {
            const auto& in = psi.channels[d];
            if (const auto& v = sys.pot_at(c, d))
                for (std::size_t p = 0; p < n; ++p) o[p] += (*v)[p] * in[p];
            if (field != 0.0)
                if (const auto& mu = sys.dip_at(c, d))
                    for (std::size_t p = 0; p < n; ++p) o[p] -= field * (*mu)[p] * in[p];
        }
    }
}

WaveFunction apply_hamiltonian(const SystemSpec& sys, const WaveFunction& psi, double field) {
    WaveFunction out;
    apply_hamiltonian(sys, psi, field, out);
    return out;
}

AdiabaticBasis adiabatic_basis(const SystemSpec& sys) {
    const std::size_t nu = sys.n_channels;
    const std::size_t n = sys.grid.size();
    AdiabaticBasis b;
    b.surfaces.assign(nu, Field(n));
    b.vectors.assign(n, std::vector<double>(nu * nu));
    const auto inu = static_cast<Eigen::Index>(nu);
    Eigen::MatrixXd m(inu, inu);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t c = 0; c < nu; ++c)
            for (std::size_t d = 0; d < nu; ++d) {
                const auto& v = sys.pot_at(c, d);
                m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(d)) = v ? (*v)[p] : 0.0;
            }
        es.compute(m);
        Eigen::MatrixXd u = es.eigenvectors();
        for (Eigen::Index a = 0; a < inu; ++a) {
            for (Eigen::Index c = 0; c < inu; ++c) {
                if (std::abs(u(c, a)) > 1e-12) {
                    if (u(c, a) < 0.0) u.col(a) *= -1.0;
                    break;
                }
            }
            b.surfaces[static_cast<std::size_t>(a)][p] = es.eigenvalues()(a);
        }
        for (std::size_t c = 0; c < nu; ++c)
            for (std::size_t a = 0; a < nu; ++a)
                b.vectors[p][c * nu + a] = u(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(a));
    }
    return b;
}

AdiabaticResult adiabatic_transform(const SystemSpec& sys, const WaveFunction& psi) {
    check_shape(sys, psi);
    const std::size_t nu = sys.n_channels;
    if (nu == 1) {
        log::warn("adiabatic transform requested for a single channel; returning input");
        Field v = sys.pot_at(0, 0) ? *sys.pot_at(0, 0) : Field(sys.grid.size(), 0.0);
        return {{std::move(v)}, psi};
    }
    AdiabaticBasis b = adiabatic_basis(sys);
    AdiabaticResult r{std::move(b.surfaces), WaveFunction(nu, sys.grid.size())};
    for (std::size_t p = 0; p < sys.grid.size(); ++p) {
        const auto& u = b.vectors[p];
        for (std::size_t a = 0; a < nu; ++a) {
            cplx s = 0.0;
            for (std::size_t c = 0; c < nu; ++c) s += u[c * nu + a] * psi.channels[c][p];
            r.psi.channels[a][p] = s;
        }
    }
    return r;
}

WaveFunction adiabatic_to_diabatic(const SystemSpec& sys, const WaveFunction& psi_adi) {
    check_shape(sys, psi_adi);
    const std::size_t nu = sys.n_channels;
    if (nu == 1) return psi_adi;
    AdiabaticBasis b = adiabatic_basis(sys);
    WaveFunction out(nu, sys.grid.size());
    for (std::size_t p = 0; p < sys.grid.size(); ++p) {
        const auto& u = b.vectors[p];
        for (std::size_t c = 0; c < nu; ++c) {
            cplx s = 0.0;
            for (std::size_t a = 0; a < nu; ++a) s += u[c * nu + a] * psi_adi.channels[a][p];
            out.channels[c][p] = s;
        }
    }
    return out;
}

namespace {

void normalize_1d(const Grid1D& grid, std::vector<cplx>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += grid.weights()[i] * std::norm(v[i]);
    if (!(s > 0.0)) throw NumericError("initial function vanishes on the grid");
    const double f = 1.0 / std::sqrt(s);
    for (auto& x : v) x *= f;
}

} // namespace

std::vector<cplx> init_gauss(const Grid1D& grid, double pos_0, double width, double momentum_0) {
    if (!(width > 0.0)) throw ConfigError("psi.init.width: must be positive");
    std::vector<cplx> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = grid.points()[i];
        const double u = (x - pos_0) / (2.0 * width);
        v[i] = std::exp(-u * u) * std::exp(cplx(0.0, momentum_0 * x));
    }
    normalize_1d(grid, v);
    return v;
}

std::size_t morse_bound_count(double d_e, double alf, double mass) {
    const double lambda = std::sqrt(2.0 * mass * d_e) / alf;
    return static_cast<std::size_t>(std::floor(lambda - 0.5)) + 1;
}

double morse_energy(double d_e, double alf, double mass, std::size_t v) {
    const double w0 = alf * std::sqrt(2.0 * d_e / mass);
    const double x = static_cast<double>(v) + 0.5;
    return w0 * x - w0 * w0 * x * x / (4.0 * d_e);
}

std::vector<cplx> init_morse_eigenstate(const Grid1D& grid, double d_e, double r_e, double alf,
                                        double mass, std::size_t n) {
    validate(MorseParams{d_e, r_e, alf});
    if (!(mass > 0.0)) throw ConfigError("psi.init.mass: must be positive");
    const double lambda = std::sqrt(2.0 * mass * d_e) / alf;
    const double s = lambda - static_cast<double>(n) - 0.5;
    if (!(s > 0.0))
        throw ConfigError("psi.init.n: level " + std::to_string(n) + " is not bound (" +
                          std::to_string(morse_bound_count(d_e, alf, mass)) + " bound levels)");
    const double a = 2.0 * s;
    const std::size_t size = grid.size();
    std::vector<double> logabs(size), sign(size);
    for (std::size_t i = 0; i < size; ++i) {
        const double z = 2.0 * lambda * std::exp(-alf * (grid.points()[i] - r_e));
        // generalized Laguerre L_n^(a)(z) by upward recurrence
        double l0 = 1.0, l1 = 1.0 + a - z;
        double l = (n == 0) ? l0 : l1;
        for (std::size_t k = 1; k < n; ++k) {
            const double kk = static_cast<double>(k);
            l = ((2.0 * kk + 1.0 + a - z) * l1 - (kk + a) * l0) / (kk + 1.0);
            l0 = l1;
            l1 = l;
        }
        sign[i] = l < 0.0 ? -1.0 : 1.0;
        logabs[i] = (l == 0.0) ? -INFINITY : s * std::log(z) - 0.5 * z + std::log(std::abs(l));
    }
    const std::size_t imax =
        static_cast<std::size_t>(std::max_element(logabs.begin(), logabs.end()) - logabs.begin());
    std::vector<cplx> v(size);
    for (std::size_t i = 0; i < size; ++i)
        v[i] = sign[i] * sign[imax] * std::exp(logabs[i] - logabs[imax]);
    normalize_1d(grid, v);
    return v;
}

WaveFunction product_state(const ProductGrid& grid, std::size_t n_channels,
                           const std::vector<std::vector<cplx>>& per_dof, std::size_t channel) {
    if (per_dof.size() != grid.n_dofs())
        throw ShapeError("product_state: " + std::to_string(per_dof.size()) +
                         " factors for " + std::to_string(grid.n_dofs()) + " dofs");
    for (std::size_t k = 0; k < per_dof.size(); ++k)
        if (per_dof[k].size() != grid.shape()[k])
            throw ShapeError("product_state: factor " + std::to_string(k + 1) + " has length " +
                             std::to_string(per_dof[k].size()) + ", dof has " +
                             std::to_string(grid.shape()[k]) + " points");
    if (channel >= n_channels)
        throw ConfigError("psi.init.channel: " + std::to_string(channel + 1) + " exceeds n_eqs = " +
                          std::to_string(n_channels));
    WaveFunction psi(n_channels, grid.size());
    auto& t = psi.channels[channel];
    for (std::size_t p = 0; p < grid.size(); ++p) {
        cplx v = 1.0;
        for (std::size_t k = 0; k < grid.n_dofs(); ++k) v *= per_dof[k][grid.index_along(p, k)];
        t[p] = v;
    }
    normalize(grid, psi);
    return psi;
}

} // namespace qdk

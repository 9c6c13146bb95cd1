#include "qdynkit/propagators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "qdynkit/bessel.hpp"
#include "qdynkit/error.hpp"
#include "qdynkit/log.hpp"

namespace qdk {

namespace {

constexpr cplx I{0.0, 1.0};

void axpy(cplx a, const WaveFunction& x, WaveFunction& y) {
    for (std::size_t c = 0; c < x.channels.size(); ++c) {
        const auto& xs = x.channels[c];
        auto& ys = y.channels[c];
        for (std::size_t p = 0; p < xs.size(); ++p) ys[p] += a * xs[p];
    }
}

void scale(WaveFunction& x, cplx a) {
    for (auto& ch : x.channels)
        for (auto& v : ch) v *= a;
}

bool finite_state(const WaveFunction& psi) {
    for (const auto& ch : psi.channels)
        for (auto v : ch)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

double energy(const SystemSpec& sys, const WaveFunction& psi) {
    return inner(sys.grid, psi, apply_hamiltonian(sys, psi, 0.0)).real() / norm2(sys.grid, psi);
}

} // namespace

void validate(const TimeGrid& tg) {
    if (!(tg.main_delta > 0.0) || !std::isfinite(tg.main_delta))
        throw ConfigError("time.main.delta: must be positive");
    if (tg.main_stop == 0) throw ConfigError("time.main.stop: must be positive");
    if (tg.sub_n == 0) throw ConfigError("time.sub.n: must be positive");
}

// ---------------------------------------------------------------- pulses

std::string to_string(PulseShape s) {
    switch (s) {
    case PulseShape::sin2: return "sin2";
    case PulseShape::gauss: return "gauss";
    case PulseShape::rect: return "rect";
    case PulseShape::tabulated: return "tabulated";
    }
    return "?";
}

PulseShape pulse_shape_from_string(const std::string& s) {
    if (s == "sin2" || s == "sin^2") return PulseShape::sin2;
    if (s == "gauss") return PulseShape::gauss;
    if (s == "rect") return PulseShape::rect;
    if (s == "tabulated" || s == "table") return PulseShape::tabulated;
    throw ConfigError("time.efield.shape: unknown shape '" + s + "' (valid: sin2, gauss, rect, tabulated)");
}

void validate(const Pulse& p) {
    if (p.shape == PulseShape::tabulated) {
        if (!p.table) throw ConfigError("time.efield: tabulated pulse without a table");
    } else if (!(p.fwhm > 0.0) || !std::isfinite(p.fwhm)) {
        throw ConfigError("time.efield.fwhm: must be positive");
    }
    for (double v : {p.delay, p.ampli, p.frequ, p.chirp, p.chirp2, p.phase})
        if (!std::isfinite(v)) throw ConfigError("time.efield: parameters must be finite");
}

double pulse_envelope(const Pulse& p, double s) {
    switch (p.shape) {
    case PulseShape::sin2: {
        if (std::abs(s) > p.fwhm) return 0.0;
        const double c = std::cos(std::numbers::pi * s / (2.0 * p.fwhm));
        return c * c;
    }
    case PulseShape::gauss: {
        const double u = s / p.fwhm;
        return std::exp(-4.0 * std::numbers::ln2 * u * u);
    }
    case PulseShape::rect: return std::abs(s) <= 0.5 * p.fwhm ? 1.0 : 0.0;
    case PulseShape::tabulated: return 1.0;
    }
    return 0.0;
}

double field_value(const PulseSet& pulses, double t) {
    double f = 0.0;
    for (const auto& p : pulses) {
        const double s = t - p.delay;
        if (p.shape == PulseShape::tabulated) {
            f += p.ampli * (*p.table)(s);
            continue;
        }
        const double g = pulse_envelope(p, s);
        if (g == 0.0) continue;
        const double w = p.frequ + p.chirp * s + 0.5 * p.chirp2 * s * s;
        f += p.ampli * g * std::cos(w * s + p.phase);
    }
    return f;
}

// ---------------------------------------------------------------- Chebychev

std::vector<double> cheby_coefficients(double alpha, double precision, ChebyMode mode) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ConfigError("Chebychev: rescaled time step must be positive");
    if (!(precision > 0.0 && precision < 1.0))
        throw ConfigError("time.propa.precision: must lie in (0, 1)");
    const auto cap = static_cast<std::size_t>(10.0 * alpha + 100.0);
    const auto b = mode == ChebyMode::real ? bessel_j_sequence(alpha, cap) : bessel_i_scaled_sequence(alpha, cap);
    std::vector<double> c;
    for (std::size_t n = 0; n <= cap; ++n) {
        const double v = (n == 0 ? 1.0 : 2.0) * b[n];
        // J_n oscillates below n = alpha; I_n decreases monotonically
        const bool tail = mode == ChebyMode::imag || static_cast<double>(n) > alpha;
        if (tail && std::abs(v) < precision) return c;
        c.push_back(v);
    }
    throw NumericError("Chebychev series did not reach the requested precision within " +
                       std::to_string(cap) + " terms (spectral range too small?)");
}

std::pair<double, double> spectral_bounds(const SystemSpec& sys) {
    if (sys.truncated_bounds) return *sys.truncated_bounds;
    const std::size_t nu = sys.n_channels;
    const std::size_t n = sys.grid.size();
    double lo = 0.0, hi = 0.0;
    if (nu == 1) {
        const auto& v = sys.pot_at(0, 0);
        if (v) {
            const auto [mn, mx] = std::minmax_element(v->begin(), v->end());
            lo = *mn;
            hi = *mx;
        }
    } else {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        Eigen::MatrixXd m(nu, nu);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t c = 0; c < nu; ++c)
                for (std::size_t d = 0; d < nu; ++d) {
                    const auto& f = sys.pot_at(c, d);
                    m(c, d) = f ? (*f)[p] : 0.0;
                }
            es.compute(m, Eigen::EigenvaluesOnly);
            lo = std::min(lo, es.eigenvalues()(0));
            hi = std::max(hi, es.eigenvalues()(nu - 1));
        }
    }
    for (std::size_t k = 0; k < sys.grid.n_dofs(); ++k)
        hi += std::min(sys.grid.dof(k).kinetic_max(), sys.kinetic_cap[k]);
    return {lo, hi};
}

ChebyPropagator::ChebyPropagator(const SystemSpec& sys, double dt, const ChebyParams& params)
    : sys_(&sys), dt_(dt), mode_(params.mode) {
    if (!(dt > 0.0)) throw ConfigError("Chebychev: time step must be positive");
    const auto [e_min, e_max] = params.bounds ? *params.bounds : spectral_bounds(sys);
    if (!(e_max >= e_min)) throw ConfigError("Chebychev: spectral bounds must satisfy E_max > E_min");
    e_mid_ = 0.5 * (e_min + e_max);
    half_range_ = std::max(0.5 * (e_max - e_min), 5e-11);
    alpha_ = half_range_ * dt;
    coeffs_ = cheby_coefficients(alpha_, params.precision, mode_);
}

WaveFunction ChebyPropagator::step(const WaveFunction& psi) const {
    check_shape(*sys_, psi);
    const double inv = 1.0 / half_range_;
    // phi_{n+1} = 2 Hs phi_n - phi_{n-1}, Hs = (H - E_mid) / (dE/2)
    auto apply_hs = [&](const WaveFunction& in, WaveFunction& out) {
        apply_hamiltonian(*sys_, in, 0.0, out);
        for (std::size_t c = 0; c < in.channels.size(); ++c)
            for (std::size_t p = 0; p < in.channels[c].size(); ++p)
                out.channels[c][p] = (out.channels[c][p] - e_mid_ * in.channels[c][p]) * inv;
    };
    // phase of term n: (-i)^n real, (-1)^n imag
    const cplx step_phase = mode_ == ChebyMode::real ? -I : cplx(-1.0);
    WaveFunction sum = psi;
    scale(sum, coeffs_[0]);
    if (coeffs_.size() > 1) {
        WaveFunction prev = psi;
        WaveFunction curr(psi.n_channels(), psi.channels[0].size());
        WaveFunction next = curr;
        apply_hs(prev, curr);
        cplx phase = step_phase;
        axpy(phase * coeffs_[1], curr, sum);
        for (std::size_t n = 2; n < coeffs_.size(); ++n) {
            apply_hs(curr, next);
            for (std::size_t c = 0; c < next.channels.size(); ++c)
                for (std::size_t p = 0; p < next.channels[c].size(); ++p)
                    next.channels[c][p] = 2.0 * next.channels[c][p] - prev.channels[c][p];
            phase *= step_phase;
            axpy(phase * coeffs_[n], next, sum);
            std::swap(prev, curr);
            std::swap(curr, next);
        }
    }
    if (mode_ == ChebyMode::real) scale(sum, std::exp(-I * e_mid_ * dt_));
    return sum;
}

WaveFunction step_cheby(const SystemSpec& sys, const WaveFunction& psi, double dt,
                        const ChebyParams& params, const PulseSet& pulses) {
    if (!pulses.empty())
        throw UnsupportedError("Chebychev propagators need a time-independent Hamiltonian; "
                               "use splitting or sod with external fields");
    return ChebyPropagator(sys, dt, params).step(psi);
}

// ---------------------------------------------------------------- splitting

SplitPropagator::SplitPropagator(const SystemSpec& sys, double dt, int order)
    : sys_(&sys), dt_(dt), order_(order) {
    if (order != 2 && order != 3)
        throw ConfigError("time.propa.order: splitting order must be 2 (Trotter) or 3 (Strang), got " +
                          std::to_string(order));
    if (!std::isfinite(dt) || dt == 0.0) throw ConfigError("splitting: time step must be nonzero");
    const std::size_t nu = sys.n_channels;
    const std::size_t n = sys.grid.size();
    const double tau_v = order == 3 ? 0.5 * dt : dt;

    exp_v_.assign(n * nu * nu, 0.0);
    Eigen::MatrixXd m(nu, nu);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    for (std::size_t p = 0; p < n; ++p) {
        cplx* e = exp_v_.data() + p * nu * nu;
        if (nu == 1) {
            const auto& v = sys.pot_at(0, 0);
            e[0] = std::exp(-I * tau_v * (v ? (*v)[p] : 0.0));
            continue;
        }
        for (std::size_t c = 0; c < nu; ++c)
            for (std::size_t d = 0; d < nu; ++d) {
                const auto& f = sys.pot_at(c, d);
                m(c, d) = f ? (*f)[p] : 0.0;
            }
        es.compute(m);
        const auto& q = es.eigenvectors();
        for (std::size_t c = 0; c < nu; ++c)
            for (std::size_t d = 0; d < nu; ++d) {
                cplx s = 0.0;
                for (std::size_t a = 0; a < nu; ++a)
                    s += q(c, a) * std::exp(-I * tau_v * es.eigenvalues()(a)) * q(d, a);
                e[c * nu + d] = s;
            }
    }

    for (std::size_t c = 0; c < nu; ++c)
        for (std::size_t d = c + 1; d < nu; ++d)
            if (sys.dip_at(c, d)) has_transition_ = true;
    if (has_transition_) {
        mu_t_values_.resize(n * nu);
        mu_t_vectors_.resize(n * nu * nu);
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t c = 0; c < nu; ++c)
                for (std::size_t d = 0; d < nu; ++d) {
                    const auto& f = sys.dip_at(c, d);
                    m(c, d) = (c != d && f) ? (*f)[p] : 0.0;
                }
            es.compute(m);
            for (std::size_t a = 0; a < nu; ++a) mu_t_values_[p * nu + a] = es.eigenvalues()(a);
            for (std::size_t c = 0; c < nu; ++c)
                for (std::size_t a = 0; a < nu; ++a) mu_t_vectors_[(p * nu + c) * nu + a] = es.eigenvectors()(c, a);
        }
    }

    for (std::size_t k = 0; k < sys.grid.n_dofs(); ++k) {
        const Grid1D& g = sys.grid.dof(k);
        if (g.kind() == GridKind::hermite) {
            if (std::isfinite(sys.kinetic_cap[k]))
                throw UnsupportedError("kinetic truncation is not available on hermite grids");
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ks(g.kinetic_fbr());
            Eigen::VectorXcd ph = (-I * dt * ks.eigenvalues().cast<cplx>()).array().exp();
            const Eigen::MatrixXcd s = ks.eigenvectors().cast<cplx>();
            kin_matrix_.push_back(s * ph.asDiagonal() * s.transpose());
            kin_phase_.emplace_back();
        } else {
            auto t = g.kinetic_spectrum();
            std::vector<cplx> ph(t.size());
            for (std::size_t j = 0; j < t.size(); ++j) ph[j] = std::exp(-I * dt * std::min(t[j], sys.kinetic_cap[k]));
            kin_phase_.push_back(std::move(ph));
            kin_matrix_.emplace_back();
        }
    }
}

void SplitPropagator::apply_potential(WaveFunction& psi) const {
    const std::size_t nu = sys_->n_channels;
    const std::size_t n = sys_->grid.size();
    if (nu == 1) {
        auto& a = psi.channels[0];
        for (std::size_t p = 0; p < n; ++p) a[p] *= exp_v_[p];
        return;
    }
    std::vector<cplx> v(nu);
    for (std::size_t p = 0; p < n; ++p) {
        const cplx* e = exp_v_.data() + p * nu * nu;
        for (std::size_t c = 0; c < nu; ++c) v[c] = psi.channels[c][p];
        for (std::size_t c = 0; c < nu; ++c) {
            cplx s = 0.0;
            for (std::size_t d = 0; d < nu; ++d) s += e[c * nu + d] * v[d];
            psi.channels[c][p] = s;
        }
    }
}

void SplitPropagator::apply_permanent(WaveFunction& psi, double field, double tau) const {
    if (field == 0.0) return;
    for (std::size_t c = 0; c < sys_->n_channels; ++c) {
        const auto& mu = sys_->dip_at(c, c);
        if (!mu) continue;
        auto& a = psi.channels[c];
        for (std::size_t p = 0; p < a.size(); ++p) a[p] *= std::exp(I * field * tau * (*mu)[p]);
    }
}

void SplitPropagator::apply_transition(WaveFunction& psi, double field, double tau) const {
    if (field == 0.0 || !has_transition_) return;
    const std::size_t nu = sys_->n_channels;
    std::vector<cplx> v(nu), u(nu);
    for (std::size_t p = 0; p < sys_->grid.size(); ++p) {
        const double* q = mu_t_vectors_.data() + p * nu * nu;
        for (std::size_t c = 0; c < nu; ++c) v[c] = psi.channels[c][p];
        for (std::size_t a = 0; a < nu; ++a) {
            cplx s = 0.0;
            for (std::size_t c = 0; c < nu; ++c) s += q[c * nu + a] * v[c];
            u[a] = s * std::exp(I * field * tau * mu_t_values_[p * nu + a]);
        }
        for (std::size_t c = 0; c < nu; ++c) {
            cplx s = 0.0;
            for (std::size_t a = 0; a < nu; ++a) s += q[c * nu + a] * u[a];
            psi.channels[c][p] = s;
        }
    }
}

void SplitPropagator::apply_kinetic(WaveFunction& psi) const {
    const auto& grid = sys_->grid;
    for (std::size_t k = 0; k < grid.n_dofs(); ++k) {
        const Grid1D& g = grid.dof(k);
        for (auto& ch : psi.channels) {
            for_each_line(grid.shape(), k, ch, [&](std::span<cplx> line) {
                dvr_to_fbr_inplace(g, line);
                if (g.kind() == GridKind::hermite) {
                    Eigen::Map<Eigen::VectorXcd> x(line.data(), static_cast<Eigen::Index>(line.size()));
                    Eigen::VectorXcd y = kin_matrix_[k] * x;
                    x = y;
                } else {
                    const auto& ph = kin_phase_[k];
                    for (std::size_t j = 0; j < line.size(); ++j) line[j] *= ph[j];
                }
                fbr_to_dvr_inplace(g, line);
            });
        }
    }
}

void SplitPropagator::step(WaveFunction& psi, double t, const PulseSet& pulses) const {
    check_shape(*sys_, psi);
    const bool fields = !pulses.empty() && sys_->has_dipole();
    if (order_ == 2) {
        const double f = fields ? field_value(pulses, t) : 0.0;
        apply_potential(psi);
        apply_permanent(psi, f, dt_);
        apply_transition(psi, f, dt_);
        apply_kinetic(psi);
        return;
    }
    const double h = 0.5 * dt_;
    const double f0 = fields ? field_value(pulses, t) : 0.0;
    const double f1 = fields ? field_value(pulses, t + dt_) : 0.0;
    apply_potential(psi);
    apply_permanent(psi, f0, h);
    apply_transition(psi, f0, h);
    apply_kinetic(psi);
    apply_transition(psi, f1, h);
    apply_permanent(psi, f1, h);
    apply_potential(psi);
}

WaveFunction step_split(const SystemSpec& sys, const WaveFunction& psi, double t, double dt, int order,
                        const PulseSet& pulses) {
    WaveFunction out = psi;
    SplitPropagator(sys, dt, order).step(out, t, pulses);
    return out;
}

WaveFunction step_sod(const SystemSpec& sys, const WaveFunction& psi_prev, const WaveFunction& psi_curr,
                      double t, double dt, const PulseSet& pulses) {
    check_shape(sys, psi_prev);
    const double f = pulses.empty() ? 0.0 : field_value(pulses, t);
    WaveFunction out = psi_prev;
    axpy(-2.0 * I * dt, apply_hamiltonian(sys, psi_curr, f), out);
    return out;
}

void apply_nip(const SystemSpec& sys, WaveFunction& psi, double dt) {
    if (!sys.nip) return;
    check_shape(sys, psi);
    const auto& w = *sys.nip;
    std::vector<double> damp(w.size());
    for (std::size_t p = 0; p < w.size(); ++p) damp[p] = std::exp(-w[p] * dt);
    for (auto& ch : psi.channels)
        for (std::size_t p = 0; p < ch.size(); ++p) ch[p] *= damp[p];
}

// ---------------------------------------------------------------- drivers

std::string to_string(Method m) {
    switch (m) {
    case Method::cheby_real: return "cheby_real";
    case Method::cheby_imag: return "cheby_imag";
    case Method::splitting: return "splitting";
    case Method::sod: return "sod";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "cheby_real") return Method::cheby_real;
    if (s == "cheby_imag") return Method::cheby_imag;
    if (s == "splitting") return Method::splitting;
    if (s == "sod") return Method::sod;
    throw ConfigError("unknown propagator '" + s +
                      "' (valid: cheby_real, cheby_imag, splitting, sod)");
}

Trajectory propagate(const SystemSpec& sys, const WaveFunction& psi0, const TimeGrid& tg,
                     const PulseSet& pulses, const PropagatorConfig& cfg, const Observer& observer) {
    validate(tg);
    check_shape(sys, psi0);
    for (const auto& p : pulses) validate(p);
    if (cfg.method == Method::cheby_imag)
        throw ConfigError("time.propa.handle: cheby_imag is for relaxation; use the relax command");

    std::optional<ChebyPropagator> cheby;
    std::optional<SplitPropagator> split;
    const double dt = tg.dt();
    switch (cfg.method) {
    case Method::cheby_real:
        if (!pulses.empty())
            throw UnsupportedError("Chebychev propagators need a time-independent Hamiltonian; "
                                   "use splitting or sod with external fields");
        cheby.emplace(sys, tg.main_delta, ChebyParams{cfg.precision, ChebyMode::real, {}});
        log::info("Chebychev: alpha = " + std::to_string(cheby->alpha()) + ", " +
                  std::to_string(cheby->n_terms()) + " polynomials");
        break;
    case Method::splitting: split.emplace(sys, dt, cfg.order); break;
    case Method::sod: split.emplace(sys, -dt, 3); break;
    case Method::cheby_imag: break;
    }

    Trajectory traj;
    traj.records.reserve(tg.main_stop + 1);
    WaveFunction psi = psi0;
    auto record = [&](std::size_t step, double t) {
        const double f = pulses.empty() ? 0.0 : field_value(pulses, t);
        traj.records.push_back(expect(sys, psi, psi0, t, f));
        if (observer) observer(step, t, psi, traj.records.back());
    };
    record(0, 0.0);

    WaveFunction prev;
    if (cfg.method == Method::sod) {
        // psi(-dt) from one backward Strang step
        prev = psi;
        split->step(prev, 0.0, pulses);
    }

    for (std::size_t step = 1; step <= tg.main_stop; ++step) {
        const double t0 = static_cast<double>(step - 1) * tg.main_delta;
        switch (cfg.method) {
        case Method::cheby_real: psi = cheby->step(psi); break;
        case Method::splitting:
            for (std::size_t s = 0; s < tg.sub_n; ++s) split->step(psi, t0 + static_cast<double>(s) * dt, pulses);
            break;
        case Method::sod:
            for (std::size_t s = 0; s < tg.sub_n; ++s) {
                WaveFunction next = step_sod(sys, prev, psi, t0 + static_cast<double>(s) * dt, dt, pulses);
                prev = std::move(psi);
                psi = std::move(next);
            }
            apply_nip(sys, prev, tg.main_delta);
            break;
        case Method::cheby_imag: break;
        }
        apply_nip(sys, psi, tg.main_delta);
        if (!finite_state(psi))
            throw NumericError("wavefunction diverged at main step " + std::to_string(step) +
                               " (time step too large for the spectral range?)");
        record(step, static_cast<double>(step) * tg.main_delta);
    }
    traj.final_state = std::move(psi);
    return traj;
}

namespace {

double project_out(const ProductGrid& grid, WaveFunction& psi, const std::vector<WaveFunction>& lower) {
    double worst = 0.0;
    for (const auto& l : lower) {
        const double ll = norm2(grid, l);
        const cplx o = inner(grid, l, psi) / ll;
        worst = std::max(worst, std::abs(o) * std::sqrt(ll));
        axpy(-o, l, psi);
    }
    return worst;
}

RelaxResult relax_impl(const SystemSpec& sys, const WaveFunction& psi0, const TimeGrid& tg,
                       const std::vector<WaveFunction>& lower, const RelaxOptions& opts) {
    validate(tg);
    check_shape(sys, psi0);
    for (const auto& l : lower) check_shape(sys, l);
    if (!(opts.tolerance > 0.0)) throw ConfigError("relaxation tolerance must be positive");
    const ChebyPropagator cheby(sys, tg.main_delta, ChebyParams{opts.precision, ChebyMode::imag, {}});
    log::info("Chebychev (imaginary time): alpha = " + std::to_string(cheby.alpha()) + ", " +
              std::to_string(cheby.n_terms()) + " polynomials");

    RelaxResult r;
    r.state = psi0;
    project_out(sys.grid, r.state, lower);
    normalize(sys.grid, r.state);
    r.energy = energy(sys, r.state);
    r.energies.push_back(r.energy);
    bool warned = false;
    for (std::size_t step = 1; step <= tg.main_stop; ++step) {
        r.state = cheby.step(r.state);
        const double n2 = norm2(sys.grid, r.state);
        if (!(n2 > 0.0) || !std::isfinite(n2))
            throw NumericError("relaxation lost the wavefunction at step " + std::to_string(step));
        scale(r.state, 1.0 / std::sqrt(n2));
        const double overlap = project_out(sys.grid, r.state, lower);
        if (overlap > 1e-6 && !warned) {
            log::warn("relaxation: overlap with lower states reached " + std::to_string(overlap) +
                      " at step " + std::to_string(step) + "; orthogonality is degrading");
            warned = true;
        }
        normalize(sys.grid, r.state);
        const double e = energy(sys, r.state);
        r.energies.push_back(e);
        r.steps = step;
        const double change = std::abs(e - r.energy) / std::max(std::abs(e), 1e-300);
        r.energy = e;
        if (change < opts.tolerance) {
            r.converged = true;
            break;
        }
    }
    return r;
}

} // namespace

RelaxResult relax(const SystemSpec& sys, const WaveFunction& psi0, const TimeGrid& tg, const RelaxOptions& opts) {
    return relax_impl(sys, psi0, tg, {}, opts);
}

RelaxResult relax_excited(const SystemSpec& sys, const WaveFunction& psi0, const TimeGrid& tg,
                          const std::vector<WaveFunction>& lower, const RelaxOptions& opts) {
    if (lower.empty()) throw ConfigError("relax_excited: no lower states given");
    return relax_impl(sys, psi0, tg, lower, opts);
}

} // namespace qdk

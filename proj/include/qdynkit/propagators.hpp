#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qdynkit/observe.hpp"
#include "qdynkit/system.hpp"

namespace qdk {

struct TimeGrid {
    double main_delta = 1.0;
    std::size_t main_stop = 1;
    std::size_t sub_n = 1;

    double dt() const { return main_delta / static_cast<double>(sub_n); }
};
void validate(const TimeGrid& tg);

enum class PulseShape { sin2, gauss, rect, tabulated };
std::string to_string(PulseShape s);
PulseShape pulse_shape_from_string(const std::string& s);

/// F_0 g(s) cos(omega(s) s + phi_0) with s = t - delay and
/// omega(s) = omega_0 + chirp s + chirp2 s^2 / 2.
/// sin2:  g = cos^2(pi s / (2 fwhm)) for |s| <= fwhm, else 0
/// gauss: g = exp(-4 ln2 (s / fwhm)^2)
/// rect:  g = 1 for |s| <= fwhm / 2, else 0
/// tabulated: ampli * table(s); carrier and envelope are ignored.
struct Pulse {
    PulseShape shape = PulseShape::sin2;
    double delay = 0.0;
    double fwhm = 1.0;
    double ampli = 0.0;
    double frequ = 0.0;
    double chirp = 0.0;
    double chirp2 = 0.0;
    double phase = 0.0;
    std::optional<TabulatedFunction> table;
};
using PulseSet = std::vector<Pulse>;

void validate(const Pulse& p);
double pulse_envelope(const Pulse& p, double s);
double field_value(const PulseSet& pulses, double t);

// ---------------------------------------------------------------- Chebychev

enum class ChebyMode { real, imag };

/// Expansion coefficients of exp(-i alpha x) (real) or exp(-alpha x) up to a
/// constant factor (imag) in Chebychev polynomials T_n(x): c_0 = J_0,
/// c_n = 2 J_n (real) and c_0 = e^-a I_0, c_n = 2 e^-a I_n (imag). The phase
/// (-i)^n or sign (-1)^n is applied by the propagator. The series stops at
/// the first n with |c_n| < precision (real mode: first n > alpha, past the
/// zeros of J_n); the result has n entries.
std::vector<double> cheby_coefficients(double alpha, double precision, ChebyMode mode);

/// Bounds of the Hamiltonian spectrum (field free): the truncated range if
/// set, otherwise the extreme pointwise potential eigenvalues plus the
/// (capped) kinetic maxima.
std::pair<double, double> spectral_bounds(const SystemSpec& sys);

struct ChebyParams {
    double precision = 1e-8;
    ChebyMode mode = ChebyMode::real;
    /// Overrides spectral_bounds().
    std::optional<std::pair<double, double>> bounds;
};

class ChebyPropagator {
public:
    ChebyPropagator(const SystemSpec& sys, double dt, const ChebyParams& params);

    /// exp(-i H dt) psi (real) or exp(-(H - E_min - dE/2) dt) psi (imag).
    WaveFunction step(const WaveFunction& psi) const;

    double alpha() const { return alpha_; }
    std::size_t n_terms() const { return coeffs_.size(); }
    const std::vector<double>& coefficients() const { return coeffs_; }

private:
    const SystemSpec* sys_;
    double dt_;
    ChebyMode mode_;
    double e_mid_ = 0.0;
    double half_range_ = 1.0;
    double alpha_ = 0.0;
    std::vector<double> coeffs_;
};

/// Rejects pulses: Chebychev needs a time-independent Hamiltonian.
WaveFunction step_cheby(const SystemSpec& sys, const WaveFunction& psi, double dt,
                        const ChebyParams& params, const PulseSet& pulses = {});

// ---------------------------------------------------------------- splitting

/// order 2: Trotter, exp(-iT) exp(iF mu_t) exp(iF mu_p) exp(-iV), field at t.
/// order 3: Strang, half steps of V and mu around a full kinetic step, with the
/// dipole factors at t before and at t + dt after the kinetic step.
class SplitPropagator {
public:
    SplitPropagator(const SystemSpec& sys, double dt, int order);

    void step(WaveFunction& psi, double t, const PulseSet& pulses) const;

    double dt() const { return dt_; }
    int order() const { return order_; }

private:
    void apply_potential(WaveFunction& psi) const;
    void apply_permanent(WaveFunction& psi, double field, double tau) const;
    void apply_transition(WaveFunction& psi, double field, double tau) const;
    void apply_kinetic(WaveFunction& psi) const;

    const SystemSpec* sys_;
    double dt_;
    int order_;
    /// exp(-i V tau) per point, nu x nu row-major (tau = dt or dt/2).
    std::vector<cplx> exp_v_;
    bool has_transition_ = false;
    /// Transition dipole eigenpairs per point.
    std::vector<double> mu_t_values_;
    std::vector<double> mu_t_vectors_;
    /// Per dof: diagonal FBR phases, or the full FBR matrix for hermite.
    std::vector<std::vector<cplx>> kin_phase_;
    std::vector<Eigen::MatrixXcd> kin_matrix_;
};

WaveFunction step_split(const SystemSpec& sys, const WaveFunction& psi, double t, double dt,
                        int order, const PulseSet& pulses = {});

/// psi(t + dt) = psi(t - dt) - 2 i dt H(t) psi(t)
WaveFunction step_sod(const SystemSpec& sys, const WaveFunction& psi_prev,
                      const WaveFunction& psi_curr, double t, double dt,
                      const PulseSet& pulses = {});

/// psi *= exp(-W dt) pointwise, all channels. No-op without absorber.
void apply_nip(const SystemSpec& sys, WaveFunction& psi, double dt);

// ---------------------------------------------------------------- drivers

enum class Method { cheby_real, cheby_imag, splitting, sod };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct PropagatorConfig {
    Method method = Method::cheby_real;
    double precision = 1e-8;
    /// Splitting order, 2 (Trotter) or 3 (Strang).
    int order = 3;
};

struct Trajectory {
    /// t = 0 and every main step.
    std::vector<ExpectationRecord> records;
    WaveFunction final_state;
};

/// Called with the main step index (0 = initial state), time, state and record.
using Observer = std::function<void(std::size_t, double, const WaveFunction&, const ExpectationRecord&)>;

Trajectory propagate(const SystemSpec& sys, const WaveFunction& psi0, const TimeGrid& tg,
                     const PulseSet& pulses, const PropagatorConfig& cfg,
                     const Observer& observer = {});

struct RelaxOptions {
    double precision = 1e-8;
    /// Relative energy change between main steps.
    double tolerance = 1e-10;
};

struct RelaxResult {
    WaveFunction state;
    double energy = 0.0;
    std::size_t steps = 0;
    bool converged = false;
    /// <H> of the initial (projected, normalized) state and after every step.
    std::vector<double> energies;
};

/// Imaginary-time Chebychev relaxation with main steps of tg.main_delta. The
/// absorber is ignored.
RelaxResult relax(const SystemSpec& sys, const WaveFunction& psi0, const TimeGrid& tg,
                  const RelaxOptions& opts = {});

/// Relaxation in the subspace orthogonal to `lower` (states 0..k-1).
RelaxResult relax_excited(const SystemSpec& sys, const WaveFunction& psi0, const TimeGrid& tg,
                          const std::vector<WaveFunction>& lower, const RelaxOptions& opts = {});

} // namespace qdk

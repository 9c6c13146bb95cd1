// Acceptance suite: one PASS/FAIL line per criterion.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "qdynkit/checkpoint.hpp"
#include "qdynkit/config.hpp"
#include "qdynkit/observe.hpp"
#include "qdynkit/propagators.hpp"
#include "qdynkit/stationary.hpp"
#include "test_util.hpp"

using namespace qdk;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;
constexpr cplx I{0.0, 1.0};

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---------------------------------------------------------------- oracles

// E_v = w0 (v + 1/2) - w0^2 (v + 1/2)^2 / (4 D_e), w0 = alpha sqrt(2 D_e / M)
double morse_level(double d_e, double alf, double mass, int v) {
    const double w0 = alf * std::sqrt(2.0 * d_e / mass);
    const double x = v + 0.5;
    return w0 * x - w0 * w0 * x * x / (4.0 * d_e);
}

// Periodic Fourier kinetic matrix by explicit summation over the N momenta
// k_n = 2 pi n / L, n = -N/2 .. N/2 - 1, in the orthonormal DVR basis.
Eigen::MatrixXd fourier_kinetic(std::size_t n, double length, double mass) {
    Eigen::MatrixXd t(n, n);
    const long half = static_cast<long>(n) / 2;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cplx s = 0.0;
            for (long m = -half; m < static_cast<long>(n) - half; ++m) {
                const double k = 2.0 * pi * static_cast<double>(m) / length;
                s += k * k / (2.0 * mass) *
                     std::exp(I * k * (static_cast<double>(i) - static_cast<double>(j)) * length / static_cast<double>(n));
            }
            t(i, j) = s.real() / static_cast<double>(n);
        }
    return t;
}

// exp(-i H t) psi for a one-channel fft system with a sampled potential.
std::vector<cplx> dense_evolution(const Grid1D& g, const std::vector<double>& v, const std::vector<cplx>& psi,
                                  double t) {
    const std::size_t n = g.size();
    Eigen::MatrixXd h = fourier_kinetic(n, g.x_max() - g.x_min(), g.mass());
    for (std::size_t i = 0; i < n; ++i) h(i, i) += v[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::MatrixXcd q = es.eigenvectors().cast<cplx>();
    Eigen::VectorXcd c(n);
    for (std::size_t i = 0; i < n; ++i) c(i) = psi[i];
    Eigen::VectorXcd ph(n);
    for (std::size_t k = 0; k < n; ++k) ph(k) = std::exp(-I * es.eigenvalues()(k) * t);
    const Eigen::VectorXcd out = q * ph.asDiagonal() * (q.adjoint() * c);
    return {out.data(), out.data() + n};
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// L2 distance with the DVR weights.
double l2_diff(const Grid1D& g, const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += g.weights()[i] * std::norm(a[i] - b[i]);
    return std::sqrt(s);
}

// ---------------------------------------------------------------- shared state

struct MorseReference {
    double e0 = 0.0;
    bool ok = false;
};
MorseReference morse_ref;

const MorseParams oh{0.1994, 1.821, 1.189};
const double oh_mass = 1728.539;

// ---------------------------------------------------------------- criteria

Outcome bound_states() {
    const auto t0 = Clock::now();
    const RunSpec spec = parse_config(test::config_path("morse_bound.toml"));
    const SystemSpec sys = build_system(spec);
    // one state beyond the requested 22 shows where the bound spectrum ends
    const EigenResult r = solve_bound_states(sys, spec.eigen->stop + 1, spec.eigen->options);
    const double secs = seconds_since(t0);

    std::size_t bound = 0;
    for (double e : r.energies) bound += e < oh.d_e ? 1 : 0;
    double worst_low = 0.0;
    for (int v = 0; v <= 10; ++v)
        worst_low = std::max(worst_low, std::abs(r.energies[v] - morse_level(oh.d_e, oh.alf, oh_mass, v)) /
                                            morse_level(oh.d_e, oh.alf, oh_mass, v));
    const double e21 = morse_level(oh.d_e, oh.alf, oh_mass, 21);
    const double err21 = std::abs(r.energies[21] - e21) / e21;
    EigenResult top = r;
    top.energies.resize(22);
    top.states.resize(22);
    const double r21 = expectations_bound(top, sys)[21].position[0] / oh.r_e;

    morse_ref.e0 = r.energies[0];
    morse_ref.ok = true;
    const bool pass = bound == 22 && worst_low <= 1e-8 && err21 <= 1e-5 && r21 >= 3.4 && r21 <= 4.6 && secs < 5.0;
    return {pass, fmt::format("{} states below D_e; max rel err v<=10 {:.2e} (<=1e-8); v=21 {:.2e} (<=1e-5); "
                              "<R>_21 = {:.3f} R_e; {:.2f} s",
                              bound, worst_low, err21, r21, secs)};
}

Outcome hermite_exactness() {
    const RunSpec spec = parse_config(test::config_path("hermite_bound.toml"));
    const SystemSpec sys = build_system(spec);
    const double w = spec.dofs[0].omega;
    const EigenResult r = solve_bound_states(sys, 20);
    double worst = 0.0;
    int at = 0;
    for (int n = 0; n <= 20; ++n) {
        const double exact = w * (n + 0.5);
        const double e = std::abs(r.energies[n] - exact) / exact;
        if (e > worst) {
            worst = e;
            at = n;
        }
    }
    return {worst <= 1e-10, fmt::format("max rel err {:.2e} at n = {} (<=1e-10)", worst, at)};
}

Outcome chebychev_counts() {
    const std::size_t re = cheby_coefficients(76.8237, 1e-8, ChebyMode::real).size();
    const std::size_t im = cheby_coefficients(76.8237, 1e-8, ChebyMode::imag).size();
    const bool pass = re >= 102 && re <= 106 && im >= 82 && im <= 92;
    return {pass, fmt::format("real {} (104 +/- 2), imag {} (87 +/- 5)", re, im)};
}

struct AcfScan {
    double plateau = 0.0, late = 0.0, t_late = 0.0;
};

AcfScan scan_acf(const std::vector<ExpectationRecord>& records) {
    AcfScan s;
    for (const auto& r : records) {
        const double a = std::abs(r.autocorrelation);
        if (r.t >= 1000.0 && r.t <= 6000.0) s.plateau = std::max(s.plateau, a);
        if (r.t > 6000.0 && a > s.late) {
            s.late = a;
            s.t_late = r.t;
        }
    }
    return s;
}

Outcome revival() {
    const auto t0 = Clock::now();
    const RunSpec spec = parse_config(test::config_path("revival.toml"));
    const SystemSpec sys = build_system(spec);
    const WaveFunction psi0 = build_initial(spec, sys);
    const Trajectory tr = propagate(sys, psi0, *spec.time, spec.pulses, spec.propa);
    // The classical period (about 350) spans only a few main steps, so the
    // same trajectory is also sampled eight times more densely to resolve
    // the maximum of |acf|.
    TimeGrid fine = *spec.time;
    fine.main_delta /= 8.0;
    fine.main_stop *= 8;
    const Trajectory dense = propagate(sys, psi0, fine, spec.pulses, spec.propa);
    const double secs = seconds_since(t0);

    const AcfScan c = scan_acf(tr.records);
    const AcfScan f = scan_acf(dense.records);
    const double nrm = tr.records.back().norm;
    // the dense run reproduces the specified one at the shared times
    double drift = 0.0;
    for (std::size_t k = 0; k < tr.records.size(); ++k)
        drift = std::max(drift, std::abs(std::abs(tr.records[k].autocorrelation) -
                                         std::abs(dense.records[8 * k].autocorrelation)));
    const bool pass = std::abs(f.t_late - 7682.0) <= 380.0 && f.late > f.plateau && nrm < 1.0 && nrm > 0.5 &&
                      drift < 1e-3 && secs < 30.0;
    return {pass, fmt::format("late max |acf| = {:.4f} at t = {:.1f} (7682 +/- 380), plateau max {:.4f} "
                              "[every main step: {:.4f} at t = {:.1f}, plateau {:.4f}]; final norm {:.5f}; max |acf| difference at shared times {:.1e}; {:.2f} s",
                              f.late, f.t_late, f.plateau, c.late, c.t_late, c.plateau, nrm, drift, secs)};
}

Outcome ladder() {
    const auto t0 = Clock::now();
    const RunSpec spec = parse_config(test::config_path("ladder.toml"));
    const SystemSpec sys = build_system(spec);
    // eigenbasis of criterion 1
    const std::vector<WaveFunction> levels = solve_bound_states(sys, 5).states;
    const Trajectory tr = propagate(sys, build_initial(spec, sys), *spec.time, spec.pulses, spec.propa);
    const auto pops = level_populations(sys.grid, tr.final_state, levels);
    const double secs = seconds_since(t0);
    const double t_end = tr.records.back().t;
    const bool pass = pops[5] > 0.999 && std::abs(t_end - 41341.0) < 1.0 && secs < 120.0;
    return {pass, fmt::format("P(v=5) = {:.5f} at t = {:.1f} (> 0.999); P(v=4) = {:.5f}; {:.2f} s", pops[5], t_end,
                              pops[4], secs)};
}

Outcome relaxation() {
    if (!morse_ref.ok) return {false, "needs the criterion 1 ground state"};
    const RunSpec spec = parse_config(test::config_path("relax.toml"));
    const SystemSpec sys = build_system(spec);
    const RelaxResult r = relax(sys, build_initial(spec, sys), *spec.time, spec.relax);
    std::size_t first = 0;
    for (std::size_t k = 1; k < r.energies.size(); ++k)
        if (std::abs(r.energies[k] - morse_ref.e0) / morse_ref.e0 <= 1e-6) {
            first = k;
            break;
        }
    std::string trace;
    for (std::size_t k = 1; k <= 3 && k < r.energies.size(); ++k)
        trace += fmt::format("{}{:.2e}", k > 1 ? ", " : "", std::abs(r.energies[k] - morse_ref.e0) / morse_ref.e0);
    return {first >= 1 && first <= 3,
            fmt::format("rel err after steps 1..3: {}; within 1e-6 after {} steps (<= 3)", trace,
                        first ? std::to_string(first) : std::string("no"))};
}

Outcome cross_validation() {
    const Grid1D g = Grid1D::fft(16, 0.7, 10.0, oh_mass);
    OperatorSpecs ops;
    ops.pot[{0, 0}] = {Term{oh, 0}};
    const SystemSpec sys = assemble(ProductGrid({g}), ops);
    std::vector<double> v(16);
    for (std::size_t i = 0; i < 16; ++i) v[i] = 0.1994 * std::pow(1.0 - std::exp(-1.189 * (g.points()[i] - 1.821)), 2);
    WaveFunction psi({test::random_vector(16, 77)});
    normalize(sys.grid, psi);

    std::vector<std::string> notes;
    bool pass = true;

    // Chebychev, one step of 76.8237
    const double t = 76.8237;
    ChebyParams cp;
    cp.precision = 1e-8;
    const WaveFunction ch = step_cheby(sys, psi, t, cp);
    // compare orthonormal amplitudes
    std::vector<cplx> a(16), b(16);
    const auto exact = dense_evolution(g, v, psi.channels[0], t);
    for (std::size_t i = 0; i < 16; ++i) {
        const double s = std::sqrt(g.weights()[i]);
        a[i] = s * ch.channels[0][i];
        b[i] = s * exact[i];
    }
    const double cheby_err = max_diff(a, b);
    pass &= cheby_err <= 10.0 * cp.precision;
    notes.push_back(fmt::format("cheby {:.1e}", cheby_err));

    // global errors at T for successive halvings of dt
    const double big_t = 300.0;
    const auto reference = dense_evolution(g, v, psi.channels[0], big_t);
    const auto errors = [&](Method m, int order, std::vector<std::size_t> subs) {
        std::vector<double> e;
        for (std::size_t sub : subs) {
            const Trajectory tr = propagate(sys, psi, TimeGrid{big_t, 1, sub}, {}, {m, 1e-8, order});
            e.push_back(l2_diff(g, tr.final_state.channels[0], reference));
        }
        return e;
    };
    const auto ratios = [](const std::vector<double>& e) {
        std::vector<double> r;
        for (std::size_t i = 1; i < e.size(); ++i) r.push_back(e[i - 1] / e[i]);
        return r;
    };
    const auto check = [&](const char* name, const std::vector<double>& r, double lo, double hi) {
        std::string s;
        for (double x : r) {
            pass &= x >= lo && x <= hi;
            s += fmt::format("{}{:.2f}", s.empty() ? "" : "/", x);
        }
        notes.push_back(fmt::format("{} {} [{}, {}]", name, s, lo, hi));
    };
    check("strang", ratios(errors(Method::splitting, 3, {800, 1600, 3200, 6400})), 3.4, 4.6);
    check("trotter", ratios(errors(Method::splitting, 2, {800, 1600, 3200, 6400})), 1.7, 2.3);
    check("sod", ratios(errors(Method::sod, 3, {12800, 25600, 51200, 102400})), 3.4, 4.6);

    std::vector<double> drift;
    for (std::size_t sub : {1600u, 3200u, 6400u}) {
        const Trajectory tr = propagate(sys, psi, TimeGrid{big_t, 1, sub}, {}, {Method::sod, 1e-8, 3});
        drift.push_back(std::abs(tr.records.back().norm - 1.0));
    }
    check("sod-norm", ratios(drift), 6.0, 10.0);

    std::string d;
    for (const auto& n : notes) d += (d.empty() ? "" : "; ") + n;
    return {pass, d};
}

Outcome conical() {
    const RunSpec spec = parse_config(test::config_path("conical.toml"));
    const SystemSpec sys = build_system(spec);
    std::vector<double> lower;
    double worst_sum = 0.0;
    propagate(sys, build_initial(spec, sys), *spec.time, spec.pulses, spec.propa,
              [&](std::size_t, double, const WaveFunction& psi, const ExpectationRecord& r) {
                  // populations from the transformed wavefunction itself
                  const AdiabaticResult adi = adiabatic_transform(sys, psi);
                  double sum = 0.0;
                  std::vector<double> p(adi.psi.n_channels());
                  for (std::size_t c = 0; c < p.size(); ++c) {
                      for (std::size_t i = 0; i < sys.grid.size(); ++i)
                          p[c] += sys.grid.weights()[i] * std::norm(adi.psi.channels[c][i]);
                      sum += p[c];
                  }
                  worst_sum = std::max(worst_sum, std::abs(sum - r.norm * r.norm));
                  lower.push_back(p[0]);
              });
    // transition region: from 1% transfer up to the largest transfer
    std::size_t start = 0, peak = 0;
    while (start < lower.size() && lower[start] < 0.01) ++start;
    for (std::size_t k = 0; k < lower.size(); ++k)
        if (lower[k] > lower[peak]) peak = k;
    bool increasing = start < peak;
    for (std::size_t k = start + 1; k <= peak && k < lower.size(); ++k) increasing &= lower[k] > lower[k - 1];
    const bool pass = worst_sum <= 1e-9 && increasing;
    return {pass, fmt::format("|sum - norm^2| <= {:.1e} (1e-9); lower population {:.4f} -> {:.4f}, strictly "
                              "increasing over steps {}..{}: {}",
                              worst_sum, lower.front(), lower[peak], start, peak, increasing ? "yes" : "no")};
}

Outcome observable_identities() {
    bool pass = true;
    std::vector<std::string> notes;

    // Wigner marginals against |psi|^2 and a directly summed momentum density
    const Grid1D g = Grid1D::fft(64, -6.0, 6.0, 1.0);
    const std::size_t n = g.size();
    std::vector<cplx> psi = test::random_vector(n, 9);
    double nn = 0.0;
    for (std::size_t i = 0; i < n; ++i) nn += g.weights()[i] * std::norm(psi[i]);
    for (auto& z : psi) z /= std::sqrt(nn);
    const WignerResult w = wigner(g, psi);
    double pos = 0.0, mom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t m = 0; m < w.p.size(); ++m) s += w.w(i, m) * w.dp;
        pos = std::max(pos, std::abs(s - std::norm(psi[i])));
    }
    for (std::size_t m = 0; m < w.p.size(); ++m) {
        double s = 0.0;
        cplx phi = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += w.w(i, m) * w.dx;
            phi += psi[i] * std::exp(-I * w.p[m] * g.points()[i]);
        }
        phi *= g.spacing() / std::sqrt(2.0 * pi);
        mom = std::max(mom, std::abs(s - std::norm(phi)));
    }
    pass &= pos <= 1e-10 && mom <= 1e-10;
    notes.push_back(fmt::format("wigner marginals {:.1e}/{:.1e}", pos, mom));

    // Parseval
    const auto c = dvr_to_fbr(g, psi);
    double sc = 0.0;
    for (auto z : c) sc += std::norm(z);
    pass &= std::abs(sc - 1.0) <= 1e-12;
    notes.push_back(fmt::format("parseval {:.1e}", std::abs(sc - 1.0)));

    // flux of a moving Gaussian integrates to k0 / M
    {
        const double mass = 2.5, k0 = 1.3;
        const Grid1D h = Grid1D::fft(128, -10.0, 10.0, mass);
        const SystemSpec sys = assemble(ProductGrid({h}), OperatorSpecs{});
        WaveFunction gauss({init_gauss(h, 0.4, 0.9, k0)});
        normalize(sys.grid, gauss);
        const auto j = flux(sys, gauss)[0];
        double total = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) total += h.weights()[i] * j[i];
        pass &= std::abs(total - k0 / mass) <= 1e-8;
        notes.push_back(fmt::format("flux {:.1e}", std::abs(total - k0 / mass)));
    }

    // product-state purity
    {
        const ProductGrid pg({Grid1D::fft(12, -3, 3, 1), Grid1D::hermite(7, 1, 1, 0), Grid1D::legendre(5, 1, 1, 0)});
        const WaveFunction prod = product_state(
            pg, 2, {test::random_vector(12, 1), test::random_vector(7, 2), test::random_vector(5, 3)}, 1);
        double worst = 0.0;
        for (std::size_t k = 0; k < 3; ++k) worst = std::max(worst, std::abs(reduced_density(pg, prod, k).purity - 1.0));
        pass &= worst <= 1e-10;
        notes.push_back(fmt::format("purity {:.1e}", worst));
    }

    // split-operator steps with fields keep the norm
    {
        OperatorSpecs ops;
        ops.n_channels = 2;
        ops.pot[{0, 0}] = {Term{oh, 0}};
        ops.pot[{1, 1}] = {Term{TaylorParams{{0.05, 0.0, 0.02}, 2.5}, 0}};
        ops.dip[{0, 0}] = {Term{MeckeParams{1.6343157, 1.1338359}, 0}};
        ops.dip[{0, 1}] = {Term{TaylorParams{{0.3, 0.1}, 1.8}, 0}};
        const SystemSpec sys = assemble(ProductGrid({Grid1D::fft(64, 0.7, 10.0, oh_mass)}), ops);
        WaveFunction s({test::random_vector(64, 4), test::random_vector(64, 5)});
        normalize(sys.grid, s);
        const PulseSet pulses{Pulse{PulseShape::gauss, 50.0, 40.0, 0.05, 0.0156017, 0.0, 0.0, 0.0, {}}};
        double worst = 0.0;
        for (int order : {2, 3}) {
            const SplitPropagator sp(sys, 1.0, order);
            WaveFunction x = s;
            for (int k = 0; k < 100; ++k) {
                const double before = norm(sys.grid, x);
                sp.step(x, static_cast<double>(k), pulses);
                worst = std::max(worst, std::abs(norm(sys.grid, x) - before));
            }
        }
        pass &= worst <= 1e-12;
        notes.push_back(fmt::format("split norm/step {:.1e}", worst));
    }

    std::string d;
    for (const auto& x : notes) d += (d.empty() ? "" : "; ") + x;
    return {pass, d};
}

int run_cli(const std::string& args, const fs::path& stderr_file) {
    const std::string cmd = fmt::format("\"{}\" {} >/dev/null 2>\"{}\"", QDK_CLI, args, stderr_file.string());
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome plumbing() {
    test::TempDir dir("acceptance_cli");
    bool pass = true;
    std::vector<std::string> notes;

    // configuration errors: exit 2 naming file, line and key
    test::write_file(dir / "bad.toml", "[space.dof.1]\ntype = \"fft\"\nmass = 1.0\nn_pts = 8\nx_min = 0\nx_max = 1\n"
                                       "colour = 3\n");
    const int bad = run_cli(fmt::format("bound --config \"{}\"", (dir / "bad.toml").string()), dir / "bad.err");
    const std::string err = test::read_file(dir / "bad.err");
    const bool diag = err.find("bad.toml:7:") != std::string::npos && err.find("space.dof.1.colour") != std::string::npos;
    test::write_file(dir / "empty.toml", "");
    const int empty = run_cli(fmt::format("bound --config \"{}\"", (dir / "empty.toml").string()), dir / "empty.err");
    pass &= bad == 2 && diag && empty == 2;
    notes.push_back(fmt::format("config errors exit {}/{}, field diagnostic {}", bad, empty, diag ? "yes" : "no"));

    // deterministic CSV with one thread
    std::string csv[2];
    for (int k = 0; k < 2; ++k) {
        const fs::path out = dir / fmt::format("run{}", k);
        const int rc = run_cli(fmt::format("propa --config \"{}\" --out-dir \"{}\" --threads 1 --no-frames",
                                           test::config_path("revival.toml").string(), out.string()),
                               dir / "run.err");
        pass &= rc == 0;
        csv[k] = test::read_file(out / "expect.csv");
    }
    const bool same = !csv[0].empty() && csv[0] == csv[1];
    pass &= same;
    notes.push_back(fmt::format("expect.csv identical over two runs: {}", same ? "yes" : "no"));

    // checkpoint round trip: the stored final state is the propagated one, bit for bit
    const RunSpec spec = parse_config(test::config_path("revival.toml"));
    const SystemSpec sys = build_system(spec);
    const Trajectory tr = propagate(sys, build_initial(spec, sys), *spec.time, spec.pulses, spec.propa);
    const Checkpoint c = load_checkpoint(dir / "run0" / (spec.save.file + ".qwp"));
    const auto& last = c.frames.back().psi.channels[0];
    const auto& want = tr.final_state.channels[0];
    const bool bitwise = c.frames.size() == tr.records.size() && last.size() == want.size() &&
                         std::memcmp(last.data(), want.data(), want.size() * sizeof(cplx)) == 0;
    pass &= bitwise;
    notes.push_back(fmt::format("checkpoint {} payloads, final state bitwise equal: {}", c.frames.size(),
                                bitwise ? "yes" : "no"));

    std::string d;
    for (const auto& x : notes) d += (d.empty() ? "" : "; ") + x;
    return {pass, d};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"Morse bound states", bound_states},
        {"hermite grid exactness", hermite_exactness},
        {"Chebychev truncation counts", chebychev_counts},
        {"wavepacket revival", revival},
        {"vibrational ladder climbing", ladder},
        {"imaginary-time relaxation", relaxation},
        {"propagator cross-validation", cross_validation},
        {"conical intersection", conical},
        {"observable identities", observable_identities},
        {"plumbing", plumbing},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << fmt::format("{} criterion {:2d} ({}): {}", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                                 o.detail)
                  << std::endl;
    }
    std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
    return failed == 0 ? 0 : 1;
}

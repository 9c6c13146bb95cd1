#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <sstream>

#include <fmt/format.h>

#include "qdynkit/checkpoint.hpp"
#include "qdynkit/error.hpp"
#include "qdynkit/frames.hpp"
#include "qdynkit/runner.hpp"
#include "test_util.hpp"

using namespace qdk;
namespace fs = std::filesystem;

namespace {

// Harmonic well with a linear dipole, driven by a short pulse.
const std::string driven = R"(
[space.dof.1]
type  = "fft"
mass  = 1.0
n_pts = 64
x_min = -8.0
x_max = 8.0

[hamilt.pot.1.1]
model  = "taylor"
coeffs = [0.0, 0.0, 1.0]

[hamilt.dip.1.1]
model  = "taylor"
coeffs = [0.0, 1.0]

[psi.init.dof.1]
model = "gauss"
pos_0 = 0.5
width = 0.8

[psi.save]
export = true

[time.propa]
handle = "splitting"

[time.main]
delta = 0.2
stop  = 12

[time.sub]
n = 4

[time.efield]
shape = "gauss"
delay = 1.0
fwhm  = 1.0
ampli = 0.3
frequ = 1.0
)";

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

bool bitwise_equal(const WaveFunction& a, const WaveFunction& b) {
    if (a.n_channels() != b.n_channels()) return false;
    for (std::size_t c = 0; c < a.n_channels(); ++c)
        if (a.channels[c].size() != b.channels[c].size() ||
            std::memcmp(a.channels[c].data(), b.channels[c].data(), a.channels[c].size() * sizeof(cplx)) != 0)
            return false;
    return true;
}

RunOptions quiet(const fs::path& out) {
    RunOptions o;
    o.out_dir = out;
    o.console = false;
    return o;
}

} // namespace

TEST_CASE("bound run writes one row and one checkpoint payload per state") {
    test::TempDir dir("run_bound");
    RunSpec spec = parse_config(test::config_path("morse_bound.toml"));
    spec.plots.density_type = "";
    const RunResult r = run_bound(spec, quiet(dir.path()));

    const auto rows = lines(test::read_file(dir / "expect.csv"));
    REQUIRE(rows.size() == 23);
    CHECK(rows[0].rfind("state,energy,norm", 0) == 0);
    CHECK(fs::exists(dir / "morse_bound.log"));

    const Checkpoint c = load_checkpoint(dir / "morse_bound.qwp");
    CHECK(c.header.run == "bound");
    REQUIRE(c.frames.size() == 22);
    for (std::size_t v = 0; v < 22; ++v) {
        CHECK(c.frames[v].step == v);
        CHECK(c.frames[v].t == r.scalars.at(fmt::format("energy.{}", v)));
    }
    // the header carries a config that parses again
    CHECK_NOTHROW(parse_config_string(c.header.config, test::config_path("morse_bound.toml")));
}

TEST_CASE("propagation checkpoint holds the exact propagated states") {
    test::TempDir dir("run_propa");
    const RunSpec spec = parse_config_string(driven, dir / "driven.toml");
    run_propa(spec, quiet(dir.path()));

    const SystemSpec sys = build_system(spec);
    const Trajectory tr = propagate(sys, build_initial(spec, sys), *spec.time, spec.pulses, spec.propa);
    const Checkpoint c = load_checkpoint(dir / "driven.qwp");
    REQUIRE(c.frames.size() == 13);
    CHECK(c.frames.back().step == 12);
    CHECK(c.frames.back().t == doctest::Approx(2.4).epsilon(1e-14));
    CHECK(bitwise_equal(c.frames.back().psi, tr.final_state));

    const auto rows = lines(test::read_file(dir / "expect.csv"));
    CHECK(rows.size() == 14);
    CHECK(rows[0].find("acf_abs") != std::string::npos);
    CHECK(fs::exists(dir / "spectrum.csv"));
}

TEST_CASE("runs are deterministic") {
    test::TempDir a("run_det_a"), b("run_det_b");
    const RunSpec spec = parse_config_string(driven, a / "driven.toml");
    run_propa(spec, quiet(a.path()));
    run_propa(spec, quiet(b.path()));
    CHECK(test::read_file(a / "expect.csv") == test::read_file(b / "expect.csv"));
    CHECK(test::read_file(a / "driven_0.qwp") == test::read_file(b / "driven_0.qwp"));
}

TEST_CASE("a sweep point reproduces the single run") {
    test::TempDir dir("run_sweep");
    const std::string text = driven + "[sweep]\nparameter = \"time.efield.ampli\"\nvalues = [\"0.3\", \"0.1\"]\n";
    const RunSpec spec = parse_config_string(text, dir / "sw.toml");
    RunOptions o = quiet(dir.path());
    o.threads = 2;
    CHECK(run_sweep(spec, o) == 0);

    test::TempDir single("run_single");
    const RunResult r = run_propa(parse_config_string(driven, single / "driven.toml"), quiet(single.path()));

    const auto rows = lines(test::read_file(dir / "sweep.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "index,time.efield.ampli,total,status\r");
    CHECK(rows[1] == "1,0.3," + CsvWriter::number(r.scalars.at("total")) + ",ok\r");
    CHECK(rows[2].rfind("2,0.1,", 0) == 0);
    CHECK(fs::exists(dir / "sweep_1" / "expect.csv"));
    CHECK(test::read_file(dir / "sweep_1" / "expect.csv") == test::read_file(single / "expect.csv"));
}

TEST_CASE("failed sweep points are reported, not fatal") {
    test::TempDir dir("run_sweep_bad");
    const std::string text = driven + "[sweep]\nparameter = \"space.dof.1.n_pts\"\nvalues = [\"32\", \"-4\"]\n";
    const RunSpec spec = parse_config_string(text, dir / "sw.toml");
    CHECK(run_sweep(spec, quiet(dir.path())) == 1);
    const auto rows = lines(test::read_file(dir / "sweep.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].find(",ok") != std::string::npos);
    CHECK(rows[2].find("error (exit 2)") != std::string::npos);

    const std::string unknown = driven + "[sweep]\nparameter = \"time.efield.ampli\"\nvalues = [\"1\"]\noutput = \"nope\"\n";
    CHECK_THROWS_AS(run_sweep(parse_config_string(unknown, dir / "u.toml"), quiet(dir.path())), ConfigError);
}

TEST_CASE("replay renders reduced frames from a checkpoint") {
    test::TempDir dir("run_replay");
    const std::string two = R"(
[space.dof.1]
type  = "fft"
mass  = 1.0
n_pts = 16
x_min = -5.0
x_max = 5.0
[space.dof.2]
type  = "fft"
mass  = 2.0
n_pts = 12
x_min = -4.0
x_max = 4.0
[hamilt.pot.1.1]
model  = "taylor"
coeffs = [0.0, 0.0, 1.0]
[psi.init.dof.1]
model = "gauss"
pos_0 = 1.0
width = 0.7
[psi.init.dof.2]
model = "gauss"
pos_0 = 0.0
width = 0.6
[psi.save]
export = true
[time.propa]
handle = "cheby_real"
[time.main]
delta = 0.3
stop  = 3
)";
    const RunSpec spec = parse_config_string(two, dir / "two.toml");
    run_propa(spec, quiet(dir.path()));
    RunOptions o = quiet(dir.path());
    o.replay_kind = "reduced";
    o.frames = false;
    run_replay(spec, o);

    for (int step = 0; step <= 3; ++step)
        for (int k = 1; k <= 2; ++k) {
            const auto p = dir / "frames" / fmt::format("reduced_{}_{}.qwf", k, step);
            REQUIRE(fs::exists(p));
            CHECK_FALSE(fs::exists(fs::path(p).replace_extension(".png")));
        }
    const Frame f = read_frame(dir / "frames" / "reduced_2_3.qwf");
    CHECK(f.shape == std::vector<std::size_t>{12, 12});
    // dof 1 only feels a potential; the product stays separable, tr(rho^2) = 1
    double purity2 = 0.0;
    for (double v : f.data) purity2 += v * v;
    CHECK(purity2 == doctest::Approx(1.0).epsilon(1e-10));
    const auto purity = lines(test::read_file(dir / "frames" / "reduced_purity.csv"));
    CHECK(purity.size() == 5);

    o.replay_kind = "curve";
    CHECK_THROWS_AS(run_replay(spec, o), ConfigError);
}

TEST_CASE("output directory precedence") {
    RunSpec spec = parse_config_string(driven, "/cfg/driven.toml");
    RunOptions o;
    ::unsetenv("QDYNKIT_OUT");
    CHECK(resolve_out_dir(spec, o) == fs::path("."));
    ::setenv("QDYNKIT_OUT", "/env/out", 1);
    CHECK(resolve_out_dir(spec, o) == fs::path("/env/out"));
    spec.out_dir = "results";
    CHECK(resolve_out_dir(spec, o) == fs::path("/cfg/results"));
    o.out_dir = "/flag";
    CHECK(resolve_out_dir(spec, o) == fs::path("/flag"));
    ::unsetenv("QDYNKIT_OUT");
}

TEST_CASE("exit codes") {
    CHECK(exit_code(ConfigError("x")) == 2);
    CHECK(exit_code(RangeError("x")) == 2);
    CHECK(exit_code(ShapeError("x")) == 2);
    CHECK(exit_code(UnsupportedError("x")) == 2);
    CHECK(exit_code(ResourceError("x")) == 2);
    CHECK(exit_code(NumericError("x")) == 3);
    CHECK(exit_code(std::runtime_error("x")) == 3);
    CHECK(exit_code(IoError("x")) == 4);
    CHECK(exit_code(fs::filesystem_error("x", std::make_error_code(std::errc::permission_denied))) == 4);
}

TEST_CASE("run_command maps errors to exit codes") {
    test::TempDir dir("run_cmd");
    test::write_file(dir / "empty.toml", "");
    CHECK(run_command(Command::bound, dir / "empty.toml", quiet(dir.path())) == 2);
    CHECK(run_command(Command::bound, dir / "missing.toml", quiet(dir.path())) == 4);
    test::write_file(dir / "notime.toml", "[space.dof.1]\nmass = 1\nn_pts = 8\nx_min = 0\nx_max = 1\n");
    CHECK(run_command(Command::propa, dir / "notime.toml", quiet(dir.path())) == 2);
    CHECK(command_from_string("relax") == Command::relax);
    CHECK(to_string(Command::sweep) == "sweep");
}

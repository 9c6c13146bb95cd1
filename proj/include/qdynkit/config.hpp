#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qdynkit/grids.hpp"
#include "qdynkit/propagators.hpp"
#include "qdynkit/stationary.hpp"
#include "qdynkit/system.hpp"

namespace qdk {

struct DofConfig {
    GridKind kind = GridKind::fft;
    std::size_t n_pts = 0;
    double mass = 1.0;
    // fft
    double x_min = 0.0, x_max = 0.0;
    // hermite
    double omega = 0.0, r_e = 0.0;
    // legendre
    double radius = 1.0;
    int m_0 = 0;
};

Grid1D make_grid(const DofConfig& d);

struct InitDof {
    enum class Kind { gauss, morse } kind = Kind::gauss;
    double pos_0 = 0.0, width = 1.0, momentum_0 = 0.0;
    MorseParams morse;
    std::size_t n = 0;
};

struct InitConfig {
    std::vector<InitDof> dofs;
    /// 0-based channel holding the product state.
    std::size_t channel = 0;
    /// The channel index refers to the adiabatic states.
    bool adiabatic = false;
};

struct EigenConfig {
    std::size_t stop = 0;
    EigenOptions options;
};

struct SaveConfig {
    bool export_ = false;
    /// Relative to the output directory.
    std::string dir = ".";
    /// Checkpoint stem; defaults to the run stem.
    std::string file;
};

struct PlotConfig {
    /// Frame kind: curve, wigner, flux, reduced, density. Empty: no frames.
    std::string density_type;
    /// "dvr" or "fbr" (curve and density frames).
    std::string representation = "dvr";
    bool png = true;
    bool spectrum = true;
    bool hann = true;
};

struct SweepConfig {
    /// Dotted config path of the swept key, e.g. "time.efield.ampli".
    std::string parameter;
    std::vector<std::string> values;
    /// Scalar reported per point (see run_scalars()).
    std::string output = "total";
    /// bound, propa or relax.
    std::string run = "propa";
};

/// Fully validated job description. Channel and dof indices are 0-based here
/// and 1-based in the config file.
struct RunSpec {
    std::filesystem::path source;
    std::vector<DofConfig> dofs;
    OperatorSpecs ops;
    std::optional<double> truncate_delta_e;
    InitConfig init;
    std::optional<EigenConfig> eigen;
    PropagatorConfig propa;
    RelaxOptions relax;
    std::optional<TimeGrid> time;
    PulseSet pulses;
    SaveConfig save;
    PlotConfig plots;
    /// Run stem for <stem>.log; defaults to the config file stem.
    std::string stem = "qdynkit";
    /// Output directory from the config ("" if unset).
    std::string out_dir;
    std::optional<SweepConfig> sweep;

    /// Parsed document, kept for sweeps. Opaque outside config.cpp.
    std::shared_ptr<const void> document;
};

/// Reads and validates a config file. ConfigError messages name the file,
/// line and dotted key.
RunSpec parse_config(const std::filesystem::path& path);
RunSpec parse_config_string(const std::string& text, const std::filesystem::path& source);

/// A copy of `spec` with the dotted key replaced by `value` (number or unit
/// string) and revalidated. Path segments may index arrays (1-based).
RunSpec override_value(const RunSpec& spec, const std::string& dotted, const std::string& value);

/// Resolved configuration with every default filled in, as TOML text. Parsing
/// it yields the same RunSpec.
std::string echo(const RunSpec& spec);

SystemSpec build_system(const RunSpec& spec);
/// Normalized initial state; adiabatic starts are transformed to the
/// diabatic channels.
WaveFunction build_initial(const RunSpec& spec, const SystemSpec& sys);

} // namespace qdk

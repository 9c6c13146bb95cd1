#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qdynkit/system.hpp"

namespace qdk {

enum class FrameKind { curve, wigner, flux, reduced, density };
std::string to_string(FrameKind k);
FrameKind frame_kind_from_string(const std::string& s);

/// Throws ConfigError if the kind does not apply to the grid:
/// curve and wigner need one dof (wigner: fft), flux one or two fft dofs,
/// density two or three dofs; reduced works for any number.
void check_frame_kind(FrameKind kind, const ProductGrid& grid);

/// One data frame. `data` is row-major over `shape` with interleaved real and
/// imaginary parts when `complex` is set.
///
/// curve:   complex, shape (nu, N); channel amplitudes in the DVR, or FBR
///          coefficients (fft: ordered by ascending momentum).
/// wigner:  real, shape (N, 2N), summed over channels; axes x and p.
/// flux:    real, shape (N) for one dof, (2, N1, N2) for two.
/// density: real, shape of the grid; sum over channels of |psi|^2 (DVR) or
///          |FBR coefficient|^2.
/// reduced: complex, shape (N_k, N_k), one frame per dof; `purity` set.
struct Frame {
    std::string name;
    std::uint64_t step = 0;
    double t = 0.0;
    std::vector<std::size_t> shape;
    std::vector<std::vector<double>> axes;
    bool complex = false;
    std::vector<double> data;
    std::optional<double> purity;
};

std::vector<Frame> make_frames(FrameKind kind, const SystemSpec& sys, const WaveFunction& psi,
                               std::uint64_t step, double t, bool fbr = false);

/// Binary frame: magic "QWF1", u32 version, name, u64 step, f64 t, u32 rank,
/// u64 shape[rank], the axis values of each dimension, u8 complex flag, data.
/// Little-endian throughout.
void write_frame(const std::filesystem::path& path, const Frame& frame);
Frame read_frame(const std::filesystem::path& path);

/// Raster rendering. Complex data: hue encodes the phase, brightness the
/// magnitude. Real data: a diverging blue-white-red map when the data change
/// sign, a dark-to-bright sequential map otherwise. Curves are drawn as phase
/// colored bars; 3-D densities are shown as a maximum projection.
void write_png(const std::filesystem::path& path, const Frame& frame);

} // namespace qdk

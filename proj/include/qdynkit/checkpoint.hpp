#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "qdynkit/config.hpp"
#include "qdynkit/system.hpp"

namespace qdk {

/// Largest chunk file written by CheckpointWriter.
inline constexpr std::uint64_t checkpoint_chunk_limit = std::uint64_t{64} << 20;
inline constexpr std::uint32_t checkpoint_version = 1;

/// Contents of <stem>.qwp. Payloads live in <stem>_0.qwp, <stem>_1.qwp, ...
///
/// All files start with the magic "QWP1", a u32 version and a u32 file type
/// (0 header, 1 chunk). Integers are little-endian, reals IEEE-754 doubles,
/// tensors row-major with interleaved real and imaginary parts.
struct CheckpointHeader {
    /// "propa", "bound" or "relax".
    std::string run;
    /// Resolved config echo of the run.
    std::string config;
    std::vector<DofConfig> dofs;
    std::size_t n_channels = 1;
};

/// Bound runs store the energy of each state in `t`.
struct CheckpointFrame {
    std::uint64_t step = 0;
    double t = 0.0;
    WaveFunction psi;
};

DofConfig dof_config(const Grid1D& grid);
ProductGrid checkpoint_grid(const CheckpointHeader& h);

class CheckpointWriter {
public:
    /// Writes <dir>/<stem>.qwp and removes stale chunks of an earlier run.
    CheckpointWriter(std::filesystem::path dir, std::string stem, CheckpointHeader header,
                     std::uint64_t chunk_limit = checkpoint_chunk_limit);

    /// Appends one payload and flushes. Steps must increase strictly.
    void write(std::uint64_t step, double t, const WaveFunction& psi);
    std::size_t chunks_written() const { return chunk_index_; }

private:
    void open_chunk();

    std::filesystem::path dir_;
    std::string stem_;
    CheckpointHeader header_;
    std::size_t grid_size_ = 0;
    std::uint64_t limit_;
    std::ofstream chunk_;
    std::uint64_t chunk_bytes_ = 0;
    std::size_t chunk_index_ = 0;
    std::optional<std::uint64_t> last_step_;
};

/// Streams the payloads of a checkpoint in order. Throws IoError naming the
/// offending file on truncation, bad magic, unsupported version, a shape
/// that differs from the header or non-increasing steps.
class CheckpointReader {
public:
    /// `header_path` is the <stem>.qwp file.
    explicit CheckpointReader(const std::filesystem::path& header_path);

    const CheckpointHeader& header() const { return header_; }
    std::optional<CheckpointFrame> next();

private:
    bool open_next_chunk();

    std::filesystem::path dir_;
    std::string stem_;
    CheckpointHeader header_;
    std::size_t grid_size_ = 0;
    std::ifstream chunk_;
    std::filesystem::path chunk_path_;
    std::size_t chunk_index_ = 0;
    bool done_ = false;
    std::optional<std::uint64_t> last_step_;
};

struct Checkpoint {
    CheckpointHeader header;
    std::vector<CheckpointFrame> frames;
};

Checkpoint load_checkpoint(const std::filesystem::path& header_path);

} // namespace qdk

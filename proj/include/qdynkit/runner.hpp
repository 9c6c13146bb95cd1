#pragma once

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdynkit/config.hpp"

namespace qdk {

/// RFC-4180 CSV with a header row, CRLF line ends and 17 significant digits.
/// Rows are flushed as they are written.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& fields);

    static std::string number(double v);
    static std::string quote(const std::string& field);

private:
    std::ofstream out_;
    std::filesystem::path path_;
    std::size_t n_cols_;
};

enum class Command { bound, propa, relax, sweep, replay };
std::string to_string(Command c);
Command command_from_string(const std::string& s);

struct RunOptions {
    /// Overrides [output] dir and QDYNKIT_OUT.
    std::optional<std::filesystem::path> out_dir;
    /// Concurrent sweep points.
    unsigned threads = 1;
    bool frames = true;
    /// Mirror log messages to stdout/stderr.
    bool console = true;
    // replay overrides
    std::optional<std::string> replay_kind;
    std::optional<std::filesystem::path> checkpoint;
};

/// Named scalar results of a run (see the README for the names).
struct RunResult {
    std::map<std::string, double> scalars;
};

/// --out-dir, else [output] dir, else $QDYNKIT_OUT, else ".".
std::filesystem::path resolve_out_dir(const RunSpec& spec, const RunOptions& opts);

RunResult run_bound(const RunSpec& spec, const RunOptions& opts);
RunResult run_propa(const RunSpec& spec, const RunOptions& opts);
RunResult run_relax(const RunSpec& spec, const RunOptions& opts);
/// Returns the number of failed points.
std::size_t run_sweep(const RunSpec& spec, const RunOptions& opts);
void run_replay(const RunSpec& spec, const RunOptions& opts);

/// Process exit code for an exception: 2 configuration (ConfigError,
/// RangeError, ShapeError, UnsupportedError, ResourceError), 3 numeric and
/// anything else, 4 I/O.
int exit_code(const std::exception& e);

/// Parses the config and runs the command; errors are reported on stderr and
/// mapped to exit codes.
int run_command(Command cmd, const std::filesystem::path& config, const RunOptions& opts);

} // namespace qdk

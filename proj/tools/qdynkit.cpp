#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qdynkit/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qdynkit: grid-based quantum dynamics from declarative config files"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    unsigned threads = 1;
    bool no_frames = false;
    std::string kind;
    std::string checkpoint;

    const std::pair<qdk::Command, const char*> commands[] = {
        {qdk::Command::bound, "bound states by diagonalization"},
        {qdk::Command::propa, "time propagation"},
        {qdk::Command::relax, "ground state by imaginary-time relaxation"},
        {qdk::Command::sweep, "repeated runs over the values of one config key"},
        {qdk::Command::replay, "frames from saved wavefunctions"},
    };
    for (const auto& [cmd, help] : commands) {
        CLI::App* sub = app.add_subcommand(qdk::to_string(cmd), help);
        sub->add_option("--config", config, "config file (TOML)")->required();
        sub->add_option("--out-dir", out_dir, "output directory (default: [output] dir, then $QDYNKIT_OUT, then .)");
        sub->add_option("--threads", threads, "concurrent sweep points")->check(CLI::PositiveNumber);
        sub->add_flag("--no-frames", no_frames, "skip frame output (replay: skip PNG rasters)");
        if (cmd == qdk::Command::replay) {
            sub->add_option("--kind", kind, "frame kind: curve, wigner, flux, reduced, density");
            sub->add_option("--checkpoint", checkpoint, "checkpoint header <stem>.qwp");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    qdk::RunOptions opts;
    if (!out_dir.empty()) opts.out_dir = out_dir;
    opts.threads = threads;
    opts.frames = !no_frames;
    if (!kind.empty()) opts.replay_kind = kind;
    if (!checkpoint.empty()) opts.checkpoint = checkpoint;

    const auto cmd = qdk::command_from_string(app.get_subcommands().front()->get_name());
    return qdk::run_command(cmd, config, opts);
}

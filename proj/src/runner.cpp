#include "qdynkit/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "qdynkit/checkpoint.hpp"
#include "qdynkit/error.hpp"
#include "qdynkit/frames.hpp"
#include "qdynkit/log.hpp"
#include "qdynkit/observe.hpp"

namespace qdk {

// ---------------------------------------------------------------- CSV

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), n_cols_(header.size()) {
    if (!out_) throw IoError("cannot write '" + path.string() + "'");
    row(header);
}

std::string CsvWriter::number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", v);
}

std::string CsvWriter::quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string q = "\"";
    for (char c : field) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    if (fields.size() != n_cols_)
        throw ShapeError(fmt::format("CSV row with {} fields, header has {}", fields.size(), n_cols_));
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << quote(fields[i]);
    }
    out_ << "\r\n";
    out_.flush();
    if (!out_) throw IoError("write to '" + path_.string() + "' failed");
}

// ---------------------------------------------------------------- commands

std::string to_string(Command c) {
    switch (c) {
    case Command::bound: return "bound";
    case Command::propa: return "propa";
    case Command::relax: return "relax";
    case Command::sweep: return "sweep";
    default: return "replay";
    }
}

Command command_from_string(const std::string& s) {
    if (s == "bound") return Command::bound;
    if (s == "propa") return Command::propa;
    if (s == "relax") return Command::relax;
    if (s == "sweep") return Command::sweep;
    if (s == "replay") return Command::replay;
    throw ConfigError("unknown command '" + s + "' (valid: bound, propa, relax, sweep, replay)");
}

std::filesystem::path resolve_out_dir(const RunSpec& spec, const RunOptions& opts) {
    if (opts.out_dir) return *opts.out_dir;
    if (!spec.out_dir.empty()) {
        std::filesystem::path p = spec.out_dir;
        return p.is_relative() ? spec.source.parent_path() / p : p;
    }
    if (const char* env = std::getenv("QDYNKIT_OUT"); env && *env) return env;
    return ".";
}

int exit_code(const std::exception& e) {
    if (dynamic_cast<const IoError*>(&e)) return 4;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const RangeError*>(&e) ||
        dynamic_cast<const ShapeError*>(&e) || dynamic_cast<const UnsupportedError*>(&e) ||
        dynamic_cast<const ResourceError*>(&e))
        return 2;
    if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return 4;
    return 3;
}

namespace {

std::mutex console_mutex;

/// Installs a thread sink that writes every message to <stem>.log and, if
/// requested, to the console.
class RunLog {
public:
    RunLog(const std::filesystem::path& path, bool console) : file_(path, std::ios::trunc), console_(console) {
        if (!file_) throw IoError("cannot write log file '" + path.string() + "'");
        previous_ = log::set_thread_sink([this](log::Level level, const std::string& msg) { write(level, msg); });
    }
    ~RunLog() { log::set_thread_sink(std::move(previous_)); }
    RunLog(const RunLog&) = delete;
    RunLog& operator=(const RunLog&) = delete;

    void file_only(const std::string& text) {
        file_ << text;
        if (!text.empty() && text.back() != '\n') file_ << '\n';
        file_.flush();
    }

private:
    void write(log::Level level, const std::string& msg) {
        const std::string line = level == log::Level::warn ? "warning: " + msg : msg;
        file_ << line << '\n';
        file_.flush();
        if (console_) {
            std::lock_guard lock(console_mutex);
            (level == log::Level::warn ? std::cerr : std::cout) << line << std::endl;
        }
    }

    std::ofstream file_;
    bool console_;
    log::Sink previous_;
};

std::filesystem::path prepare_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

/// Opens the run log, echoes the resolved config and logs errors before
/// passing them on.
template <class Fn>
auto logged_run(const RunSpec& spec, const RunOptions& opts, const std::string& what, Fn&& fn) {
    const auto out = prepare_dir(resolve_out_dir(spec, opts));
    RunLog log_file(out / (spec.stem + ".log"), opts.console);
    log_file.file_only(fmt::format("# qdynkit {} run, config {}\n# resolved configuration:\n{}", what,
                                   spec.source.string(), echo(spec)));
    try {
        return fn(out, log_file);
    } catch (const std::exception& e) {
        log_file.file_only(fmt::format("error: run aborted (exit code {}): {}", exit_code(e), e.what()));
        throw;
    }
}

std::string n(double v) { return CsvWriter::number(v); }

/// Writes frames (and PNG rasters) under <out>/frames; reduced frames also
/// append to reduced_purity.csv.
class FrameSink {
public:
    FrameSink(const RunSpec& spec, const RunOptions& opts, const std::filesystem::path& out, const ProductGrid& grid,
              std::optional<std::string> kind_override = std::nullopt, bool png_allowed = true) {
        const std::string kind = kind_override.value_or(spec.plots.density_type);
        if (kind.empty() || (!opts.frames && !kind_override)) return;
        kind_ = frame_kind_from_string(kind);
        check_frame_kind(*kind_, grid);
        dir_ = prepare_dir(out / "frames");
        fbr_ = spec.plots.representation == "fbr";
        png_ = spec.plots.png && png_allowed;
        if (*kind_ == FrameKind::reduced) {
            std::vector<std::string> h{"step", "t"};
            for (std::size_t k = 0; k < grid.n_dofs(); ++k) h.push_back(fmt::format("purity_{}", k + 1));
            purity_.emplace(dir_ / "reduced_purity.csv", h);
        }
    }

    bool active() const { return kind_.has_value(); }

    void emit(const SystemSpec& sys, const WaveFunction& psi, std::uint64_t step, double t) {
        if (!kind_) return;
        const auto frames = make_frames(*kind_, sys, psi, step, t, fbr_);
        std::vector<std::string> row{std::to_string(step), n(t)};
        for (const auto& f : frames) {
            const auto base = dir_ / fmt::format("{}_{}", f.name, step);
            write_frame(base.string() + ".qwf", f);
            if (png_) write_png(base.string() + ".png", f);
            if (f.purity) row.push_back(n(*f.purity));
        }
        if (purity_) purity_->row(row);
    }

private:
    std::optional<FrameKind> kind_;
    std::filesystem::path dir_;
    bool fbr_ = false;
    bool png_ = true;
    std::optional<CsvWriter> purity_;
};

std::optional<CheckpointWriter> open_checkpoint(const RunSpec& spec, const std::filesystem::path& out,
                                                const SystemSpec& sys, const std::string& run) {
    if (!spec.save.export_) return std::nullopt;
    CheckpointHeader h;
    h.run = run;
    h.config = echo(spec);
    for (const auto& g : sys.grid.dofs()) h.dofs.push_back(dof_config(g));
    h.n_channels = sys.n_channels;
    std::filesystem::path dir = spec.save.dir;
    return CheckpointWriter(dir.is_relative() ? out / dir : dir, spec.save.file, std::move(h));
}

const TimeGrid& require_time(const RunSpec& spec, const std::string& run) {
    if (!spec.time)
        throw ConfigError(spec.source.string() + ": time.main: missing required section for " + run +
                          " (delta and stop)");
    return *spec.time;
}

void require_init(const RunSpec& spec, const std::string& run) {
    if (spec.init.dofs.empty())
        throw ConfigError(spec.source.string() + ": psi.init: missing required section for " + run);
}

std::vector<std::string> record_header(const SystemSpec& sys) {
    std::vector<std::string> h{"norm"};
    for (std::size_t c = 0; c < sys.n_channels; ++c) h.push_back(fmt::format("population_{}", c + 1));
    if (sys.n_channels > 1)
        for (std::size_t c = 0; c < sys.n_channels; ++c) h.push_back(fmt::format("adiabatic_{}", c + 1));
    for (std::size_t k = 0; k < sys.grid.n_dofs(); ++k) {
        h.push_back(fmt::format("position_{}", k + 1));
        h.push_back(fmt::format("position_unc_{}", k + 1));
        h.push_back(fmt::format("momentum_{}", k + 1));
        h.push_back(fmt::format("momentum_unc_{}", k + 1));
    }
    for (const char* s : {"potential", "kinetic", "dipole", "total"}) h.emplace_back(s);
    return h;
}

void record_fields(const ExpectationRecord& r, std::vector<std::string>& row) {
    row.push_back(n(r.norm));
    for (double p : r.populations) row.push_back(n(p));
    for (double p : r.adiabatic_populations) row.push_back(n(p));
    for (std::size_t k = 0; k < r.position.size(); ++k) {
        row.push_back(n(r.position[k]));
        row.push_back(n(r.position_unc[k]));
        row.push_back(n(r.momentum[k]));
        row.push_back(n(r.momentum_unc[k]));
    }
    for (double v : {r.potential, r.kinetic, r.dipole, r.total}) row.push_back(n(v));
}

void record_scalars(const ExpectationRecord& r, RunResult& res) {
    res.scalars["norm"] = r.norm;
    res.scalars["total"] = r.total;
    res.scalars["potential"] = r.potential;
    res.scalars["kinetic"] = r.kinetic;
    res.scalars["dipole"] = r.dipole;
    res.scalars["acf"] = std::abs(r.autocorrelation);
    for (std::size_t c = 0; c < r.populations.size(); ++c)
        res.scalars[fmt::format("population.{}", c + 1)] = r.populations[c];
    for (std::size_t c = 0; c < r.adiabatic_populations.size(); ++c)
        res.scalars[fmt::format("adiabatic.{}", c + 1)] = r.adiabatic_populations[c];
    for (std::size_t k = 0; k < r.position.size(); ++k) {
        res.scalars[fmt::format("position.{}", k + 1)] = r.position[k];
        res.scalars[fmt::format("momentum.{}", k + 1)] = r.momentum[k];
    }
}

std::set<std::string> expected_outputs(const RunSpec& spec, const std::string& run) {
    std::set<std::string> s;
    if (run == "bound") {
        const std::size_t stop = spec.eigen ? spec.eigen->stop : 0;
        for (std::size_t v = 0; v <= stop; ++v) s.insert(fmt::format("energy.{}", v));
        return s;
    }
    if (run == "relax") return {"energy", "steps", "converged"};
    s = {"norm", "total", "potential", "kinetic", "dipole", "acf"};
    const std::size_t nu = spec.ops.n_channels;
    for (std::size_t c = 1; c <= nu; ++c) {
        s.insert(fmt::format("population.{}", c));
        if (nu > 1) s.insert(fmt::format("adiabatic.{}", c));
    }
    for (std::size_t k = 1; k <= spec.dofs.size(); ++k) {
        s.insert(fmt::format("position.{}", k));
        s.insert(fmt::format("momentum.{}", k));
    }
    if (spec.eigen)
        for (std::size_t v = 0; v <= spec.eigen->stop; ++v) s.insert(fmt::format("level.{}", v));
    return s;
}

} // namespace

// ---------------------------------------------------------------- bound

RunResult run_bound(const RunSpec& spec, const RunOptions& opts) {
    if (!spec.eigen) throw ConfigError(spec.source.string() + ": psi.eigen.stop: missing required field for bound");
    return logged_run(spec, opts, "bound", [&](const std::filesystem::path& out, RunLog&) {
        const SystemSpec sys = build_system(spec);
        FrameSink frames(spec, opts, out, sys.grid);
        const auto& e = *spec.eigen;
        log::info(fmt::format("bound states 0..{}: {} diagonalization of dimension {}", e.stop,
                              to_string(e.options.method.value_or(EigenMethod::dense)),
                              sys.grid.size() * sys.n_channels));
        const EigenResult res = solve_bound_states(sys, e.stop, e.options);
        const auto records = expectations_bound(res, sys);
        auto ckpt = open_checkpoint(spec, out, sys, "bound");

        std::vector<std::string> header{"state", "energy"};
        for (auto& h : record_header(sys)) header.push_back(h);
        CsvWriter csv(out / "expect.csv", header);
        RunResult result;
        for (std::size_t v = 0; v < res.states.size(); ++v) {
            const auto& r = records[v];
            std::vector<std::string> row{std::to_string(v), n(res.energies[v])};
            record_fields(r, row);
            csv.row(row);
            log::info(fmt::format("state {:3d}  E = {:.15g}  <R> = {:.10g}", v, res.energies[v], r.position[0]));
            result.scalars[fmt::format("energy.{}", v)] = res.energies[v];
            if (ckpt) ckpt->write(v, res.energies[v], res.states[v]);
            frames.emit(sys, res.states[v], v, res.energies[v]);
        }
        return result;
    });
}

// ---------------------------------------------------------------- propa

RunResult run_propa(const RunSpec& spec, const RunOptions& opts) {
    const TimeGrid& tg = require_time(spec, "propa");
    require_init(spec, "propa");
    return logged_run(spec, opts, "propa", [&](const std::filesystem::path& out, RunLog&) {
        const SystemSpec sys = build_system(spec);
        const WaveFunction psi0 = build_initial(spec, sys);
        FrameSink frames(spec, opts, out, sys.grid);

        std::vector<WaveFunction> levels;
        if (spec.eigen) {
            log::info(fmt::format("level populations against bound states 0..{}", spec.eigen->stop));
            levels = solve_bound_states(sys, spec.eigen->stop, spec.eigen->options).states;
        }
        auto ckpt = open_checkpoint(spec, out, sys, "propa");

        std::vector<std::string> header{"step", "t", "field"};
        for (auto& h : record_header(sys)) header.push_back(h);
        for (const char* s : {"acf_re", "acf_im", "acf_abs"}) header.emplace_back(s);
        for (std::size_t v = 0; v < levels.size(); ++v) header.push_back(fmt::format("level_{}", v));
        CsvWriter csv(out / "expect.csv", header);

        log::info(fmt::format("propagation: {}, {} main steps of {:.10g}, {} substeps", to_string(spec.propa.method),
                              tg.main_stop, tg.main_delta, tg.sub_n));
        RunResult result;
        std::vector<cplx> acf;
        const auto observer = [&](std::size_t step, double t, const WaveFunction& psi, const ExpectationRecord& r) {
            std::vector<std::string> row{std::to_string(step), n(t), n(field_value(spec.pulses, t))};
            record_fields(r, row);
            row.push_back(n(r.autocorrelation.real()));
            row.push_back(n(r.autocorrelation.imag()));
            row.push_back(n(std::abs(r.autocorrelation)));
            std::vector<double> pops;
            if (!levels.empty()) pops = level_populations(sys.grid, psi, levels);
            for (double p : pops) row.push_back(n(p));
            csv.row(row);
            acf.push_back(r.autocorrelation);
            log::info(fmt::format("step {:4d}  t = {:.10g}  norm = {:.12f}  E = {:.12g}  |acf| = {:.8f}", step, t,
                                  r.norm, r.total, std::abs(r.autocorrelation)));
            if (ckpt) ckpt->write(step, t, psi);
            frames.emit(sys, psi, step, t);
            record_scalars(r, result);
            for (std::size_t v = 0; v < pops.size(); ++v) result.scalars[fmt::format("level.{}", v)] = pops[v];
        };
        propagate(sys, psi0, tg, spec.pulses, spec.propa, observer);

        if (spec.plots.spectrum && acf.size() >= 4) {
            const Spectrum s = spectrum(acf, tg.main_delta, spec.plots.hann);
            CsvWriter sc(out / "spectrum.csv", {"omega", "intensity"});
            for (std::size_t i = 0; i < s.omega.size(); ++i) sc.row({n(s.omega[i]), n(s.intensity[i])});
        }
        log::info(fmt::format("final: norm = {:.12f}  E = {:.15g}", result.scalars["norm"], result.scalars["total"]));
        return result;
    });
}

// ---------------------------------------------------------------- relax

RunResult run_relax(const RunSpec& spec, const RunOptions& opts) {
    const TimeGrid& tg = require_time(spec, "relax");
    require_init(spec, "relax");
    return logged_run(spec, opts, "relax", [&](const std::filesystem::path& out, RunLog&) {
        if (spec.propa.method != Method::cheby_imag)
            log::warn(fmt::format("relax uses the imaginary-time Chebychev propagator; time.propa.handle = '{}' "
                                  "is ignored",
                                  to_string(spec.propa.method)));
        const SystemSpec sys = build_system(spec);
        const WaveFunction psi0 = build_initial(spec, sys);
        FrameSink frames(spec, opts, out, sys.grid);
        auto ckpt = open_checkpoint(spec, out, sys, "relax");

        const RelaxResult r = relax(sys, psi0, tg, spec.relax);
        CsvWriter csv(out / "expect.csv", {"step", "t", "energy", "change"});
        for (std::size_t s = 0; s < r.energies.size(); ++s) {
            const double change =
                s == 0 ? std::nan("") : std::abs(r.energies[s] - r.energies[s - 1]) / std::abs(r.energies[s]);
            csv.row({std::to_string(s), n(static_cast<double>(s) * tg.main_delta), n(r.energies[s]), n(change)});
            log::info(fmt::format("step {:4d}  E = {:.15g}", s, r.energies[s]));
        }
        if (r.converged)
            log::info(fmt::format("relaxation converged after {} steps: E = {:.15g}", r.steps, r.energy));
        else
            log::warn(fmt::format("relaxation not converged after {} steps (tolerance {:.3g}): E = {:.15g}", r.steps,
                                  spec.relax.tolerance, r.energy));
        if (ckpt) ckpt->write(r.steps, static_cast<double>(r.steps) * tg.main_delta, r.state);
        frames.emit(sys, r.state, r.steps, static_cast<double>(r.steps) * tg.main_delta);
        RunResult res;
        res.scalars["energy"] = r.energy;
        res.scalars["steps"] = static_cast<double>(r.steps);
        res.scalars["converged"] = r.converged ? 1.0 : 0.0;
        return res;
    });
}

// ---------------------------------------------------------------- sweep

std::size_t run_sweep(const RunSpec& spec, const RunOptions& opts) {
    if (!spec.sweep) throw ConfigError(spec.source.string() + ": sweep: missing required section");
    const SweepConfig& sw = *spec.sweep;
    if (sw.values.empty()) throw ConfigError(spec.source.string() + ": sweep.values: the value list is empty");
    const auto outputs = expected_outputs(spec, sw.run);
    if (!outputs.count(sw.output)) {
        std::string valid;
        for (const auto& o : outputs) valid += (valid.empty() ? "" : ", ") + o;
        throw ConfigError(fmt::format("{}: sweep.output: '{}' is not produced by {} runs (valid: {})",
                                      spec.source.string(), sw.output, sw.run, valid));
    }
    // resolve every point before any compute
    std::vector<std::optional<RunSpec>> points(sw.values.size());
    std::vector<std::string> status(sw.values.size());
    std::vector<int> codes(sw.values.size(), 0);
    for (std::size_t i = 0; i < sw.values.size(); ++i) {
        try {
            points[i] = override_value(spec, sw.parameter, sw.values[i]);
        } catch (const ConfigError& e) {
            if (i == 0 && std::string(e.what()).find("sweep.parameter") != std::string::npos) throw;
            status[i] = fmt::format("error (exit 2): {}", e.what());
            codes[i] = 2;
        }
    }

    return logged_run(spec, opts, "sweep", [&](const std::filesystem::path& out, RunLog&) {
        log::info(fmt::format("sweep of {} over {} values, {} runs, {} thread(s)", sw.parameter, sw.values.size(),
                              sw.run, std::max(1u, opts.threads)));
        std::vector<double> values(sw.values.size(), std::nan(""));
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < sw.values.size(); i = next++) {
                if (!points[i]) continue;
                RunOptions po = opts;
                po.out_dir = out / fmt::format("sweep_{}", i + 1);
                po.console = false;
                try {
                    RunResult r;
                    if (sw.run == "bound")
                        r = run_bound(*points[i], po);
                    else if (sw.run == "relax")
                        r = run_relax(*points[i], po);
                    else
                        r = run_propa(*points[i], po);
                    values[i] = r.scalars.at(sw.output);
                    status[i] = "ok";
                } catch (const std::exception& e) {
                    codes[i] = exit_code(e);
                    status[i] = fmt::format("error (exit {}): {}", codes[i], e.what());
                }
            }
        };
        const unsigned n_threads = std::max(1u, std::min<unsigned>(opts.threads, sw.values.size()));
        if (n_threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }

        CsvWriter csv(out / "sweep.csv", {"index", sw.parameter, sw.output, "status"});
        std::size_t failed = 0;
        for (std::size_t i = 0; i < sw.values.size(); ++i) {
            csv.row({std::to_string(i + 1), sw.values[i], status[i] == "ok" ? n(values[i]) : "", status[i]});
            if (status[i] == "ok") {
                log::info(fmt::format("point {:3d}  {} = {}  {} = {:.15g}", i + 1, sw.parameter, sw.values[i],
                                      sw.output, values[i]));
            } else {
                ++failed;
                log::warn(fmt::format("point {} ({} = {}) failed: {}", i + 1, sw.parameter, sw.values[i], status[i]));
            }
        }
        return failed;
    });
}

// ---------------------------------------------------------------- replay

void run_replay(const RunSpec& spec, const RunOptions& opts) {
    const std::string kind = opts.replay_kind.value_or(spec.plots.density_type);
    if (kind.empty())
        throw ConfigError(spec.source.string() + ": plots.density.type: no frame kind set (or pass --kind)");
    frame_kind_from_string(kind);
    logged_run(spec, opts, "replay", [&](const std::filesystem::path& out, RunLog&) {
        std::filesystem::path header = opts.checkpoint.value_or(std::filesystem::path(spec.save.dir) /
                                                                 (spec.save.file + ".qwp"));
        if (!opts.checkpoint && header.is_relative()) header = out / header;
        CheckpointReader reader(header);
        OperatorSpecs ops;
        ops.n_channels = reader.header().n_channels;
        const SystemSpec sys = assemble(checkpoint_grid(reader.header()), ops);
        FrameSink frames(spec, opts, out, sys.grid, kind, opts.frames);
        log::info(fmt::format("replay of {} ({} run, {} dof(s), {} channel(s)) as '{}' frames", header.string(),
                              reader.header().run, reader.header().dofs.size(), reader.header().n_channels, kind));
        std::size_t count = 0;
        while (auto f = reader.next()) {
            frames.emit(sys, f->psi, f->step, f->t);
            ++count;
        }
        log::info(fmt::format("{} frame(s) written to {}", count, (out / "frames").string()));
        return 0;
    });
}

int run_command(Command cmd, const std::filesystem::path& config, const RunOptions& opts) {
    try {
        const RunSpec spec = parse_config(config);
        switch (cmd) {
        case Command::bound: run_bound(spec, opts); break;
        case Command::propa: run_propa(spec, opts); break;
        case Command::relax: run_relax(spec, opts); break;
        case Command::replay: run_replay(spec, opts); break;
        case Command::sweep: {
            const std::size_t failed = run_sweep(spec, opts);
            if (failed) {
                std::cerr << "qdynkit: " << failed << " sweep point(s) failed; see sweep.csv\n";
                return 3;
            }
            break;
        }
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "qdynkit: error: " << e.what() << '\n';
        return exit_code(e);
    }
}

} // namespace qdk

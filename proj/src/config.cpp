#include "qdynkit/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#define TOML_ENABLE_FORMATTERS 1
#include <toml.hpp>

#include "qdynkit/error.hpp"
#include "qdynkit/units.hpp"

namespace qdk {

Grid1D make_grid(const DofConfig& d) {
    switch (d.kind) {
    case GridKind::hermite: return Grid1D::hermite(d.n_pts, d.mass, d.omega, d.r_e);
    case GridKind::legendre: return Grid1D::legendre(d.n_pts, d.mass, d.radius, d.m_0);
    default: return Grid1D::fft(d.n_pts, d.x_min, d.x_max, d.mass);
    }
}

namespace {

using units::Dimension;

struct Documents {
    toml::table raw;
    toml::table resolved;
};

std::string type_name(const toml::node& n) {
    switch (n.type()) {
    case toml::node_type::table: return "a table";
    case toml::node_type::array: return "an array";
    case toml::node_type::string: return "a string";
    case toml::node_type::integer: return "an integer";
    case toml::node_type::floating_point: return "a float";
    case toml::node_type::boolean: return "a boolean";
    default: return "a date/time";
    }
}

/// Read access to one config table. Every key read is recorded, so that
/// finish() can report the rest as unknown, and mirrored with its resolved
/// value (defaults included) into `out`.
class Section {
public:
    Section(const toml::table* t, toml::table* out, std::string path, const std::string* file)
        : t_(t), out_(out), path_(std::move(path)), file_(file) {}

    const std::string& path() const { return path_; }
    std::string at(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

    bool has(std::string_view key) const { return t_ && t_->contains(key); }

    std::size_t line(const toml::node* n) const {
        if (n && n->source().begin.line) return n->source().begin.line;
        if (t_ && t_->source().begin.line) return t_->source().begin.line;
        return 0;
    }

    [[noreturn]] void fail_node(const toml::node* n, const std::string& key_path, const std::string& msg) const {
        const std::size_t l = line(n);
        if (l)
            throw ConfigError(fmt::format("{}:{}: {}: {}", *file_, l, key_path, msg));
        throw ConfigError(fmt::format("{}: {}: {}", *file_, key_path, msg));
    }
    [[noreturn]] void fail(std::string_view key, const std::string& msg) const {
        fail_node(node(key), at(key), msg);
    }

    const toml::node* node(std::string_view key) const { return t_ ? t_->get(key) : nullptr; }

    const toml::node* take(std::string_view key) {
        used_.insert(std::string(key));
        return node(key);
    }

    double number(std::string_view key, Dimension dim, std::optional<double> def = std::nullopt) {
        const toml::node* n = take(key);
        double v = 0.0;
        if (!n) {
            if (!def) fail(key, "missing required field");
            v = *def;
        } else if (auto d = n->value<double>(); d && (n->is_floating_point() || n->is_integer())) {
            v = *d;
        } else if (n->is_string()) {
            try {
                v = units::parse_quantity(*n->value<std::string>(), dim);
            } catch (const ConfigError& e) {
                fail(key, e.what());
            }
        } else {
            fail(key, "expected a number, got " + type_name(*n));
        }
        if (!std::isfinite(v)) fail(key, "must be finite");
        out_->insert_or_assign(key, v);
        return v;
    }

    std::int64_t integer(std::string_view key, std::optional<std::int64_t> def = std::nullopt,
                         std::int64_t min = std::numeric_limits<std::int64_t>::min()) {
        const toml::node* n = take(key);
        std::int64_t v = 0;
        if (!n) {
            if (!def) fail(key, "missing required field");
            v = *def;
        } else if (n->is_integer()) {
            v = *n->value<std::int64_t>();
        } else if (n->is_floating_point() && std::floor(*n->value<double>()) == *n->value<double>() &&
                   std::abs(*n->value<double>()) < 9e15) {
            v = static_cast<std::int64_t>(*n->value<double>());
        } else {
            fail(key, "expected an integer, got " + type_name(*n));
        }
        if (v < min) fail(key, fmt::format("must be at least {}", min));
        out_->insert_or_assign(key, v);
        return v;
    }

    std::size_t count(std::string_view key, std::optional<std::int64_t> def = std::nullopt, std::int64_t min = 0) {
        return static_cast<std::size_t>(integer(key, def, min));
    }

    std::string string(std::string_view key, std::optional<std::string> def = std::nullopt) {
        const toml::node* n = take(key);
        std::string v;
        if (!n) {
            if (!def) fail(key, "missing required field");
            v = *def;
        } else if (n->is_string()) {
            v = *n->value<std::string>();
        } else {
            fail(key, "expected a string, got " + type_name(*n));
        }
        out_->insert_or_assign(key, v);
        return v;
    }

    bool boolean(std::string_view key, bool def) {
        const toml::node* n = take(key);
        bool v = def;
        if (n) {
            if (!n->is_boolean()) fail(key, "expected true or false, got " + type_name(*n));
            v = *n->value<bool>();
        }
        out_->insert_or_assign(key, v);
        return v;
    }

    std::vector<double> numbers(std::string_view key, Dimension dim) {
        const toml::node* n = take(key);
        if (!n) fail(key, "missing required field");
        const toml::array* a = n->as_array();
        if (!a) fail(key, "expected an array of numbers, got " + type_name(*n));
        std::vector<double> v;
        toml::array out;
        for (const auto& e : *a) {
            double x = 0.0;
            if (auto d = e.value<double>(); d && (e.is_floating_point() || e.is_integer()))
                x = *d;
            else if (e.is_string()) {
                try {
                    x = units::parse_quantity(*e.value<std::string>(), dim);
                } catch (const ConfigError& err) {
                    fail(key, err.what());
                }
            } else {
                fail(key, "expected an array of numbers, found " + type_name(e));
            }
            if (!std::isfinite(x)) fail(key, "entries must be finite");
            v.push_back(x);
            out.push_back(x);
        }
        out_->insert_or_assign(key, std::move(out));
        return v;
    }

    std::optional<Section> table(std::string_view key) {
        const toml::node* n = take(key);
        if (!n) return std::nullopt;
        const toml::table* t = n->as_table();
        if (!t) fail(key, "expected a table, got " + type_name(*n));
        auto [it, ok] = out_->insert_or_assign(key, toml::table{});
        return Section(t, it->second.as_table(), at(key), file_);
    }

    /// Like table(), but an absent table still gets its defaults resolved.
    Section table_or_empty(std::string_view key) {
        if (auto s = table(key)) return std::move(*s);
        auto [it, ok] = out_->insert_or_assign(key, toml::table{});
        return Section(nullptr, it->second.as_table(), at(key), file_);
    }

    /// A table or an array of tables.
    std::vector<Section> tables(std::string_view key) {
        const toml::node* n = take(key);
        std::vector<Section> out;
        if (!n) return out;
        if (const toml::table* t = n->as_table()) {
            auto [it, ok] = out_->insert_or_assign(key, toml::table{});
            out.emplace_back(t, it->second.as_table(), at(key), file_);
            return out;
        }
        const toml::array* a = n->as_array();
        if (!a || !a->is_array_of_tables()) fail(key, "expected a table or an array of tables, got " + type_name(*n));
        auto [it, ok] = out_->insert_or_assign(key, toml::array{});
        toml::array* oa = it->second.as_array();
        std::size_t i = 0;
        for (const auto& e : *a) {
            oa->push_back(toml::table{});
            out.emplace_back(e.as_table(), oa->back().as_table(), fmt::format("{}[{}]", at(key), ++i), file_);
        }
        return out;
    }

    /// Keys of this table in document order.
    std::vector<std::string> keys() const {
        std::vector<std::string> k;
        if (t_)
            for (const auto& [key, v] : *t_) k.emplace_back(key.str());
        return k;
    }

    void finish() const {
        if (!t_) return;
        for (const auto& [key, v] : *t_) {
            if (used_.count(std::string(key.str()))) continue;
            const std::size_t l = key.source().begin.line ? key.source().begin.line : line(&v);
            throw ConfigError(fmt::format("{}:{}: {}: unknown key", *file_, l, at(key.str())));
        }
    }

private:
    const toml::table* t_;
    toml::table* out_;
    std::string path_;
    const std::string* file_;
    std::set<std::string> used_;
};

std::string strip_prefix(std::string s, std::initializer_list<std::string_view> prefixes) {
    if (!s.empty() && s.front() == '@') s.erase(0, 1);
    for (auto p : prefixes)
        if (s.rfind(p, 0) == 0) return s.substr(p.size());
    return s;
}

/// Keys "1", "2", ... in order; anything else is an error.
std::vector<std::pair<std::size_t, std::string>> indexed_keys(const Section& s) {
    std::vector<std::pair<std::size_t, std::string>> out;
    for (const auto& k : s.keys()) {
        std::size_t v = 0;
        const auto [end, ec] = std::from_chars(k.data(), k.data() + k.size(), v);
        if (ec != std::errc() || end != k.data() + k.size() || v == 0)
            s.fail(k, "expected a 1-based index");
        out.emplace_back(v, k);
    }
    std::sort(out.begin(), out.end());
    return out;
}

template <class Fn>
auto located(const Section& s, std::string_view key, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        s.fail_node(s.node(key), s.at(key), e.what());
    } catch (const RangeError& e) {
        s.fail_node(s.node(key), s.at(key), e.what());
    }
}

class Parser {
public:
    Parser(const toml::table& doc, std::filesystem::path source)
        : doc_(doc), source_(std::move(source)), file_(source_.string()) {}

    RunSpec run() {
        auto docs = std::make_shared<Documents>();
        docs->raw = doc_;
        Section root(&doc_, &docs->resolved, "", &file_);
        RunSpec spec;
        spec.source = source_;

        auto space = root.table("space");
        if (!space || !space->has("dof"))
            throw ConfigError(file_ +
                              ": missing required section [space] (grids): define each grid as [space.dof.1] "
                              "type = \"fft\", mass, n_pts, x_min, x_max");
        parse_space(*space, spec);

        if (auto h = root.table("hamilt")) {
            parse_hamilt(*h, spec);
        } else {
            spec.ops.n_channels = 1;
        }
        if (auto p = root.table("psi")) parse_psi(*p, spec);
        if (auto t = root.table("time")) parse_time(*t, spec);
        {
            Section plots = root.table_or_empty("plots");
            parse_plots(plots, spec);
        }

        const std::string default_stem = source_.stem().empty() ? "qdynkit" : source_.stem().string();
        Section out = root.table_or_empty("output");
        spec.stem = out.string("stem", default_stem);
        if (spec.stem.empty() || spec.stem.find_first_of("/\\") != std::string::npos)
            out.fail("stem", "must be a plain file name");
        spec.out_dir = out.string("dir", "");
        out.finish();

        // psi.save.file defaults to the run stem
        if (spec.save.file.empty()) {
            spec.save.file = spec.stem;
            if (auto* save = docs->resolved.at_path("psi.save").as_table())
                save->insert_or_assign("file", spec.save.file);
        }

        if (auto s = root.table("sweep")) parse_sweep(*s, spec);
        root.finish();
        spec.document = docs;
        return spec;
    }

private:
    void parse_space(Section& space, RunSpec& spec) {
        auto dof = space.table("dof");
        const auto idx = indexed_keys(*dof);
        for (std::size_t i = 0; i < idx.size(); ++i)
            if (idx[i].first != i + 1) dof->fail(idx[i].second, fmt::format("dof indices must run 1..{}", idx.size()));
        for (const auto& [k, key] : idx) {
            auto d = dof->table(key);
            DofConfig c;
            const std::string type = strip_prefix(d->string("type", "fft"), {"grid_"});
            c.kind = located(*d, "type", [&] { return grid_kind_from_string(type); });
            c.mass = d->number("mass", Dimension::none);
            c.n_pts = d->count("n_pts", std::nullopt, 1);
            switch (c.kind) {
            case GridKind::fft:
                c.x_min = d->number("x_min", Dimension::none);
                c.x_max = d->number("x_max", Dimension::none);
                break;
            case GridKind::hermite:
                c.omega = d->number("omega", Dimension::energy);
                c.r_e = d->number("r_e", Dimension::none, 0.0);
                break;
            case GridKind::legendre:
                c.radius = d->number("radius", Dimension::none, 1.0);
                c.m_0 = static_cast<int>(d->integer("m_0", 0));
                break;
            }
            located(*d, "n_pts", [&] { return make_grid(c); });
            d->finish();
            spec.dofs.push_back(c);
        }
        space.finish();
    }

    ScalarModel parse_model(Section& s, std::string_view family) {
        const std::string raw = s.string("model");
        const std::string name = strip_prefix(raw, {"pot.", "dip.", "nip."});
        ScalarModel m = MorseParams{};
        if (name == "morse") {
            MorseParams p;
            p.d_e = s.number("d_e", Dimension::energy);
            p.r_e = s.number("r_e", Dimension::none);
            p.alf = s.number("alf", Dimension::none);
            located(s, "model", [&] { validate(p); return 0; });
            m = p;
        } else if (name == "mecke") {
            MeckeParams p;
            p.q_0 = s.number("q_0", Dimension::none);
            p.r_0 = s.number("r_0", Dimension::none);
            located(s, "model", [&] { validate(p); return 0; });
            m = p;
        } else if (name == "power") {
            PowerNipParams p;
            p.exp = s.number("exp", Dimension::none, 2.0);
            p.min = s.number("min", Dimension::none);
            p.max = s.number("max", Dimension::none);
            p.strength = s.number("strength", Dimension::none, 1.0);
            located(s, "model", [&] { validate(p); return 0; });
            m = p;
        } else if (name == "taylor") {
            TaylorParams p;
            p.coeffs = s.numbers("coeffs", Dimension::none);
            p.center = s.number("center", Dimension::none, 0.0);
            m = p;
        } else if (name == "tabulated") {
            std::filesystem::path file = s.string("file");
            if (file.is_relative()) file = source_.parent_path() / file;
            m = located(s, "file", [&] {
                try {
                    return TabulatedFunction::from_file(file);
                } catch (const IoError& e) {
                    throw ConfigError(e.what());
                }
            });
        } else {
            s.fail("model", fmt::format("unknown {} model '{}' (valid: morse, mecke, power, taylor, tabulated)",
                                        family, raw));
        }
        return m;
    }

    Term parse_term(Section& s, std::string_view family, std::size_t n_dofs) {
        Term t;
        t.model = parse_model(s, family);
        const std::size_t dof = s.count("dof", 1, 1);
        if (dof > n_dofs) s.fail("dof", fmt::format("refers to dof {} but only {} are defined", dof, n_dofs));
        t.dof = dof - 1;
        s.finish();
        return t;
    }

    void parse_channel_matrix(Section& s, std::string_view family, std::size_t nu, std::size_t n_dofs,
                              std::map<ChannelPair, FieldSpec>& out) {
        for (const auto& [i, ki] : indexed_keys(s)) {
            if (i > nu) s.fail(ki, fmt::format("channel {} exceeds hamilt.coupling.n_eqs = {}", i, nu));
            auto row = s.table(ki);
            for (const auto& [j, kj] : indexed_keys(*row)) {
                if (j > nu) row->fail(kj, fmt::format("channel {} exceeds hamilt.coupling.n_eqs = {}", j, nu));
                if (j < i) row->fail(kj, "give the upper triangle only (i <= j); the matrix is symmetric");
                FieldSpec terms;
                for (auto& t : row->tables(kj)) terms.push_back(parse_term(t, family, n_dofs));
                out[{i - 1, j - 1}] = std::move(terms);
            }
            row->finish();
        }
        s.finish();
    }

    void parse_hamilt(Section& h, RunSpec& spec) {
        const std::size_t n_dofs = spec.dofs.size();
        std::size_t nu = 1;
        if (auto c = h.table("coupling")) {
            nu = c->count("n_eqs", 1, 1);
            c->finish();
        }
        spec.ops.n_channels = nu;
        if (auto p = h.table("pot")) {
            if (p->has("model")) {
                const std::string name = strip_prefix(p->string("model"), {"pot."});
                if (name != "jahn_teller")
                    p->fail("model", "only 'jahn_teller' may be given for the whole matrix; use "
                                     "[hamilt.pot.I.J] tables for other models");
                if (nu != 2) p->fail("model", "jahn_teller needs hamilt.coupling.n_eqs = 2");
                if (n_dofs < 2) p->fail("model", "jahn_teller needs two dofs");
                JahnTellerParams jt;
                jt.kappa = p->number("kappa", Dimension::none);
                jt.lam = p->number("lambda", Dimension::none);
                spec.ops.jahn_teller = jt;
                p->finish();
            } else {
                parse_channel_matrix(*p, "potential", nu, n_dofs, spec.ops.pot);
            }
        }
        if (auto d = h.table("dip")) parse_channel_matrix(*d, "dipole", nu, n_dofs, spec.ops.dip);
        if (h.has("nip")) {
            FieldSpec terms;
            for (auto& t : h.tables("nip")) terms.push_back(parse_term(t, "absorber", n_dofs));
            spec.ops.nip = std::move(terms);
        }
        if (auto t = h.table("truncate")) {
            const double de = t->number("delta_e", Dimension::energy);
            if (!(de > 0.0)) t->fail("delta_e", "must be positive");
            spec.truncate_delta_e = de;
            t->finish();
        }
        h.finish();
    }

    void parse_psi(Section& p, RunSpec& spec) {
        const std::size_t nu = spec.ops.n_channels;
        if (auto init = p.table("init")) {
            const std::size_t ch = init->count("channel", 1, 1);
            if (ch > nu) init->fail("channel", fmt::format("channel {} exceeds hamilt.coupling.n_eqs = {}", ch, nu));
            spec.init.channel = ch - 1;
            const std::string rep = init->string("representation", "dia");
            if (rep != "dia" && rep != "adi") init->fail("representation", "expected 'dia' or 'adi'");
            spec.init.adiabatic = rep == "adi";
            auto dof = init->table("dof");
            if (!dof) init->fail("dof", "missing required table (one entry per grid dof)");
            const auto idx = indexed_keys(*dof);
            if (idx.size() != spec.dofs.size())
                dof->fail_node(nullptr, dof->path(),
                               fmt::format("expected {} entries (one per grid dof), found {}", spec.dofs.size(),
                                           idx.size()));
            for (std::size_t i = 0; i < idx.size(); ++i)
                if (idx[i].first != i + 1)
                    dof->fail(idx[i].second, fmt::format("dof indices must run 1..{}", idx.size()));
            for (const auto& [k, key] : idx) {
                auto d = dof->table(key);
                InitDof c;
                const std::string raw = d->string("model");
                const std::string name = strip_prefix(raw, {"wav."});
                if (name == "gauss") {
                    c.kind = InitDof::Kind::gauss;
                    c.pos_0 = d->number("pos_0", Dimension::none);
                    c.width = d->number("width", Dimension::none);
                    c.momentum_0 = d->number("mom_0", Dimension::none, 0.0);
                    if (!(c.width > 0.0)) d->fail("width", "must be positive");
                } else if (name == "morse") {
                    c.kind = InitDof::Kind::morse;
                    c.morse.d_e = d->number("d_e", Dimension::energy);
                    c.morse.r_e = d->number("r_e", Dimension::none);
                    c.morse.alf = d->number("alf", Dimension::none);
                    c.n = d->count("n", 0, 0);
                    located(*d, "model", [&] { validate(c.morse); return 0; });
                    const auto n_bound = morse_bound_count(c.morse.d_e, c.morse.alf, spec.dofs[k - 1].mass);
                    if (c.n >= n_bound)
                        d->fail("n", fmt::format("the Morse potential has {} bound states", n_bound));
                } else {
                    d->fail("model", "unknown initial wavefunction '" + raw + "' (valid: gauss, morse)");
                }
                d->finish();
                spec.init.dofs.push_back(c);
            }
            dof->finish();
            init->finish();
        }
        if (auto e = p.table("eigen")) {
            EigenConfig c;
            c.stop = e->count("stop");
            c.options.threshold = e->number("threshold", Dimension::energy, 0.0);
            if (c.options.threshold < 0.0) e->fail("threshold", "must be non-negative");
            const std::string m = e->string("method", c.options.threshold > 0.0 ? "sparse" : "dense");
            c.options.method = located(*e, "method", [&] { return eigen_method_from_string(m); });
            e->finish();
            spec.eigen = c;
        }
        if (auto s = p.table("save")) {
            spec.save.export_ = s->boolean("export", false);
            spec.save.dir = s->string("dir", ".");
            spec.save.file = s->string("file", "");
            s->finish();
        }
        p.finish();
    }

    void parse_time(Section& t, RunSpec& spec) {
        if (auto p = t.table("propa")) {
            const std::string raw = p->string("handle", "cheby_real");
            spec.propa.method = located(*p, "handle", [&] { return method_from_string(strip_prefix(raw, {"ket."})); });
            spec.propa.precision = p->number("precision", Dimension::none, 1e-8);
            if (!(spec.propa.precision > 0.0 && spec.propa.precision < 1.0))
                p->fail("precision", "must lie in (0, 1)");
            spec.propa.order = static_cast<int>(p->integer("order", 3));
            if (spec.propa.order != 2 && spec.propa.order != 3) p->fail("order", "must be 2 (Trotter) or 3 (Strang)");
            spec.relax.precision = spec.propa.precision;
            spec.relax.tolerance = p->number("tolerance", Dimension::none, 1e-10);
            if (!(spec.relax.tolerance > 0.0)) p->fail("tolerance", "must be positive");
            p->finish();
        }
        if (auto m = t.table("main")) {
            TimeGrid tg;
            tg.main_delta = m->number("delta", Dimension::time);
            tg.main_stop = m->count("stop", std::nullopt, 1);
            if (!(tg.main_delta > 0.0)) m->fail("delta", "must be positive");
            m->finish();
            if (auto s = t.table("sub")) {
                tg.sub_n = s->count("n", 1, 1);
                s->finish();
            }
            located(t, "main", [&] { validate(tg); return 0; });
            spec.time = tg;
        } else if (t.has("sub")) {
            t.fail("sub", "time.sub needs time.main");
        }
        for (auto& e : t.tables("efield")) {
            Pulse pulse;
            const std::string shape = e.string("shape", "sin2");
            pulse.shape = located(e, "shape", [&] { return pulse_shape_from_string(shape); });
            pulse.delay = e.number("delay", Dimension::time, 0.0);
            pulse.ampli = e.number("ampli", Dimension::field);
            if (pulse.shape == PulseShape::tabulated) {
                std::filesystem::path file = e.string("file");
                if (file.is_relative()) file = source_.parent_path() / file;
                pulse.table = located(e, "file", [&] {
                    try {
                        return TabulatedFunction::from_file(file);
                    } catch (const IoError& err) {
                        throw ConfigError(err.what());
                    }
                });
            } else {
                pulse.fwhm = e.number("fwhm", Dimension::time);
                pulse.frequ = e.number("frequ", Dimension::energy, 0.0);
                pulse.chirp = e.number("chirp", Dimension::none, 0.0);
                pulse.chirp2 = e.number("chirp2", Dimension::none, 0.0);
                pulse.phase = e.number("phase", Dimension::none, 0.0);
            }
            located(e, "shape", [&] { validate(pulse); return 0; });
            e.finish();
            spec.pulses.push_back(std::move(pulse));
        }
        t.finish();
    }

    void parse_plots(Section& p, RunSpec& spec) {
        {
            auto d = std::optional<Section>(p.table_or_empty("density"));
            spec.plots.density_type = d->string("type", "");
            static const std::set<std::string> kinds{"", "curve", "wigner", "flux", "reduced", "density"};
            if (!kinds.count(spec.plots.density_type))
                d->fail("type", "unknown frame kind '" + spec.plots.density_type +
                                    "' (valid: curve, wigner, flux, reduced, density)");
            spec.plots.representation = d->string("representation", "dvr");
            if (spec.plots.representation != "dvr" && spec.plots.representation != "fbr")
                d->fail("representation", "expected 'dvr' or 'fbr'");
            spec.plots.png = d->boolean("png", true);
            d->finish();
        }
        {
            auto s = std::optional<Section>(p.table_or_empty("spectrum"));
            spec.plots.spectrum = s->boolean("on", true);
            spec.plots.hann = s->boolean("hann", true);
            s->finish();
        }
        p.finish();
    }

    void parse_sweep(Section& s, RunSpec& spec) {
        SweepConfig c;
        c.parameter = s.string("parameter");
        const toml::node* n = s.take("values");
        if (!n) s.fail("values", "missing required field");
        const toml::array* a = n->as_array();
        if (!a) s.fail("values", "expected an array, got " + type_name(*n));
        if (a->empty()) s.fail("values", "the value list is empty");
        for (const auto& e : *a) {
            if (e.is_integer() || e.is_floating_point())
                c.values.push_back(fmt::format("{:.17g}", *e.value<double>()));
            else if (e.is_string())
                c.values.push_back(*e.value<std::string>());
            else
                s.fail("values", "entries must be numbers or unit strings");
        }
        c.output = s.string("output", "total");
        c.run = s.string("run", "propa");
        if (c.run != "propa" && c.run != "bound" && c.run != "relax")
            s.fail("run", "expected 'propa', 'bound' or 'relax'");
        if (c.parameter.rfind("sweep", 0) == 0) s.fail("parameter", "cannot sweep the sweep section");
        s.finish();
        spec.sweep = c;
    }

    const toml::table& doc_;
    std::filesystem::path source_;
    std::string file_;
};

toml::table parse_toml(const std::string& text, const std::filesystem::path& source) {
    try {
        return toml::parse(text, source.string());
    } catch (const toml::parse_error& e) {
        throw ConfigError(fmt::format("{}:{}:{}: {}", source.string(), e.source().begin.line,
                                      e.source().begin.column, e.description()));
    }
}

} // namespace

RunSpec parse_config_string(const std::string& text, const std::filesystem::path& source) {
    const toml::table doc = parse_toml(text, source);
    return Parser(doc, source).run();
}

RunSpec parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot read config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_string(ss.str(), path);
}

RunSpec override_value(const RunSpec& spec, const std::string& dotted, const std::string& value) {
    const auto docs = std::static_pointer_cast<const Documents>(spec.document);
    if (!docs) throw ConfigError("override: no parsed document");
    toml::table doc = docs->raw;
    std::vector<std::string> parts;
    std::stringstream ss(dotted);
    for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
    if (parts.empty()) throw ConfigError("sweep.parameter: empty key path");

    toml::node* cur = &doc;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        toml::node* next = nullptr;
        if (auto* t = cur->as_table()) {
            next = t->get(parts[i]);
        } else if (auto* a = cur->as_array()) {
            std::size_t k = 0;
            const auto [end, ec] = std::from_chars(parts[i].data(), parts[i].data() + parts[i].size(), k);
            if (ec == std::errc() && k >= 1 && k <= a->size()) next = a->get(k - 1);
        }
        if (!next) throw ConfigError("sweep.parameter: '" + dotted + "' does not name a key of the config");
        cur = next;
    }
    auto* parent = cur->as_table();
    if (!parent && cur->is_array() && cur->as_array()->size() == 1) parent = cur->as_array()->get(0)->as_table();
    if (!parent || !parent->contains(parts.back()))
        throw ConfigError("sweep.parameter: '" + dotted + "' does not name a key of the config");

    double x = 0.0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec == std::errc() && end == value.data() + value.size())
        parent->insert_or_assign(parts.back(), x);
    else
        parent->insert_or_assign(parts.back(), value);
    return Parser(doc, spec.source).run();
}

std::string echo(const RunSpec& spec) {
    const auto docs = std::static_pointer_cast<const Documents>(spec.document);
    if (!docs) return {};
    std::ostringstream ss;
    ss << toml::toml_formatter(docs->resolved, toml::toml_formatter::default_flags &
                                                    ~toml::format_flags::allow_literal_strings);
    return ss.str();
}

SystemSpec build_system(const RunSpec& spec) {
    std::vector<Grid1D> dofs;
    for (const auto& d : spec.dofs) dofs.push_back(make_grid(d));
    SystemSpec sys = assemble(ProductGrid(std::move(dofs)), spec.ops);
    if (spec.truncate_delta_e) truncate_energy_range(sys, *spec.truncate_delta_e);
    return sys;
}

WaveFunction build_initial(const RunSpec& spec, const SystemSpec& sys) {
    if (spec.init.dofs.empty()) throw ConfigError(spec.source.string() + ": psi.init: missing required section");
    std::vector<std::vector<cplx>> per_dof;
    for (std::size_t k = 0; k < spec.init.dofs.size(); ++k) {
        const auto& d = spec.init.dofs[k];
        const Grid1D& g = sys.grid.dof(k);
        if (d.kind == InitDof::Kind::gauss)
            per_dof.push_back(init_gauss(g, d.pos_0, d.width, d.momentum_0));
        else
            per_dof.push_back(init_morse_eigenstate(g, d.morse.d_e, d.morse.r_e, d.morse.alf, g.mass(), d.n));
    }
    WaveFunction psi = product_state(sys.grid, sys.n_channels, per_dof, spec.init.channel);
    if (spec.init.adiabatic) {
        psi = adiabatic_to_diabatic(sys, psi);
        normalize(sys.grid, psi);
    }
    return psi;
}

} // namespace qdk

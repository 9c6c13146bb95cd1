#include "qdynkit/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <fmt/format.h>

#include "qdynkit/error.hpp"

namespace qdk {

namespace {

constexpr char magic[4] = {'Q', 'W', 'P', '1'};
constexpr std::uint32_t type_header = 0;
constexpr std::uint32_t type_chunk = 1;
constexpr std::uint32_t record_tag = 0x50455453; // "STEP"

template <class T>
T to_le(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

class Out {
public:
    explicit Out(std::string& buf) : buf_(buf) {}
    template <class T>
    void put(T v) {
        v = to_le(v);
        buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void str(const std::string& s) {
        put<std::uint64_t>(s.size());
        buf_.append(s);
    }

private:
    std::string& buf_;
};

class In {
public:
    In(std::istream& in, const std::filesystem::path& path) : in_(in), path_(path) {}
    template <class T>
    T get() {
        T v{};
        read(&v, sizeof(T));
        return to_le(v);
    }
    std::string str() {
        const auto n = get<std::uint64_t>();
        if (n > (std::uint64_t{1} << 32)) corrupt("string length out of range");
        std::string s(n, '\0');
        read(s.data(), n);
        return s;
    }
    void read(void* dst, std::size_t n) {
        in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw IoError(fmt::format("checkpoint file '{}' is truncated", path_.string()));
    }
    [[noreturn]] void corrupt(const std::string& what) const {
        throw IoError(fmt::format("checkpoint file '{}': {}", path_.string(), what));
    }

private:
    std::istream& in_;
    const std::filesystem::path& path_;
};

void put_preamble(Out& o, std::uint32_t type) {
    for (char c : magic) o.put(c);
    o.put(checkpoint_version);
    o.put(type);
}

void check_preamble(In& in, std::uint32_t type) {
    char m[4];
    in.read(m, 4);
    if (std::memcmp(m, magic, 4) != 0) in.corrupt("not a QWP1 checkpoint (bad magic)");
    const auto version = in.get<std::uint32_t>();
    if (version != checkpoint_version)
        in.corrupt(fmt::format("format version {} is not supported (expected {})", version, checkpoint_version));
    if (in.get<std::uint32_t>() != type)
        in.corrupt(type == type_header ? "expected a header file" : "expected a chunk file");
}

std::filesystem::path chunk_path(const std::filesystem::path& dir, const std::string& stem, std::size_t n) {
    return dir / fmt::format("{}_{}.qwp", stem, n);
}

std::size_t grid_size(const CheckpointHeader& h) {
    std::size_t n = 1;
    for (const auto& d : h.dofs) n *= d.n_pts;
    return n;
}

} // namespace

DofConfig dof_config(const Grid1D& g) {
    DofConfig d;
    d.kind = g.kind();
    d.n_pts = g.size();
    d.mass = g.mass();
    d.x_min = g.x_min();
    d.x_max = g.x_max();
    d.omega = g.omega();
    d.r_e = g.r_e();
    d.radius = g.radius();
    d.m_0 = g.m_quantum();
    return d;
}

ProductGrid checkpoint_grid(const CheckpointHeader& h) {
    std::vector<Grid1D> dofs;
    for (const auto& d : h.dofs) dofs.push_back(make_grid(d));
    return ProductGrid(std::move(dofs));
}

CheckpointWriter::CheckpointWriter(std::filesystem::path dir, std::string stem, CheckpointHeader header,
                                   std::uint64_t chunk_limit)
    : dir_(std::move(dir)), stem_(std::move(stem)), header_(std::move(header)), limit_(chunk_limit) {
    grid_size_ = grid_size(header_);
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    for (std::size_t n = 0; std::filesystem::exists(chunk_path(dir_, stem_, n)); ++n)
        std::filesystem::remove(chunk_path(dir_, stem_, n), ec);

    std::string buf;
    Out o(buf);
    put_preamble(o, type_header);
    o.str(header_.run);
    o.str(header_.config);
    o.put<std::uint32_t>(static_cast<std::uint32_t>(header_.dofs.size()));
    for (const auto& d : header_.dofs) {
        o.put<std::uint32_t>(static_cast<std::uint32_t>(d.kind));
        o.put<std::uint64_t>(d.n_pts);
        o.put(d.mass);
        o.put(d.x_min);
        o.put(d.x_max);
        o.put(d.omega);
        o.put(d.r_e);
        o.put(d.radius);
        o.put<std::int32_t>(d.m_0);
    }
    o.put<std::uint64_t>(header_.n_channels);

    const auto path = dir_ / (stem_ + ".qwp");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw IoError("cannot write checkpoint header '" + path.string() + "'");
}

void CheckpointWriter::open_chunk() {
    if (chunk_.is_open()) chunk_.close();
    const auto path = chunk_path(dir_, stem_, chunk_index_);
    chunk_.open(path, std::ios::binary | std::ios::trunc);
    if (!chunk_) throw IoError("cannot write checkpoint chunk '" + path.string() + "'");
    std::string buf;
    Out o(buf);
    put_preamble(o, type_chunk);
    o.put<std::uint64_t>(chunk_index_);
    chunk_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    chunk_bytes_ = buf.size();
    ++chunk_index_;
}

void CheckpointWriter::write(std::uint64_t step, double t, const WaveFunction& psi) {
    if (psi.n_channels() != header_.n_channels)
        throw ShapeError(fmt::format("checkpoint: {} channels, header has {}", psi.n_channels(), header_.n_channels));
    for (const auto& c : psi.channels)
        if (c.size() != grid_size_)
            throw ShapeError(fmt::format("checkpoint: channel of size {}, grid has {}", c.size(), grid_size_));
    if (last_step_ && step <= *last_step_)
        throw ConfigError(fmt::format("checkpoint: step {} after step {}; steps must increase", step, *last_step_));

    std::string buf;
    Out o(buf);
    o.put(record_tag);
    o.put<std::uint64_t>(step);
    o.put(t);
    o.put<std::uint64_t>(psi.n_channels());
    o.put<std::uint64_t>(grid_size_);
    buf.reserve(buf.size() + 16 * grid_size_ * psi.n_channels());
    for (const auto& c : psi.channels)
        for (const cplx& z : c) {
            o.put(z.real());
            o.put(z.imag());
        }
    const std::uint64_t chunk_header = 4 + 4 + 4 + 8;
    if (buf.size() + chunk_header > limit_)
        throw ResourceError(fmt::format("checkpoint payload of {} bytes exceeds the chunk limit of {} bytes",
                                        buf.size(), limit_));
    if (!chunk_.is_open() || chunk_bytes_ + buf.size() > limit_) open_chunk();
    chunk_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    chunk_.flush();
    if (!chunk_) throw IoError(fmt::format("write to checkpoint chunk {} failed", chunk_index_ - 1));
    chunk_bytes_ += buf.size();
    last_step_ = step;
}

CheckpointReader::CheckpointReader(const std::filesystem::path& header_path)
    : dir_(header_path.parent_path()), stem_(header_path.stem().string()) {
    std::ifstream f(header_path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint header '" + header_path.string() + "'");
    In in(f, header_path);
    check_preamble(in, type_header);
    header_.run = in.str();
    header_.config = in.str();
    const auto n_dofs = in.get<std::uint32_t>();
    if (n_dofs == 0 || n_dofs > 64) in.corrupt("dof count out of range");
    for (std::uint32_t k = 0; k < n_dofs; ++k) {
        DofConfig d;
        const auto kind = in.get<std::uint32_t>();
        if (kind > 2) in.corrupt("unknown grid kind");
        d.kind = static_cast<GridKind>(kind);
        d.n_pts = in.get<std::uint64_t>();
        d.mass = in.get<double>();
        d.x_min = in.get<double>();
        d.x_max = in.get<double>();
        d.omega = in.get<double>();
        d.r_e = in.get<double>();
        d.radius = in.get<double>();
        d.m_0 = in.get<std::int32_t>();
        header_.dofs.push_back(d);
    }
    header_.n_channels = in.get<std::uint64_t>();
    grid_size_ = grid_size(header_);
}

bool CheckpointReader::open_next_chunk() {
    if (chunk_.is_open()) chunk_.close();
    chunk_path_ = chunk_path(dir_, stem_, chunk_index_);
    if (!std::filesystem::exists(chunk_path_)) return false;
    chunk_.open(chunk_path_, std::ios::binary);
    if (!chunk_) throw IoError("cannot open checkpoint chunk '" + chunk_path_.string() + "'");
    In in(chunk_, chunk_path_);
    check_preamble(in, type_chunk);
    if (in.get<std::uint64_t>() != chunk_index_) in.corrupt("chunk index does not match its file name");
    ++chunk_index_;
    return true;
}

std::optional<CheckpointFrame> CheckpointReader::next() {
    while (!done_) {
        if (!chunk_.is_open() && !open_next_chunk()) {
            done_ = true;
            break;
        }
        if (chunk_.peek() == std::char_traits<char>::eof()) {
            chunk_.close();
            continue;
        }
        In in(chunk_, chunk_path_);
        if (in.get<std::uint32_t>() != record_tag) in.corrupt("bad record tag");
        CheckpointFrame fr;
        fr.step = in.get<std::uint64_t>();
        fr.t = in.get<double>();
        const auto nu = in.get<std::uint64_t>();
        const auto n = in.get<std::uint64_t>();
        if (nu != header_.n_channels || n != grid_size_)
            in.corrupt(fmt::format("payload shape {} x {} does not match the header ({} x {})", nu, n,
                                   header_.n_channels, grid_size_));
        if (last_step_ && fr.step <= *last_step_)
            in.corrupt(fmt::format("step {} follows step {}; steps must increase", fr.step, *last_step_));
        fr.psi = WaveFunction(nu, n);
        std::vector<double> raw(2 * n);
        for (auto& c : fr.psi.channels) {
            in.read(raw.data(), raw.size() * sizeof(double));
            for (std::size_t i = 0; i < n; ++i) c[i] = cplx(to_le(raw[2 * i]), to_le(raw[2 * i + 1]));
        }
        last_step_ = fr.step;
        return fr;
    }
    return std::nullopt;
}

Checkpoint load_checkpoint(const std::filesystem::path& header_path) {
    CheckpointReader r(header_path);
    Checkpoint c;
    c.header = r.header();
    while (auto f = r.next()) c.frames.push_back(std::move(*f));
    return c;
}

} // namespace qdk

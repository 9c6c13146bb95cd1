#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "qdynkit/checkpoint.hpp"
#include "qdynkit/error.hpp"
#include "test_util.hpp"

using namespace qdk;
namespace fs = std::filesystem;

namespace {

CheckpointHeader header_for(const std::vector<Grid1D>& dofs, std::size_t nu) {
    CheckpointHeader h;
    h.run = "propa";
    h.config = "[space]\n# echo\n";
    for (const auto& g : dofs) h.dofs.push_back(dof_config(g));
    h.n_channels = nu;
    return h;
}

WaveFunction random_state(std::size_t nu, std::size_t n, std::uint64_t seed) {
    WaveFunction psi(nu, n);
    for (std::size_t c = 0; c < nu; ++c) psi.channels[c] = test::random_vector(n, seed + c);
    return psi;
}

bool bitwise_equal(const WaveFunction& a, const WaveFunction& b) {
    if (a.n_channels() != b.n_channels()) return false;
    for (std::size_t c = 0; c < a.n_channels(); ++c) {
        if (a.channels[c].size() != b.channels[c].size()) return false;
        if (std::memcmp(a.channels[c].data(), b.channels[c].data(), a.channels[c].size() * sizeof(cplx)) != 0)
            return false;
    }
    return true;
}

std::string io_error(const fs::path& p) {
    try {
        load_checkpoint(p);
    } catch (const IoError& e) {
        return e.what();
    }
    return "";
}

void patch(const fs::path& p, std::streamoff offset, const void* bytes, std::size_t n) {
    std::fstream f(p, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(offset, offset < 0 ? std::ios::end : std::ios::beg);
    f.write(static_cast<const char*>(bytes), static_cast<std::streamsize>(n));
}

} // namespace

TEST_CASE("checkpoint round trip is bitwise for every grid kind") {
    test::TempDir dir("ckpt_rt");
    const std::vector<Grid1D> dofs{Grid1D::fft(8, -2.0, 3.0, 1.5), Grid1D::hermite(5, 2.0, 0.3, 0.7),
                                   Grid1D::legendre(4, 3.0, 1.25, 1)};
    const CheckpointHeader h = header_for(dofs, 2);
    const std::size_t n = 8 * 5 * 4;

    std::vector<WaveFunction> written;
    {
        CheckpointWriter w(dir.path(), "run", h);
        for (std::uint64_t s = 0; s < 4; ++s) {
            written.push_back(random_state(2, n, 10 * s + 1));
            w.write(3 * s, 0.1 * static_cast<double>(s) - 1e-300, written.back());
        }
        CHECK(w.chunks_written() == 1);
    }
    const Checkpoint c = load_checkpoint(dir / "run.qwp");
    CHECK(c.header.run == "propa");
    CHECK(c.header.config == h.config);
    CHECK(c.header.n_channels == 2);
    REQUIRE(c.header.dofs.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& a = c.header.dofs[k];
        const auto& b = h.dofs[k];
        CHECK(a.kind == b.kind);
        CHECK(a.n_pts == b.n_pts);
        CHECK(a.mass == b.mass);
        CHECK(a.x_min == b.x_min);
        CHECK(a.x_max == b.x_max);
        CHECK(a.omega == b.omega);
        CHECK(a.r_e == b.r_e);
        CHECK(a.radius == b.radius);
        CHECK(a.m_0 == b.m_0);
    }
    REQUIRE(c.frames.size() == 4);
    for (std::size_t s = 0; s < 4; ++s) {
        CHECK(c.frames[s].step == 3 * s);
        CHECK(c.frames[s].t == 0.1 * static_cast<double>(s) - 1e-300);
        CHECK(bitwise_equal(c.frames[s].psi, written[s]));
    }

    // the stored grids rebuild the same points
    const ProductGrid g = checkpoint_grid(c.header);
    for (std::size_t k = 0; k < 3; ++k) {
        const auto p = g.dof(k).points();
        const auto q = dofs[k].points();
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == q[i]);
    }
}

TEST_CASE("payloads roll over into numbered chunks") {
    test::TempDir dir("ckpt_chunks");
    const CheckpointHeader h = header_for({Grid1D::fft(16, 0.0, 1.0, 1.0)}, 1);
    const std::size_t record = 4 + 8 + 8 + 8 + 8 + 16 * 16;
    {
        CheckpointWriter w(dir.path(), "c", h, 20 + 2 * record);
        for (std::uint64_t s = 0; s < 5; ++s) w.write(s, static_cast<double>(s), random_state(1, 16, s));
        CHECK(w.chunks_written() == 3);
    }
    CHECK(fs::exists(dir / "c_0.qwp"));
    CHECK(fs::exists(dir / "c_1.qwp"));
    CHECK(fs::exists(dir / "c_2.qwp"));
    CHECK_FALSE(fs::exists(dir / "c_3.qwp"));
    for (int i = 0; i < 2; ++i) CHECK(fs::file_size(dir / ("c_" + std::to_string(i) + ".qwp")) == 20 + 2 * record);

    const Checkpoint c = load_checkpoint(dir / "c.qwp");
    REQUIRE(c.frames.size() == 5);
    for (std::uint64_t s = 0; s < 5; ++s) CHECK(bitwise_equal(c.frames[s].psi, random_state(1, 16, s)));

    // a payload that can never fit
    CheckpointWriter small(dir.path(), "s", h, 100);
    CHECK_THROWS_AS(small.write(0, 0.0, random_state(1, 16, 0)), ResourceError);
}

TEST_CASE("a rewrite removes stale chunks") {
    test::TempDir dir("ckpt_stale");
    const CheckpointHeader h = header_for({Grid1D::fft(16, 0.0, 1.0, 1.0)}, 1);
    {
        CheckpointWriter w(dir.path(), "c", h, 400);
        for (std::uint64_t s = 0; s < 4; ++s) w.write(s, 0.0, random_state(1, 16, s));
    }
    CHECK(fs::exists(dir / "c_3.qwp"));
    {
        CheckpointWriter w(dir.path(), "c", h, 400);
        w.write(0, 0.0, random_state(1, 16, 7));
    }
    CHECK_FALSE(fs::exists(dir / "c_1.qwp"));
    CHECK(load_checkpoint(dir / "c.qwp").frames.size() == 1);
}

TEST_CASE("writer rejects bad input") {
    test::TempDir dir("ckpt_bad");
    const CheckpointHeader h = header_for({Grid1D::fft(8, 0.0, 1.0, 1.0)}, 2);
    CheckpointWriter w(dir.path(), "c", h);
    CHECK_THROWS_AS(w.write(0, 0.0, random_state(1, 8, 0)), ShapeError);
    CHECK_THROWS_AS(w.write(0, 0.0, random_state(2, 9, 0)), ShapeError);
    w.write(5, 0.0, random_state(2, 8, 0));
    CHECK_THROWS_AS(w.write(5, 0.0, random_state(2, 8, 0)), ConfigError);
    CHECK_THROWS_AS(w.write(4, 0.0, random_state(2, 8, 0)), ConfigError);
    w.write(6, 0.0, random_state(2, 8, 0));
}

TEST_CASE("reader diagnostics name the offending file") {
    test::TempDir dir("ckpt_corrupt");
    const CheckpointHeader h = header_for({Grid1D::fft(8, 0.0, 1.0, 1.0)}, 2);
    const auto write_run = [&] {
        CheckpointWriter w(dir.path(), "c", h);
        for (std::uint64_t s = 0; s < 3; ++s) w.write(s, 0.0, random_state(2, 8, s));
    };

    SUBCASE("truncated chunk") {
        write_run();
        const auto chunk = dir / "c_0.qwp";
        fs::resize_file(chunk, fs::file_size(chunk) - 5);
        const auto e = io_error(dir / "c.qwp");
        CHECK(e.find("c_0.qwp") != std::string::npos);
        CHECK(e.find("truncated") != std::string::npos);
    }
    SUBCASE("missing header") {
        CHECK(io_error(dir / "nothing.qwp").find("nothing.qwp") != std::string::npos);
    }
    SUBCASE("bad magic") {
        write_run();
        patch(dir / "c.qwp", 0, "XXXX", 4);
        const auto e = io_error(dir / "c.qwp");
        CHECK(e.find("magic") != std::string::npos);
    }
    SUBCASE("unsupported version") {
        write_run();
        const std::uint32_t v = 2;
        patch(dir / "c_0.qwp", 4, &v, 4);
        const auto e = io_error(dir / "c.qwp");
        CHECK(e.find("c_0.qwp") != std::string::npos);
        CHECK(e.find("version 2") != std::string::npos);
    }
    SUBCASE("payload shape differs from the header") {
        write_run();
        const std::uint64_t nu = 3;
        patch(dir / "c.qwp", -8, &nu, 8);
        const auto e = io_error(dir / "c.qwp");
        CHECK(e.find("c_0.qwp") != std::string::npos);
        CHECK(e.find("does not match the header") != std::string::npos);
    }
    SUBCASE("non-increasing steps") {
        write_run();
        // step of the second record
        const std::uint64_t step = 0;
        const std::streamoff record = 4 + 8 + 8 + 8 + 8 + 2 * 16 * 8;
        patch(dir / "c_0.qwp", 20 + record + 4, &step, 8);
        const auto e = io_error(dir / "c.qwp");
        CHECK(e.find("steps must increase") != std::string::npos);
    }
    SUBCASE("chunk index mismatch") {
        write_run();
        const std::uint64_t idx = 9;
        patch(dir / "c_0.qwp", 12, &idx, 8);
        CHECK(io_error(dir / "c.qwp").find("chunk index") != std::string::npos);
    }
}

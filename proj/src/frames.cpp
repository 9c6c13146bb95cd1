#include "qdynkit/frames.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>

#include <fmt/format.h>
#include <png.h>

#include "qdynkit/error.hpp"
#include "qdynkit/observe.hpp"

namespace qdk {

std::string to_string(FrameKind k) {
    switch (k) {
    case FrameKind::curve: return "curve";
    case FrameKind::wigner: return "wigner";
    case FrameKind::flux: return "flux";
    case FrameKind::reduced: return "reduced";
    default: return "density";
    }
}

FrameKind frame_kind_from_string(const std::string& s) {
    if (s == "curve") return FrameKind::curve;
    if (s == "wigner" || s == "contour" || s == "surface") return FrameKind::wigner;
    if (s == "flux") return FrameKind::flux;
    if (s == "reduced") return FrameKind::reduced;
    if (s == "density") return FrameKind::density;
    throw ConfigError("unknown frame kind '" + s + "' (valid: curve, wigner, flux, reduced, density)");
}

namespace {

const char* kinds_for(std::size_t n_dofs) {
    switch (n_dofs) {
    case 1: return "curve, wigner, flux, reduced";
    case 2: return "density, flux, reduced";
    case 3: return "density, reduced";
    default: return "reduced";
    }
}

bool all_fft(const ProductGrid& g) {
    for (const auto& d : g.dofs())
        if (d.kind() != GridKind::fft) return false;
    return true;
}

/// Source index in transform order for ascending momentum position j.
std::size_t fft_source(std::size_t j, std::size_t n) { return (j + (n + 1) / 2) % n; }

std::vector<double> fbr_axis(const Grid1D& g) {
    std::vector<double> a(g.size());
    for (std::size_t j = 0; j < g.size(); ++j)
        a[j] = g.kind() == GridKind::fft ? g.momenta()[fft_source(j, g.size())] : static_cast<double>(j);
    return a;
}

std::vector<double> dvr_axis(const Grid1D& g) { return {g.points().begin(), g.points().end()}; }

/// FBR coefficients along every dof, fft dofs reordered by ascending momentum.
std::vector<cplx> to_fbr(const ProductGrid& grid, const std::vector<cplx>& values) {
    std::vector<cplx> c = values;
    for (std::size_t k = 0; k < grid.n_dofs(); ++k)
        for_each_line(grid.shape(), k, c, [&](std::span<cplx> line) { dvr_to_fbr_inplace(grid.dof(k), line); });
    std::vector<cplx> out(c.size());
    const auto& shape = grid.shape();
    const auto& strides = grid.strides();
    for (std::size_t p = 0; p < c.size(); ++p) {
        std::size_t src = 0;
        for (std::size_t k = 0; k < grid.n_dofs(); ++k) {
            std::size_t i = grid.index_along(p, k);
            if (grid.dof(k).kind() == GridKind::fft) i = fft_source(i, shape[k]);
            src += i * strides[k];
        }
        out[p] = c[src];
    }
    return out;
}

} // namespace

void check_frame_kind(FrameKind kind, const ProductGrid& grid) {
    const std::size_t n = grid.n_dofs();
    auto fail = [&](const std::string& need) {
        throw ConfigError(fmt::format("frame kind '{}' needs {}; this run has {} dof{} (valid here: {})",
                                      to_string(kind), need, n, n == 1 ? "" : "s", kinds_for(n)));
    };
    switch (kind) {
    case FrameKind::curve:
        if (n != 1) fail("a 1-dof system");
        break;
    case FrameKind::wigner:
        if (n != 1) fail("a 1-dof system");
        if (!all_fft(grid)) fail("an fft grid");
        break;
    case FrameKind::flux:
        if (n > 2) fail("a 1- or 2-dof system");
        if (!all_fft(grid)) fail("fft grids");
        break;
    case FrameKind::density:
        if (n < 2 || n > 3) fail("a 2- or 3-dof system");
        break;
    case FrameKind::reduced: break;
    }
}

std::vector<Frame> make_frames(FrameKind kind, const SystemSpec& sys, const WaveFunction& psi, std::uint64_t step,
                               double t, bool fbr) {
    const ProductGrid& grid = sys.grid;
    check_frame_kind(kind, grid);
    check_shape(sys, psi);
    std::vector<Frame> out;
    Frame f;
    f.name = to_string(kind);
    f.step = step;
    f.t = t;

    switch (kind) {
    case FrameKind::curve: {
        const Grid1D& g = grid.dof(0);
        const std::size_t nu = psi.n_channels();
        f.shape = {nu, g.size()};
        f.axes.emplace_back(nu);
        for (std::size_t c = 0; c < nu; ++c) f.axes[0][c] = static_cast<double>(c + 1);
        f.axes.push_back(fbr ? fbr_axis(g) : dvr_axis(g));
        f.complex = true;
        for (const auto& ch : psi.channels) {
            const auto v = fbr ? to_fbr(grid, ch) : ch;
            for (const cplx& z : v) {
                f.data.push_back(z.real());
                f.data.push_back(z.imag());
            }
        }
        out.push_back(std::move(f));
        break;
    }
    case FrameKind::wigner: {
        const Grid1D& g = grid.dof(0);
        Eigen::MatrixXd w;
        WignerResult r;
        for (const auto& ch : psi.channels) {
            r = wigner(g, ch);
            if (w.size() == 0)
                w = r.w;
            else
                w += r.w;
        }
        f.shape = {static_cast<std::size_t>(w.rows()), static_cast<std::size_t>(w.cols())};
        f.axes = {r.x, r.p};
        f.data.resize(w.size());
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) f.data[static_cast<std::size_t>(i * w.cols() + j)] = w(i, j);
        out.push_back(std::move(f));
        break;
    }
    case FrameKind::flux: {
        const auto j = flux(sys, psi);
        if (grid.n_dofs() == 1) {
            f.shape = {grid.size()};
            f.axes = {dvr_axis(grid.dof(0))};
            f.data = j[0];
        } else {
            f.shape = {2, grid.shape()[0], grid.shape()[1]};
            f.axes = {{1.0, 2.0}, dvr_axis(grid.dof(0)), dvr_axis(grid.dof(1))};
            f.data = j[0];
            f.data.insert(f.data.end(), j[1].begin(), j[1].end());
        }
        out.push_back(std::move(f));
        break;
    }
    case FrameKind::density: {
        f.shape = grid.shape();
        for (const auto& g : grid.dofs()) f.axes.push_back(fbr ? fbr_axis(g) : dvr_axis(g));
        f.data.assign(grid.size(), 0.0);
        for (const auto& ch : psi.channels) {
            const auto v = fbr ? to_fbr(grid, ch) : ch;
            for (std::size_t p = 0; p < v.size(); ++p) f.data[p] += std::norm(v[p]);
        }
        out.push_back(std::move(f));
        break;
    }
    case FrameKind::reduced: {
        for (std::size_t k = 0; k < grid.n_dofs(); ++k) {
            const auto r = reduced_density(grid, psi, k);
            Frame fk;
            fk.name = fmt::format("reduced_{}", k + 1);
            fk.step = step;
            fk.t = t;
            const auto n = static_cast<std::size_t>(r.rho.rows());
            fk.shape = {n, n};
            fk.axes = {dvr_axis(grid.dof(k)), dvr_axis(grid.dof(k))};
            fk.complex = true;
            for (Eigen::Index i = 0; i < r.rho.rows(); ++i)
                for (Eigen::Index j = 0; j < r.rho.cols(); ++j) {
                    fk.data.push_back(r.rho(i, j).real());
                    fk.data.push_back(r.rho(i, j).imag());
                }
            fk.purity = r.purity;
            out.push_back(std::move(fk));
        }
        break;
    }
    }
    return out;
}

// ---------------------------------------------------------------- binary

namespace {

constexpr char frame_magic[4] = {'Q', 'W', 'F', '1'};
constexpr std::uint32_t frame_version = 1;

template <class T>
T le(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        std::reverse(b, b + sizeof(T));
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

template <class T>
void put(std::string& buf, T v) {
    v = le(v);
    buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::filesystem::path& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (in.gcount() != sizeof(T)) throw IoError("frame file '" + path.string() + "' is truncated");
    return le(v);
}

std::size_t element_count(const Frame& f) {
    std::size_t n = 1;
    for (auto s : f.shape) n *= s;
    return f.complex ? 2 * n : n;
}

} // namespace

void write_frame(const std::filesystem::path& path, const Frame& f) {
    if (f.data.size() != element_count(f)) throw ShapeError("frame data does not match its shape");
    if (f.axes.size() != f.shape.size()) throw ShapeError("frame needs one axis per dimension");
    std::string buf(frame_magic, 4);
    put(buf, frame_version);
    put<std::uint64_t>(buf, f.name.size());
    buf += f.name;
    put<std::uint64_t>(buf, f.step);
    put(buf, f.t);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(f.shape.size()));
    for (auto s : f.shape) put<std::uint64_t>(buf, s);
    for (std::size_t k = 0; k < f.shape.size(); ++k) {
        if (f.axes[k].size() != f.shape[k]) throw ShapeError("frame axis length does not match its dimension");
        for (double a : f.axes[k]) put(buf, a);
    }
    put<std::uint8_t>(buf, f.complex ? 1 : 0);
    for (double d : f.data) put(buf, d);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("cannot write frame '" + path.string() + "'");
}

Frame read_frame(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open frame '" + path.string() + "'");
    char m[4];
    in.read(m, 4);
    if (in.gcount() != 4 || std::memcmp(m, frame_magic, 4) != 0)
        throw IoError("'" + path.string() + "' is not a QWF1 frame");
    if (get<std::uint32_t>(in, path) != frame_version)
        throw IoError("frame '" + path.string() + "' has an unsupported version");
    Frame f;
    const auto len = get<std::uint64_t>(in, path);
    if (len > 4096) throw IoError("frame '" + path.string() + "' is corrupt");
    f.name.resize(len);
    in.read(f.name.data(), static_cast<std::streamsize>(len));
    f.step = get<std::uint64_t>(in, path);
    f.t = get<double>(in, path);
    const auto rank = get<std::uint32_t>(in, path);
    if (rank > 8) throw IoError("frame '" + path.string() + "' is corrupt");
    for (std::uint32_t k = 0; k < rank; ++k) f.shape.push_back(get<std::uint64_t>(in, path));
    for (std::uint32_t k = 0; k < rank; ++k) {
        f.axes.emplace_back(f.shape[k]);
        for (auto& a : f.axes.back()) a = get<double>(in, path);
    }
    f.complex = get<std::uint8_t>(in, path) != 0;
    f.data.resize(element_count(f));
    for (auto& d : f.data) d = get<double>(in, path);
    return f;
}

// ---------------------------------------------------------------- raster

namespace {

struct Rgb {
    std::uint8_t r = 255, g = 255, b = 255;
};

static_assert(sizeof(Rgb) == 3);

struct Image {
    std::size_t w = 0, h = 0;
    std::vector<Rgb> px;
    Image(std::size_t w_, std::size_t h_) : w(w_), h(h_), px(w_ * h_) {}
    Rgb& at(std::size_t x, std::size_t y) { return px[y * w + x]; }
};

Rgb lerp(Rgb a, Rgb b, double t) {
    auto c = [t](std::uint8_t x, std::uint8_t y) {
        return static_cast<std::uint8_t>(std::lround(x + (static_cast<double>(y) - x) * t));
    };
    return {c(a.r, b.r), c(a.g, b.g), c(a.b, b.b)};
}

Rgb sequential(double t) {
    static constexpr std::array<Rgb, 5> anchors{
        Rgb{68, 1, 84}, Rgb{59, 82, 139}, Rgb{33, 145, 140}, Rgb{94, 201, 98}, Rgb{253, 231, 37}};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), 3);
    return lerp(anchors[i], anchors[i + 1], t - static_cast<double>(i));
}

Rgb diverging(double t) {
    t = std::clamp(t, -1.0, 1.0);
    const Rgb white{247, 247, 247};
    return t < 0.0 ? lerp(white, Rgb{59, 76, 192}, -t) : lerp(white, Rgb{180, 4, 38}, t);
}

/// Hue from the phase, value from the magnitude.
Rgb phase_color(cplx z, double vmax) {
    const double v = vmax > 0.0 ? std::clamp(std::abs(z) / vmax, 0.0, 1.0) : 0.0;
    double h = (std::arg(z) + std::numbers::pi) / (2.0 * std::numbers::pi) * 6.0;
    if (h >= 6.0) h = 0.0;
    const int i = static_cast<int>(h);
    const double f = h - i;
    const double p = 0.0, q = 1.0 - f, s = f;
    double r = 0, g = 0, b = 0;
    switch (i) {
    case 0: r = 1; g = s; b = p; break;
    case 1: r = q; g = 1; b = p; break;
    case 2: r = p; g = 1; b = s; break;
    case 3: r = p; g = q; b = 1; break;
    case 4: r = s; g = p; b = 1; break;
    default: r = 1; g = p; b = q; break;
    }
    auto c = [v](double x) { return static_cast<std::uint8_t>(std::lround(255.0 * v * x)); };
    return {c(r), c(g), c(b)};
}

std::size_t upscale(std::size_t n) { return std::max<std::size_t>(1, 400 / std::max<std::size_t>(n, 1)); }

/// nx x ny matrix; first index along the image x axis, second upwards.
template <class Color>
Image matrix_image(std::size_t nx, std::size_t ny, Color&& color) {
    const std::size_t sx = upscale(nx), sy = upscale(ny);
    Image img(nx * sx, ny * sy);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) {
            const Rgb c = color(i, j);
            for (std::size_t a = 0; a < sx; ++a)
                for (std::size_t b = 0; b < sy; ++b) img.at(i * sx + a, (ny - 1 - j) * sy + b) = c;
        }
    return img;
}

Image real_matrix(std::size_t nx, std::size_t ny, const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double amax = std::max(std::abs(*lo), std::abs(*hi));
    if (*lo < -1e-3 * amax)
        return matrix_image(nx, ny, [&](std::size_t i, std::size_t j) { return diverging(v[i * ny + j] / amax); });
    const double span = *hi - *lo;
    return matrix_image(nx, ny, [&](std::size_t i, std::size_t j) {
        return sequential(span > 0.0 ? (v[i * ny + j] - *lo) / span : 0.0);
    });
}

/// Bars from the bottom (or from the middle for signed data).
template <class Height, class Color>
Image bars(std::size_t n, std::size_t rows, Height&& height, Color&& color, bool signed_data) {
    const std::size_t s = std::max<std::size_t>(1, 512 / std::max<std::size_t>(n, 1));
    const std::size_t band = 200;
    Image img(n * s, rows * band);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < n; ++i) {
            const double hgt = std::clamp(height(r, i), -1.0, 1.0);
            const Rgb c = color(r, i);
            const double base = signed_data ? band / 2.0 : static_cast<double>(band - 1);
            const double top = base - hgt * (signed_data ? band / 2.0 - 1.0 : band - 1.0);
            const auto y0 = static_cast<std::size_t>(std::lround(std::min(base, top)));
            const auto y1 = static_cast<std::size_t>(std::lround(std::max(base, top)));
            for (std::size_t y = y0; y <= y1 && y < band; ++y)
                for (std::size_t a = 0; a < s; ++a) img.at(i * s + a, r * band + y) = c;
        }
    return img;
}

Image render(const Frame& f) {
    const auto z = [&](std::size_t k) { return cplx(f.data[2 * k], f.data[2 * k + 1]); };
    if (f.name == "curve") {
        const std::size_t nu = f.shape[0], n = f.shape[1];
        double vmax = 0.0;
        for (std::size_t k = 0; k < nu * n; ++k) vmax = std::max(vmax, std::abs(z(k)));
        return bars(
            n, nu,
            [&](std::size_t r, std::size_t i) { return vmax > 0.0 ? std::norm(z(r * n + i)) / (vmax * vmax) : 0.0; },
            [&](std::size_t r, std::size_t i) { return phase_color(z(r * n + i), std::abs(z(r * n + i))); }, false);
    }
    if (f.name == "flux" && f.shape.size() == 1) {
        double amax = 0.0;
        for (double d : f.data) amax = std::max(amax, std::abs(d));
        return bars(
            f.shape[0], 1, [&](std::size_t, std::size_t i) { return amax > 0.0 ? f.data[i] / amax : 0.0; },
            [](std::size_t, std::size_t) { return Rgb{33, 90, 160}; }, true);
    }
    if (f.name == "flux") {
        const std::size_t nx = f.shape[1], ny = f.shape[2];
        std::vector<double> mag(nx * ny);
        for (std::size_t p = 0; p < nx * ny; ++p) mag[p] = std::hypot(f.data[p], f.data[nx * ny + p]);
        return real_matrix(nx, ny, mag);
    }
    if (f.complex) {
        const std::size_t nx = f.shape[0], ny = f.shape[1];
        double vmax = 0.0;
        for (std::size_t k = 0; k < nx * ny; ++k) vmax = std::max(vmax, std::abs(z(k)));
        return matrix_image(nx, ny, [&](std::size_t i, std::size_t j) { return phase_color(z(i * ny + j), vmax); });
    }
    if (f.shape.size() == 3) {
        const std::size_t nx = f.shape[0], ny = f.shape[1], nz = f.shape[2];
        std::vector<double> proj(nx * ny, 0.0);
        for (std::size_t p = 0; p < nx * ny; ++p)
            for (std::size_t k = 0; k < nz; ++k) proj[p] = std::max(proj[p], f.data[p * nz + k]);
        return real_matrix(nx, ny, proj);
    }
    return real_matrix(f.shape[0], f.shape[1], f.data);
}

} // namespace

void write_png(const std::filesystem::path& path, const Frame& frame) {
    if (frame.data.size() != element_count(frame) || frame.shape.empty())
        throw ShapeError("frame data does not match its shape");
    const Image img = render(frame);

    FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw IoError("cannot write '" + path.string() + "'");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("libpng initialization failed");
    }
    std::vector<png_bytep> rows(img.h);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("PNG encoding of '" + path.string() + "' failed");
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.w), static_cast<png_uint_32>(img.h), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t y = 0; y < img.h; ++y)
        rows[y] = reinterpret_cast<png_bytep>(const_cast<Rgb*>(img.px.data() + y * img.w));
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fclose(fp) != 0) throw IoError("cannot write '" + path.string() + "'");
}

} // namespace qdk

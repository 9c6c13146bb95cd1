#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qdynkit/error.hpp"
#include "qdynkit/grids.hpp"
#include "test_util.hpp"

using namespace qdk;
using qdk::test::max_abs;
using qdk::test::max_abs_diff;
using qdk::test::random_vector;

namespace {

constexpr double pi = std::numbers::pi;

double weighted_norm2(const Grid1D& g, std::span<const cplx> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += g.weights()[i] * std::norm(v[i]);
    return s;
}

double norm2(std::span<const cplx> v) {
    double s = 0.0;
    for (auto x : v) s += std::norm(x);
    return s;
}

cplx weighted_dot(const Grid1D& g, std::span<const cplx> a, std::span<const cplx> b) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += g.weights()[i] * std::conj(a[i]) * b[i];
    return s;
}

std::vector<Grid1D> sample_grids(std::size_t n) {
    std::vector<Grid1D> grids;
    if (n >= 2) grids.push_back(Grid1D::fft(n, -3.0, 5.0, 2.0));
    grids.push_back(Grid1D::hermite(n, 3.0, 0.7, 0.4));
    grids.push_back(Grid1D::legendre(n, 1.5, 0.8, 0));
    grids.push_back(Grid1D::legendre(n, 1.5, 0.8, 2));
    return grids;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

} // namespace

TEST_CASE("fft grid construction") {
    auto g = Grid1D::fft(256, 0.7, 10.0, 1728.539);
    CHECK(g.size() == 256);
    CHECK(g.spacing() == doctest::Approx(9.3 / 256).epsilon(1e-15));
    CHECK(g.points()[0] == 0.7);
    CHECK(g.points()[255] == doctest::Approx(10.0 - 9.3 / 256).epsilon(1e-14));

    auto s = Grid1D::fft(2, 0.0, 1.0, 1.0);
    CHECK(s.points()[0] == 0.0);
    CHECK(s.points()[1] == 0.5);
    CHECK(s.weights()[0] == 0.5);
    CHECK(s.weights()[1] == 0.5);

    auto m = Grid1D::fft(8, -4.0, 4.0, 1.0);
    double kmax = 0.0;
    for (double k : m.momenta()) {
        kmax = std::max(kmax, std::abs(k));
        double steps = k / (pi / 4.0);
        CHECK(std::abs(steps - std::round(steps)) < 1e-14);
    }
    CHECK(kmax == doctest::Approx(pi).epsilon(1e-15));
    CHECK(m.momenta()[0] == 0.0);
    CHECK(m.momenta()[1] == doctest::Approx(pi / 4));
    CHECK(m.momenta()[7] == doctest::Approx(-pi / 4));
}

TEST_CASE("fft grid errors name the field") {
    CHECK_THROWS_WITH_AS(Grid1D::fft(1, 0, 1, 1), doctest::Contains("n_pts"), ConfigError);
    CHECK_THROWS_WITH_AS(Grid1D::fft(4, 1, 1, 1), doctest::Contains("x_max"), ConfigError);
    CHECK_THROWS_WITH_AS(Grid1D::fft(4, 0, 1, 0), doctest::Contains("mass"), ConfigError);
    CHECK_THROWS_AS(Grid1D::hermite(4, 1, -1, 0), ConfigError);
    CHECK_THROWS_AS(Grid1D::legendre(4, 1, 0, 0), ConfigError);
    CHECK_THROWS_AS(Grid1D::legendre(4, 1, 1, -1), ConfigError);
}

TEST_CASE("hermite nodes and weights against closed-form Gauss-Hermite rule") {
    auto one = Grid1D::hermite(1, 1.0, 1.0, 0.0);
    CHECK(one.points()[0] == 0.0);

    auto two = Grid1D::hermite(2, 1.0, 1.0, 0.0);
    CHECK(two.points()[0] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(two.points()[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

    const double mass = 1728.539, omega = 0.0172, r_e = 1.821;
    auto g = Grid1D::hermite(25, mass, omega, r_e);
    const double scale = std::sqrt(mass * omega);
    double centre = 0.0;
    for (std::size_t i = 0; i < 25; ++i) {
        const double xi = (g.points()[i] - r_e) * scale;
        centre += g.points()[i] / 25.0;
        // H_N(xi) = 0 relative to its typical size
        CHECK(std::abs(std::hermite(25, xi)) / std::abs(std::hermite(24, xi)) < 1e-9);
        // w_G = 2^{N-1} N! sqrt(pi) / (N^2 H_{N-1}(xi)^2); DVR weight adds e^{xi^2}/scale
        const double wg = std::pow(2.0, 24) * factorial(25) * std::sqrt(pi) /
                          (625.0 * std::pow(std::hermite(24, xi), 2));
        CHECK(g.weights()[i] == doctest::Approx(wg * std::exp(xi * xi) / scale).epsilon(1e-10));
    }
    CHECK(centre == doctest::Approx(r_e).epsilon(1e-13));
}

TEST_CASE("hermite quadrature is exact for Gaussian-weighted polynomials") {
    for (std::size_t n : {1u, 2u, 5u, 12u, 30u}) {
        auto g = Grid1D::hermite(n, 2.0, 0.5, 0.3);
        const double scale = std::sqrt(2.0 * 0.5);
        for (std::size_t p = 0; p <= 2 * n - 1; ++p) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double xi = (g.points()[i] - 0.3) * scale;
                sum += g.weights()[i] * scale * std::pow(xi, static_cast<double>(p)) *
                       std::exp(-xi * xi);
            }
            const double exact = (p % 2 == 1) ? 0.0 : std::tgamma((p + 1.0) / 2.0);
            // odd moments cancel; compare against the even neighbour's size
            const double size = std::tgamma((2.0 * std::ceil(p / 2.0) + 1.0) / 2.0);
            CHECK(std::abs(sum - exact) <= 1e-13 * size);
        }
    }
}

TEST_CASE("legendre small rules") {
    auto one = Grid1D::legendre(1, 1.0, 1.0, 0);
    CHECK(one.points()[0] == 0.0);
    CHECK(one.weights()[0] == doctest::Approx(2.0).epsilon(1e-15));

    auto two = Grid1D::legendre(2, 1.0, 1.0, 0);
    CHECK(two.points()[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(two.points()[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(two.weights()[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(two.weights()[1] == doctest::Approx(1.0).epsilon(1e-15));

    auto g = Grid1D::legendre(16, 1.0, 1.0, 0);
    double s0 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < 16; ++i) {
        s0 += g.weights()[i];
        s2 += g.weights()[i] * g.points()[i] * g.points()[i];
        CHECK(g.points()[i] > -1.0);
        CHECK(g.points()[i] < 1.0);
    }
    CHECK(std::abs(s0 - 2.0) < 1e-14);
    CHECK(std::abs(s2 - 2.0 / 3.0) < 1e-14);
}

TEST_CASE("legendre weights match the derivative formula") {
    auto g = Grid1D::legendre(20, 1.0, 1.0, 0);
    for (std::size_t i = 0; i < 20; ++i) {
        const double x = g.points()[i];
        CHECK(std::abs(std::legendre(20, x)) < 1e-13);
        const double dp = 20.0 * (x * std::legendre(20, x) - std::legendre(19, x)) / (x * x - 1.0);
        CHECK(g.weights()[i] == doctest::Approx(2.0 / ((1.0 - x * x) * dp * dp)).epsilon(1e-12));
    }
}

TEST_CASE("legendre quadrature exactness for monomials") {
    for (std::size_t n = 1; n <= 24; ++n) {
        auto g = Grid1D::legendre(n, 1.0, 1.0, 0);
        for (std::size_t p = 0; p <= 2 * n - 1; ++p) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                sum += g.weights()[i] * std::pow(g.points()[i], static_cast<double>(p));
            const double exact = (p % 2 == 1) ? 0.0 : 2.0 / (p + 1.0);
            CHECK(std::abs(sum - exact) <= 1e-13);
        }
    }
}

TEST_CASE("associated legendre basis matches the library spherical harmonics") {
    for (int m : {0, 1, 3}) {
        auto g = Grid1D::legendre(10, 1.0, 1.0, m);
        for (Eigen::Index row = 0; row < 10; ++row) {
            const unsigned l = static_cast<unsigned>(m + row);
            // sph_legendre carries 1/sqrt(2 pi) and the Condon-Shortley phase
            double sign = 0.0;
            for (Eigen::Index i = 0; i < 10; ++i) {
                const double theta = std::acos(g.points()[static_cast<std::size_t>(i)]);
                const double ref = std::sqrt(2.0 * pi) * std::sph_legendre(l, static_cast<unsigned>(m), theta);
                if (sign == 0.0 && std::abs(ref) > 1e-3) sign = (ref * g.basis()(row, i) > 0) ? 1 : -1;
                CHECK(std::abs(sign * ref - g.basis()(row, i)) < 1e-11);
            }
        }
    }
}

TEST_CASE("basis functions are orthonormal under the DVR weights") {
    for (std::size_t n : {1u, 3u, 16u, 40u}) {
        for (const auto& g : sample_grids(n)) {
            if (g.kind() == GridKind::fft) continue;
            Eigen::MatrixXd b = g.basis();
            Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(g.weights().data(), b.cols());
            Eigen::MatrixXd s = b * w.asDiagonal() * b.transpose();
            CHECK((s - Eigen::MatrixXd::Identity(b.rows(), b.rows())).cwiseAbs().maxCoeff() < 1e-12);
            Eigen::MatrixXd u = b * w.cwiseSqrt().asDiagonal();
            CHECK((u - g.unitary()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("fft transform of a constant has only the k = 0 coefficient") {
    auto g = Grid1D::fft(8, 0.0, 4.0, 1.0);
    std::vector<cplx> v(8, 1.0);
    auto c = dvr_to_fbr(g, v);
    CHECK(std::abs(c[0]) == doctest::Approx(std::sqrt(4.0)).epsilon(1e-14));
    for (std::size_t n = 1; n < 8; ++n) CHECK(std::abs(c[n]) < 1e-14);
}

TEST_CASE("legendre transform of P_2 picks out the l = 2 coefficient") {
    auto g = Grid1D::legendre(4, 1.0, 1.0, 0);
    std::vector<cplx> v(4);
    for (std::size_t i = 0; i < 4; ++i) v[i] = std::legendre(2, g.points()[i]);
    auto c = dvr_to_fbr(g, v);
    CHECK(std::abs(c[0]) < 1e-14);
    CHECK(std::abs(c[1]) < 1e-14);
    CHECK(std::abs(c[3]) < 1e-14);
    CHECK(std::abs(c[2]) == doctest::Approx(std::sqrt(2.0 / 5.0)).epsilon(1e-13));
}

TEST_CASE("round trip and Parseval for all kinds, N = 1..64") {
    std::uint64_t seed = 1;
    for (std::size_t n = 1; n <= 64; ++n) {
        for (const auto& g : sample_grids(n)) {
            auto v = random_vector(n, seed++);
            auto c = dvr_to_fbr(g, v);
            auto back = fbr_to_dvr(g, c);
            INFO("kind ", to_string(g.kind()), " n ", n, " m ", g.m_quantum());
            CHECK(max_abs_diff(back, v) <= 1e-12 * max_abs(v));
            const double lhs = weighted_norm2(g, v);
            CHECK(std::abs(lhs - norm2(c)) <= 1e-12 * lhs);
        }
    }
}

TEST_CASE("transforms reject wrong lengths") {
    auto g = Grid1D::fft(8, 0, 1, 1);
    std::vector<cplx> v(7);
    CHECK_THROWS_AS(dvr_to_fbr(g, v), ShapeError);
    CHECK_THROWS_AS(fbr_to_dvr(g, v), ShapeError);
    CHECK_THROWS_AS(apply_kinetic(g, v), ShapeError);
}

TEST_CASE("plane waves on the ladder are kinetic eigenfunctions") {
    auto g = Grid1D::fft(32, -2.0, 6.0, 1.7);
    for (std::size_t n = 0; n < 32; ++n) {
        const double k = g.momenta()[n];
        std::vector<cplx> v(32);
        for (std::size_t i = 0; i < 32; ++i) v[i] = std::exp(cplx(0.0, k * g.points()[i]));
        auto t = apply_kinetic(g, v);
        for (std::size_t i = 0; i < 32; ++i)
            CHECK(std::abs(t[i] - k * k / (2 * 1.7) * v[i]) < 1e-12 * std::max(1.0, k * k));
    }
}

TEST_CASE("legendre P_3 is an eigenfunction of L^2 / 2MR^2") {
    const double mass = 2.0, radius = 1.5;
    auto g = Grid1D::legendre(8, mass, radius, 0);
    std::vector<cplx> v(8);
    for (std::size_t i = 0; i < 8; ++i) v[i] = std::legendre(3, g.points()[i]);
    auto t = apply_kinetic(g, v);
    const double e = 12.0 / (2.0 * mass * radius * radius);
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(t[i] - e * v[i]) < 1e-13);
}

TEST_CASE("hermite ground state has kinetic energy omega/4") {
    const double mass = 3.0, omega = 0.7, r_e = 0.4;
    auto g = Grid1D::hermite(12, mass, omega, r_e);
    std::vector<cplx> v(12);
    for (std::size_t i = 0; i < 12; ++i) {
        const double y = g.points()[i] - r_e;
        v[i] = std::pow(mass * omega / pi, 0.25) * std::exp(-0.5 * mass * omega * y * y);
    }
    CHECK(weighted_norm2(g, v) == doctest::Approx(1.0).epsilon(1e-13));
    auto t = apply_kinetic(g, v);
    CHECK(weighted_dot(g, v, t).real() == doctest::Approx(omega / 4).epsilon(1e-13));
}

TEST_CASE("kinetic operator is positive") {
    std::uint64_t seed = 100;
    for (std::size_t n : {1u, 2u, 7u, 32u}) {
        for (const auto& g : sample_grids(n)) {
            auto v = random_vector(n, seed++);
            auto t = apply_kinetic(g, v);
            CHECK(weighted_dot(g, v, t).real() >= -1e-12 * weighted_norm2(g, v));
        }
    }
}

TEST_CASE("kinetic DVR matrix: symmetry and agreement with apply_kinetic") {
    auto two = kinetic_matrix_dvr(Grid1D::fft(2, 0.0, 1.0, 1.0));
    CHECK(two(0, 0) == doctest::Approx(two(1, 1)).epsilon(1e-15));
    CHECK(two(0, 1) == two(1, 0));

    std::uint64_t seed = 500;
    for (std::size_t n : {1u, 2u, 5u, 16u, 33u, 64u}) {
        for (const auto& g : sample_grids(n)) {
            Eigen::MatrixXd t = kinetic_matrix_dvr(g);
            CHECK((t - t.transpose()).cwiseAbs().maxCoeff() < 1e-12);
            // T_dvr acts on sqrt(w) Psi
            auto v = random_vector(n, seed++);
            auto ref = apply_kinetic(g, v);
            Eigen::VectorXcd x(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i)) = std::sqrt(g.weights()[i]) * v[i];
            Eigen::VectorXcd y = t.cast<cplx>() * x;
            double err = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cplx r = std::sqrt(g.weights()[i]) * ref[i];
                err = std::max(err, std::abs(y(static_cast<Eigen::Index>(i)) - r));
                scale = std::max(scale, std::abs(r));
            }
            CHECK(err <= 1e-12 * std::max(scale, 1.0));
        }
    }
}

TEST_CASE("kinetic maximum equals the largest DVR-matrix eigenvalue") {
    for (const auto& g : sample_grids(20)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kinetic_matrix_dvr(g));
        CHECK(g.kinetic_max() == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-12));
    }
}

TEST_CASE("kinetic cap clips the spectrum") {
    auto g = Grid1D::fft(16, 0.0, 4.0, 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kinetic_matrix_dvr(g, 3.0));
    CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS_AS(kinetic_matrix_dvr(Grid1D::hermite(4, 1, 1, 0), 1.0), UnsupportedError);
}

TEST_CASE("momentum operator") {
    auto g = Grid1D::fft(64, -10.0, 10.0, 1.0);
    std::vector<cplx> v(64);
    const double k = g.momenta()[3];
    for (std::size_t i = 0; i < 64; ++i) v[i] = std::exp(cplx(0.0, k * g.points()[i]));
    auto p = v;
    apply_momentum_inplace(g, p);
    for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(p[i] - k * v[i]) < 1e-12);

    // hermite: <1|p|0> for the HO ladder is i sqrt(M omega / 2)
    auto h = Grid1D::hermite(6, 2.0, 0.5, 0.0);
    std::vector<cplx> c0(6, 0.0);
    c0[0] = 1.0;
    auto psi = fbr_to_dvr(h, c0);
    apply_momentum_inplace(h, psi);
    auto c = dvr_to_fbr(h, psi);
    CHECK(std::abs(c[1] - cplx(0.0, std::sqrt(0.5))) < 1e-13);

    auto l = Grid1D::legendre(4, 1, 1, 0);
    std::vector<cplx> lv(4, 1.0);
    CHECK_THROWS_AS(apply_momentum_inplace(l, lv), UnsupportedError);
}

TEST_CASE("product grid") {
    ProductGrid pg({Grid1D::fft(4, 0.0, 2.0, 1.0), Grid1D::legendre(3, 1.0, 1.0, 0)});
    CHECK(pg.size() == 12);
    CHECK(pg.shape() == std::vector<std::size_t>{4, 3});
    CHECK(pg.strides() == std::vector<std::size_t>{3, 1});
    double total = 0.0;
    for (double w : pg.weights()) total += w;
    CHECK(total == doctest::Approx(2.0 * 2.0).epsilon(1e-14));
    auto x = pg.coordinate(0);
    CHECK(x[5] == doctest::Approx(0.5));
    CHECK(pg.index_along(5, 1) == 2);
    CHECK_THROWS_AS(ProductGrid(std::vector<Grid1D>{}), ConfigError);
}

TEST_CASE("for_each_line visits every line along an axis") {
    std::vector<std::size_t> shape{2, 3, 4};
    std::vector<cplx> data(24);
    for (std::size_t i = 0; i < 24; ++i) data[i] = static_cast<double>(i);
    int lines = 0;
    for_each_line(shape, 1, data, [&](std::span<cplx> line) {
        CHECK(line.size() == 3);
        CHECK(line[1].real() - line[0].real() == 4.0);
        for (auto& v : line) v *= 2.0;
        ++lines;
    });
    CHECK(lines == 8);
    CHECK(data[23].real() == 46.0);
}

#include "qdynkit/grids.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "fft.hpp"
#include "qdynkit/error.hpp"

namespace qdk {

namespace {

void require_length(const Grid1D& grid, std::size_t n, const char* what) {
    if (n != grid.size())
        throw ShapeError(std::string(what) + ": expected " + std::to_string(grid.size()) +
                         " values, got " + std::to_string(n));
}

struct JacobiEigen {
    Eigen::VectorXd nodes;
    // Column i holds p_n(x_i) sqrt(lambda_i), n = 0..N-1: the orthogonal
    // DVR <-> FBR matrix.
    Eigen::MatrixXd vectors;
};

// Eigenpairs of the symmetric tridiagonal Jacobi matrix with zero diagonal.
JacobiEigen golub_welsch(const Eigen::VectorXd& off_diag, std::size_t n) {
    if (n == 1) return {Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)};
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, off_diag, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw NumericError("Golub-Welsch eigenproblem did not converge for n_pts = " +
                           std::to_string(n));
    Eigen::VectorXd nodes = solver.eigenvalues();
    Eigen::MatrixXd vectors = solver.eigenvectors();
    for (Eigen::Index i = 0; i < vectors.cols(); ++i)
        if (vectors(0, i) < 0.0) vectors.col(i) *= -1.0;
    // Symmetric rule: enforce exact antisymmetry of the nodes.
    for (Eigen::Index i = 0; i < nodes.size() / 2; ++i) {
        double a = 0.5 * (nodes(nodes.size() - 1 - i) - nodes(i));
        nodes(i) = -a;
        nodes(nodes.size() - 1 - i) = a;
    }
    if (nodes.size() % 2 == 1) nodes(nodes.size() / 2) = 0.0;
    return {nodes, vectors};
}

// Weights 1/sum_n P_n(R_i)^2 from the basis table (row n, column i).
std::vector<double> christoffel_weights(const Eigen::MatrixXd& basis) {
    std::vector<double> w(static_cast<std::size_t>(basis.cols()));
    for (Eigen::Index i = 0; i < basis.cols(); ++i) {
        double s = basis.col(i).squaredNorm();
        w[static_cast<std::size_t>(i)] = 1.0 / s;
        if (!std::isfinite(w[static_cast<std::size_t>(i)]) || s <= 0.0)
            throw NumericError("quadrature weight underflow; reduce n_pts");
    }
    return w;
}

void check_increasing(const std::vector<double>& x) {
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) throw NumericError("grid nodes are not strictly increasing");
}

void apply_real_matrix(const Eigen::MatrixXd& m, std::span<cplx> v) {
    const auto n = static_cast<Eigen::Index>(v.size());
    Eigen::VectorXd re(n), im(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        re(i) = v[static_cast<std::size_t>(i)].real();
        im(i) = v[static_cast<std::size_t>(i)].imag();
    }
    Eigen::VectorXd out_re = m * re;
    Eigen::VectorXd out_im = m * im;
    for (Eigen::Index i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = {out_re(i), out_im(i)};
}

} // namespace

std::string_view to_string(GridKind kind) {
    switch (kind) {
    case GridKind::fft: return "fft";
    case GridKind::hermite: return "hermite";
    case GridKind::legendre: return "legendre";
    }
    return "?";
}

GridKind grid_kind_from_string(std::string_view name) {
    if (name == "fft") return GridKind::fft;
    if (name == "hermite") return GridKind::hermite;
    if (name == "legendre") return GridKind::legendre;
    throw ConfigError("unknown grid kind '" + std::string(name) +
                      "' (valid: fft, hermite, legendre)");
}

Grid1D Grid1D::fft(std::size_t n_pts, double x_min, double x_max, double mass) {
    if (n_pts < 2) throw ConfigError("n_pts: fft grid needs at least 2 points");
    if (!(x_max > x_min)) throw ConfigError("x_max: must exceed x_min");
    if (!(mass > 0.0)) throw ConfigError("mass: must be positive");
    auto d = std::make_shared<Data>();
    d->kind = GridKind::fft;
    d->mass = mass;
    d->x_min = x_min;
    d->x_max = x_max;
    const double dx = (x_max - x_min) / static_cast<double>(n_pts);
    d->spacing = dx;
    d->points.resize(n_pts);
    d->weights.assign(n_pts, dx);
    for (std::size_t i = 0; i < n_pts; ++i) d->points[i] = x_min + static_cast<double>(i) * dx;
    const double dk = 2.0 * std::numbers::pi / (x_max - x_min);
    d->momenta.resize(n_pts);
    d->kinetic_diag.resize(n_pts);
    for (std::size_t n = 0; n < n_pts; ++n) {
        auto s = static_cast<long long>(n);
        if (2 * n >= n_pts) s -= static_cast<long long>(n_pts);
        d->momenta[n] = dk * static_cast<double>(s);
        d->kinetic_diag[n] = d->momenta[n] * d->momenta[n] / (2.0 * mass);
    }
    d->kinetic_max = *std::max_element(d->kinetic_diag.begin(), d->kinetic_diag.end());
    d->kinetic_fbr = Eigen::Map<const Eigen::VectorXd>(d->kinetic_diag.data(),
                                                       static_cast<Eigen::Index>(n_pts))
                         .asDiagonal();
    return Grid1D(std::move(d));
}

Grid1D Grid1D::hermite(std::size_t n_pts, double mass, double omega, double r_e) {
    if (n_pts < 1) throw ConfigError("n_pts: hermite grid needs at least 1 point");
    if (!(mass > 0.0)) throw ConfigError("mass: must be positive");
    if (!(omega > 0.0)) throw ConfigError("omega: must be positive");
    auto d = std::make_shared<Data>();
    d->kind = GridKind::hermite;
    d->mass = mass;
    d->omega = omega;
    d->r_e = r_e;
    const auto n = static_cast<Eigen::Index>(n_pts);

    Eigen::VectorXd off(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index k = 1; k < n; ++k) off(k - 1) = std::sqrt(0.5 * static_cast<double>(k));
    JacobiEigen je = golub_welsch(off, n_pts);
    const Eigen::VectorXd& xi = je.nodes;
    d->unitary = std::move(je.vectors);

    const double scale = std::sqrt(mass * omega);
    const double norm = std::pow(mass * omega / std::numbers::pi, 0.25);
    d->basis.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = xi(i);
        double prev = 0.0;
        double cur = norm * std::exp(-0.5 * x * x);
        d->basis(0, i) = cur;
        for (Eigen::Index k = 0; k + 1 < n; ++k) {
            const double kk = static_cast<double>(k);
            double next = std::sqrt(2.0 / (kk + 1.0)) * x * cur - std::sqrt(kk / (kk + 1.0)) * prev;
            prev = cur;
            cur = next;
            d->basis(k + 1, i) = cur;
        }
    }
    d->weights = christoffel_weights(d->basis);
    d->points.resize(n_pts);
    for (std::size_t i = 0; i < n_pts; ++i)
        d->points[i] = r_e + xi(static_cast<Eigen::Index>(i)) / scale;
    check_increasing(d->points);

    d->kinetic_fbr = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double kk = static_cast<double>(k);
        d->kinetic_fbr(k, k) = 0.25 * omega * (2.0 * kk + 1.0);
        if (k + 2 < n) {
            const double off2 = -0.25 * omega * std::sqrt((kk + 1.0) * (kk + 2.0));
            d->kinetic_fbr(k + 2, k) = off2;
            d->kinetic_fbr(k, k + 2) = off2;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d->kinetic_fbr, Eigen::EigenvaluesOnly);
    d->kinetic_max = es.eigenvalues().maxCoeff();
    return Grid1D(std::move(d));
}

Grid1D Grid1D::legendre(std::size_t n_pts, double mass, double radius, int m_quantum) {
    if (n_pts < 1) throw ConfigError("n_pts: legendre grid needs at least 1 point");
    if (!(mass > 0.0)) throw ConfigError("mass: must be positive");
    if (!(radius > 0.0)) throw ConfigError("radius: must be positive");
    if (m_quantum < 0) throw ConfigError("m: must be nonnegative");
    auto d = std::make_shared<Data>();
    d->kind = GridKind::legendre;
    d->mass = mass;
    d->radius = radius;
    d->m_quantum = m_quantum;
    const auto n = static_cast<Eigen::Index>(n_pts);
    const double m = m_quantum;

    // Gauss-Jacobi(m, m) rule; reduces to Gauss-Legendre for m = 0.
    Eigen::VectorXd off(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        off(k - 1) = std::sqrt(kk * (kk + 2.0 * m) /
                               ((2.0 * kk + 2.0 * m + 1.0) * (2.0 * kk + 2.0 * m - 1.0)));
    }
    JacobiEigen je = golub_welsch(off, n_pts);
    const Eigen::VectorXd& x = je.nodes;
    d->unitary = std::move(je.vectors);

    // Normalized associated Legendre functions, l = m ... m+N-1.
    d->basis.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double xi = x(i);
        const double s = std::sqrt(std::max(0.0, 1.0 - xi * xi));
        double pmm = std::sqrt(0.5);
        for (int k = 1; k <= m_quantum; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
        double prev = 0.0;
        double cur = pmm;
        d->basis(0, i) = cur;
        for (Eigen::Index k = 1; k < n; ++k) {
            const double l = m + static_cast<double>(k);
            const double a = std::sqrt((4.0 * l * l - 1.0) / (l * l - m * m));
            const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m * m) /
                                       (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
            double next = a * (xi * cur - b * prev);
            prev = cur;
            cur = next;
            d->basis(k, i) = cur;
        }
    }
    d->weights = christoffel_weights(d->basis);
    d->points.assign(x.data(), x.data() + n);
    check_increasing(d->points);

    d->kinetic_diag.resize(n_pts);
    for (std::size_t k = 0; k < n_pts; ++k) {
        const double l = m + static_cast<double>(k);
        d->kinetic_diag[k] = l * (l + 1.0) / (2.0 * mass * radius * radius);
    }
    d->kinetic_max = d->kinetic_diag.back();
    d->kinetic_fbr =
        Eigen::Map<const Eigen::VectorXd>(d->kinetic_diag.data(), n).asDiagonal();
    return Grid1D(std::move(d));
}

void dvr_to_fbr_inplace(const Grid1D& grid, std::span<cplx> values) {
    require_length(grid, values.size(), "dvr_to_fbr");
    if (grid.kind() == GridKind::fft) {
        detail::fft_inplace(values, -1);
        const double s = std::sqrt(grid.spacing() / static_cast<double>(grid.size()));
        for (auto& v : values) v *= s;
        return;
    }
    auto w = grid.weights();
    for (std::size_t i = 0; i < values.size(); ++i) values[i] *= std::sqrt(w[i]);
    apply_real_matrix(grid.unitary(), values);
}

void fbr_to_dvr_inplace(const Grid1D& grid, std::span<cplx> coefficients) {
    require_length(grid, coefficients.size(), "fbr_to_dvr");
    if (grid.kind() == GridKind::fft) {
        detail::fft_inplace(coefficients, +1);
        const double s = 1.0 / std::sqrt(grid.spacing() * static_cast<double>(grid.size()));
        for (auto& v : coefficients) v *= s;
        return;
    }
    apply_real_matrix(grid.unitary().transpose(), coefficients);
    auto w = grid.weights();
    for (std::size_t i = 0; i < coefficients.size(); ++i) coefficients[i] /= std::sqrt(w[i]);
}

std::vector<cplx> dvr_to_fbr(const Grid1D& grid, std::span<const cplx> values) {
    std::vector<cplx> out(values.begin(), values.end());
    dvr_to_fbr_inplace(grid, out);
    return out;
}

std::vector<cplx> fbr_to_dvr(const Grid1D& grid, std::span<const cplx> coefficients) {
    std::vector<cplx> out(coefficients.begin(), coefficients.end());
    fbr_to_dvr_inplace(grid, out);
    return out;
}

void apply_kinetic_inplace(const Grid1D& grid, std::span<cplx> values, double cap) {
    require_length(grid, values.size(), "apply_kinetic");
    dvr_to_fbr_inplace(grid, values);
    if (grid.kind() == GridKind::hermite) {
        if (std::isfinite(cap))
            throw UnsupportedError("kinetic truncation is not available on hermite grids");
        apply_real_matrix(grid.kinetic_fbr(), values);
    } else {
        auto t = grid.kinetic_spectrum();
        for (std::size_t n = 0; n < values.size(); ++n) values[n] *= std::min(t[n], cap);
    }
    fbr_to_dvr_inplace(grid, values);
}

std::vector<cplx> apply_kinetic(const Grid1D& grid, std::span<const cplx> values, double cap) {
    std::vector<cplx> out(values.begin(), values.end());
    apply_kinetic_inplace(grid, out, cap);
    return out;
}

void apply_momentum_inplace(const Grid1D& grid, std::span<cplx> values) {
    require_length(grid, values.size(), "apply_momentum");
    const std::size_t n = grid.size();
    switch (grid.kind()) {
    case GridKind::fft: {
        dvr_to_fbr_inplace(grid, values);
        auto k = grid.momenta();
        for (std::size_t j = 0; j < n; ++j) values[j] *= (2 * j == n) ? 0.0 : k[j];
        fbr_to_dvr_inplace(grid, values);
        return;
    }
    case GridKind::hermite: {
        dvr_to_fbr_inplace(grid, values);
        const double c = std::sqrt(0.5 * grid.mass() * grid.omega());
        std::vector<cplx> out(n);
        for (std::size_t j = 0; j < n; ++j) {
            cplx acc = 0.0;
            if (j >= 1) acc += std::sqrt(static_cast<double>(j)) * values[j - 1];
            if (j + 1 < n) acc -= std::sqrt(static_cast<double>(j + 1)) * values[j + 1];
            out[j] = cplx(0.0, c) * acc;
        }
        std::copy(out.begin(), out.end(), values.begin());
        fbr_to_dvr_inplace(grid, values);
        return;
    }
    case GridKind::legendre:
        throw UnsupportedError("linear momentum is not defined on legendre grids");
    }
}

Eigen::MatrixXd kinetic_matrix_dvr(const Grid1D& grid, double cap) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd t(n, n);
    if (grid.kind() == GridKind::fft) {
        std::vector<cplx> e(grid.size());
        for (Eigen::Index j = 0; j < n; ++j) {
            std::fill(e.begin(), e.end(), cplx(0.0));
            e[static_cast<std::size_t>(j)] = 1.0;
            apply_kinetic_inplace(grid, e, cap);
            for (Eigen::Index i = 0; i < n; ++i) t(i, j) = e[static_cast<std::size_t>(i)].real();
        }
    } else {
        if (grid.kind() == GridKind::hermite && std::isfinite(cap))
            throw UnsupportedError("kinetic truncation is not available on hermite grids");
        const Eigen::MatrixXd& u = grid.unitary();
        Eigen::MatrixXd k = grid.kinetic_fbr();
        if (std::isfinite(cap)) k = k.cwiseMin(cap);
        t = u.transpose() * k * u;
    }
    return 0.5 * (t + t.transpose());
}

ProductGrid::ProductGrid(std::vector<Grid1D> dofs) : dofs_(std::move(dofs)) {
    if (dofs_.empty()) throw ConfigError("space: at least one degree of freedom is required");
    const std::size_t k = dofs_.size();
    shape_.resize(k);
    strides_.resize(k);
    size_ = 1;
    for (std::size_t j = 0; j < k; ++j) shape_[j] = dofs_[j].size();
    for (std::size_t j = k; j-- > 0;) {
        strides_[j] = size_;
        size_ *= shape_[j];
    }
    weights_.assign(size_, 1.0);
    for (std::size_t p = 0; p < size_; ++p)
        for (std::size_t j = 0; j < k; ++j) weights_[p] *= dofs_[j].weights()[index_along(p, j)];
}

std::vector<double> ProductGrid::coordinate(std::size_t k) const {
    std::vector<double> x(size_);
    auto pts = dofs_.at(k).points();
    for (std::size_t p = 0; p < size_; ++p) x[p] = pts[index_along(p, k)];
    return x;
}

} // namespace qdk

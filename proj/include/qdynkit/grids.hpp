#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qdk {

using cplx = std::complex<double>;

inline constexpr double no_cap = std::numeric_limits<double>::infinity();

enum class GridKind { fft, hermite, legendre };

std::string_view to_string(GridKind kind);
GridKind grid_kind_from_string(std::string_view name);

/**
 * One degree of freedom: DVR nodes and weights, the matching FBR, and the
 * default kinetic operator.
 *
 * Weights are DVR weights, i.e. sum_i w_i f(R_i) approximates the plain
 * integral of f. The FBR functions P_n are orthonormal under these weights:
 *   psi_n = sum_i w_i P_n*(R_i) Psi(R_i),   Psi(R_i) = sum_n psi_n P_n(R_i).
 *
 * Values are immutable after construction and cheap to copy.
 */
class Grid1D {
public:
    static Grid1D fft(std::size_t n_pts, double x_min, double x_max, double mass);
    static Grid1D hermite(std::size_t n_pts, double mass, double omega, double r_e);
    static Grid1D legendre(std::size_t n_pts, double mass, double radius, int m_quantum);

    GridKind kind() const { return d_->kind; }
    std::size_t size() const { return d_->points.size(); }
    double mass() const { return d_->mass; }

    std::span<const double> points() const { return d_->points; }
    std::span<const double> weights() const { return d_->weights; }

    // fft
    double x_min() const { return d_->x_min; }
    double x_max() const { return d_->x_max; }
    double spacing() const { return d_->spacing; }
    /// FBR wave numbers in transform order (0, 1, ..., -N/2, ..., -1) * 2pi/L.
    std::span<const double> momenta() const { return d_->momenta; }

    // hermite
    double omega() const { return d_->omega; }
    double r_e() const { return d_->r_e; }

    // legendre
    int m_quantum() const { return d_->m_quantum; }
    double radius() const { return d_->radius; }

    /// Kinetic eigenvalues in FBR order (fft, legendre). Empty for hermite,
    /// where the FBR kinetic matrix is not diagonal.
    std::span<const double> kinetic_spectrum() const { return d_->kinetic_diag; }
    /// FBR matrix of the kinetic operator (diagonal except for hermite).
    const Eigen::MatrixXd& kinetic_fbr() const { return d_->kinetic_fbr; }
    double kinetic_max() const { return d_->kinetic_max; }

    /// Basis values P_n(R_i), row n, column i. Empty for fft (plane waves are
    /// applied through the FFT).
    const Eigen::MatrixXd& basis() const { return d_->basis; }
    /// Orthogonal matrix U_ni = sqrt(w_i) P_n(R_i) from the Jacobi-matrix
    /// eigenvectors (hermite, legendre).
    const Eigen::MatrixXd& unitary() const { return d_->unitary; }

private:
    struct Data {
        GridKind kind = GridKind::fft;
        double mass = 1.0;
        std::vector<double> points;
        std::vector<double> weights;
        double x_min = 0.0, x_max = 0.0, spacing = 0.0;
        std::vector<double> momenta;
        double omega = 0.0, r_e = 0.0;
        int m_quantum = 0;
        double radius = 0.0;
        std::vector<double> kinetic_diag;
        Eigen::MatrixXd kinetic_fbr;
        double kinetic_max = 0.0;
        Eigen::MatrixXd basis;
        Eigen::MatrixXd unitary;
    };
    explicit Grid1D(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
    std::shared_ptr<const Data> d_;
};

// In-place transforms on a contiguous line of n_pts values.
void dvr_to_fbr_inplace(const Grid1D& grid, std::span<cplx> values);
void fbr_to_dvr_inplace(const Grid1D& grid, std::span<cplx> coefficients);

std::vector<cplx> dvr_to_fbr(const Grid1D& grid, std::span<const cplx> values);
std::vector<cplx> fbr_to_dvr(const Grid1D& grid, std::span<const cplx> coefficients);

/// Multiplies by the kinetic operator in the FBR. `cap` clips the kinetic
/// spectrum from above (energy-range truncation); only diagonal spectra can
/// be clipped.
void apply_kinetic_inplace(const Grid1D& grid, std::span<cplx> values, double cap = no_cap);
std::vector<cplx> apply_kinetic(const Grid1D& grid, std::span<const cplx> values,
                                double cap = no_cap);

/// Momentum operator -i d/dR (fft: ladder with the Nyquist term dropped so
/// that the operator stays odd; hermite: ladder-operator matrix).
void apply_momentum_inplace(const Grid1D& grid, std::span<cplx> values);

/// Kinetic operator in the orthonormal DVR basis, T = U^H diag U with
/// U_ni = sqrt(w_i) P_n(R_i). Exactly symmetric.
Eigen::MatrixXd kinetic_matrix_dvr(const Grid1D& grid, double cap = no_cap);

/// Direct product of one-dimensional grids. Tensors are stored row-major,
/// the last degree of freedom running fastest.
class ProductGrid {
public:
    ProductGrid() = default;
    explicit ProductGrid(std::vector<Grid1D> dofs);

    std::size_t n_dofs() const { return dofs_.size(); }
    const Grid1D& dof(std::size_t k) const { return dofs_.at(k); }
    const std::vector<Grid1D>& dofs() const { return dofs_; }
    const std::vector<std::size_t>& shape() const { return shape_; }
    const std::vector<std::size_t>& strides() const { return strides_; }
    std::size_t size() const { return size_; }

    /// Product weights on the full tensor.
    const std::vector<double>& weights() const { return weights_; }
    /// Coordinate of dof k at every tensor point.
    std::vector<double> coordinate(std::size_t k) const;
    /// Index of dof k for a flat tensor index.
    std::size_t index_along(std::size_t flat, std::size_t k) const {
        return (flat / strides_[k]) % shape_[k];
    }

private:
    std::vector<Grid1D> dofs_;
    std::vector<std::size_t> shape_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
    std::vector<double> weights_;
};

/// Applies `fn` to every 1-D line of `data` along `axis`. The line is passed as
/// a contiguous scratch copy and written back afterwards.
template <class Fn>
void for_each_line(const std::vector<std::size_t>& shape, std::size_t axis,
                   std::span<cplx> data, Fn&& fn) {
    std::size_t inner = 1;
    for (std::size_t k = axis + 1; k < shape.size(); ++k) inner *= shape[k];
    const std::size_t n = shape[axis];
    const std::size_t outer = data.size() / (n * inner);
    std::vector<cplx> line(n);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            cplx* base = data.data() + o * n * inner + in;
            for (std::size_t i = 0; i < n; ++i) line[i] = base[i * inner];
            fn(std::span<cplx>(line));
            for (std::size_t i = 0; i < n; ++i) base[i * inner] = line[i];
        }
    }
}

} // namespace qdk

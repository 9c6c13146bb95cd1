#include "qdynkit/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qdynkit/error.hpp"
#include "qdynkit/log.hpp"

namespace qdk {

std::string to_string(EigenMethod m) { return m == EigenMethod::dense ? "dense" : "sparse"; }

EigenMethod eigen_method_from_string(const std::string& s) {
    if (s == "dense") return EigenMethod::dense;
    if (s == "sparse") return EigenMethod::sparse;
    throw ConfigError("psi.eigen.method: unknown method '" + s + "' (valid: dense, sparse)");
}

Eigen::SparseMatrix<double> build_matrix(const SystemSpec& sys, double threshold, std::size_t dimension_cap) {
    const auto& grid = sys.grid;
    const std::size_t n = grid.size();
    const std::size_t nu = sys.n_channels;
    const std::size_t dim = n * nu;
    if (dim > dimension_cap)
        throw ResourceError("Hamiltonian matrix dimension " + std::to_string(dim) + " exceeds the cap of " +
                            std::to_string(dimension_cap));
    if (std::isnan(threshold) || threshold < 0.0) throw ConfigError("psi.eigen.threshold: must be non-negative");

    std::vector<Eigen::MatrixXd> t;
    for (std::size_t k = 0; k < grid.n_dofs(); ++k) t.push_back(kinetic_matrix_dvr(grid.dof(k), sys.kinetic_cap[k]));

    std::vector<Eigen::Triplet<double>> entries;
    const auto keep = [&](double v) { return threshold > 0.0 ? std::abs(v) >= threshold : v != 0.0; };
    const auto& shape = grid.shape();
    const auto& strides = grid.strides();
    for (std::size_t c = 0; c < nu; ++c) {
        const std::size_t off = c * n;
        for (std::size_t p = 0; p < n; ++p) {
            // diagonal: all kinetic diagonals plus the potential
            double diag = 0.0;
            for (std::size_t k = 0; k < grid.n_dofs(); ++k) {
                const auto i = static_cast<Eigen::Index>(grid.index_along(p, k));
                diag += t[k](i, i);
            }
            if (const auto& v = sys.pot_at(c, c)) diag += (*v)[p];
            if (keep(diag)) entries.emplace_back(off + p, off + p, diag);
            // kinetic couplings along each dof
            for (std::size_t k = 0; k < grid.n_dofs(); ++k) {
                const std::size_t i = grid.index_along(p, k);
                const std::size_t base = p - i * strides[k];
                for (std::size_t j = 0; j < shape[k]; ++j) {
                    if (j == i) continue;
                    const double h = t[k](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                    if (keep(h)) entries.emplace_back(off + p, off + base + j * strides[k], h);
                }
            }
            // channel couplings
            for (std::size_t d = 0; d < nu; ++d) {
                if (d == c) continue;
                const auto& v = sys.pot_at(c, d);
                if (v && keep((*v)[p])) entries.emplace_back(off + p, d * n + p, (*v)[p]);
            }
        }
    }
    Eigen::SparseMatrix<double> h(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    h.setFromTriplets(entries.begin(), entries.end());
    h.makeCompressed();
    return h;
}

LanczosResult lanczos_lowest(const Eigen::SparseMatrix<double>& h, std::size_t k, double tolerance,
                             std::size_t max_restarts) {
    const auto dim = static_cast<std::size_t>(h.rows());
    if (k == 0 || k > dim) throw ConfigError("Lanczos: number of states out of range");
    // Gershgorin bound on the spectral radius
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(h.rows());
    for (Eigen::Index j = 0; j < h.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(h, j); it; ++it) rows(it.row()) += std::abs(it.value());
    const double radius = std::max(rows.maxCoeff(), 1e-300);
    const double tol = tolerance * radius;

    const std::size_t m = std::min(dim, std::max<std::size_t>(2 * k + 40, 60));
    const std::size_t keep = std::min(m - 1, k + std::max<std::size_t>(10, k / 2));
    Eigen::MatrixXd v(dim, m + 1);
    Eigen::MatrixXd hv(dim, m);

    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss;
    auto random_unit = [&](std::size_t filled) {
        Eigen::VectorXd x(dim);
        for (auto& e : x) e = gauss(rng);
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t j = 0; j < filled; ++j) x -= v.col(j).dot(x) * v.col(j);
        return Eigen::VectorXd(x / x.norm());
    };

    LanczosResult out;
    std::size_t filled = 0;
    v.col(0) = random_unit(0);
    for (std::size_t restart = 0; restart <= max_restarts; ++restart) {
        // expand to m basis vectors; column `filled` holds the next direction
        for (std::size_t j = filled; j < m; ++j) {
            hv.col(j) = h * v.col(j);
            Eigen::VectorXd w = hv.col(j);
            for (int pass = 0; pass < 2; ++pass) {
                const Eigen::VectorXd c = v.leftCols(j + 1).transpose() * w;
                w -= v.leftCols(j + 1) * c;
            }
            const double beta = w.norm();
            if (j + 1 == m && m == dim) break;
            v.col(j + 1) = beta > 1e-10 * radius ? Eigen::VectorXd(w / beta) : random_unit(j + 1);
        }
        Eigen::MatrixXd t = v.leftCols(m).transpose() * hv.leftCols(m);
        t = 0.5 * (t + t.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const Eigen::MatrixXd x = v.leftCols(m) * es.eigenvectors();
        const Eigen::MatrixXd hx = hv.leftCols(m) * es.eigenvectors();
        bool converged = true;
        for (std::size_t i = 0; i < k && converged; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            converged = (hx.col(ii) - es.eigenvalues()(ii) * x.col(ii)).norm() < tol;
        }
        if (converged || m == dim) {
            out.values = es.eigenvalues().head(static_cast<Eigen::Index>(k));
            out.vectors = x.leftCols(static_cast<Eigen::Index>(k));
            out.restarts = restart;
            return out;
        }
        // thick restart: lowest Ritz pairs plus the last Lanczos direction
        const Eigen::VectorXd next = v.col(static_cast<Eigen::Index>(m));
        v.leftCols(static_cast<Eigen::Index>(keep)) = x.leftCols(static_cast<Eigen::Index>(keep));
        hv.leftCols(static_cast<Eigen::Index>(keep)) = hx.leftCols(static_cast<Eigen::Index>(keep));
        Eigen::VectorXd w = next;
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t j = 0; j < keep; ++j) w -= v.col(j).dot(w) * v.col(j);
        const double wn = w.norm();
        v.col(static_cast<Eigen::Index>(keep)) = wn > 1e-8 ? Eigen::VectorXd(w / wn) : random_unit(keep);
        filled = keep;
    }
    throw NumericError("Lanczos eigensolver did not converge within " + std::to_string(max_restarts) +
                       " restarts; use the dense method (psi.eigen.method = \"dense\")");
}

EigenResult solve_bound_states(const SystemSpec& sys, std::size_t n_stop, const EigenOptions& opts) {
    const std::size_t n = sys.grid.size();
    const std::size_t nu = sys.n_channels;
    const std::size_t dim = n * nu;
    if (n_stop >= dim)
        throw ConfigError("psi.eigen.stop: " + std::to_string(n_stop) + " must be below the matrix dimension " +
                          std::to_string(dim));
    const EigenMethod method = opts.method.value_or(opts.threshold > 0.0 ? EigenMethod::sparse : EigenMethod::dense);
    const auto h = build_matrix(sys, opts.threshold, opts.dimension_cap);
    const std::size_t k = n_stop + 1;

    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    if (method == EigenMethod::dense) {
        if (dim > opts.dense_cap)
            throw ResourceError("dense diagonalization of dimension " + std::to_string(dim) +
                                " exceeds the dense cap of " + std::to_string(opts.dense_cap) +
                                "; set psi.eigen.threshold > 0 for the sparse path");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(h)};
        values = es.eigenvalues().head(static_cast<Eigen::Index>(k));
        vectors = es.eigenvectors().leftCols(static_cast<Eigen::Index>(k));
    } else {
        auto r = lanczos_lowest(h, k, opts.tolerance, opts.max_restarts);
        log::info("Lanczos converged after " + std::to_string(r.restarts) + " restarts");
        values = std::move(r.values);
        vectors = std::move(r.vectors);
    }

    EigenResult res;
    res.method = method;
    res.n_requested = k;
    const auto& w = sys.grid.weights();
    for (std::size_t s = 0; s < k; ++s) {
        const auto col = vectors.col(static_cast<Eigen::Index>(s));
        WaveFunction psi(nu, n);
        double big = -1.0;
        double sign = 1.0;
        for (std::size_t c = 0; c < nu; ++c)
            for (std::size_t p = 0; p < n; ++p) {
                const double a = col(static_cast<Eigen::Index>(c * n + p)) / std::sqrt(w[p]);
                psi.channels[c][p] = a;
                if (std::abs(a) > big * (1.0 + 1e-12)) {
                    big = std::abs(a);
                    sign = a < 0.0 ? -1.0 : 1.0;
                }
            }
        if (sign < 0.0)
            for (auto& ch : psi.channels)
                for (auto& a : ch) a = -a;
        res.energies.push_back(values(static_cast<Eigen::Index>(s)));
        res.states.push_back(std::move(psi));
    }
    return res;
}

std::vector<ExpectationRecord> expectations_bound(const EigenResult& result, const SystemSpec& sys) {
    std::vector<ExpectationRecord> out;
    out.reserve(result.states.size());
    for (const auto& s : result.states) out.push_back(expect(sys, s, s));
    return out;
}

} // namespace qdk

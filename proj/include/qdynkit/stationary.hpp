#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "qdynkit/observe.hpp"
#include "qdynkit/system.hpp"

namespace qdk {

enum class EigenMethod { dense, sparse };
std::string to_string(EigenMethod m);
EigenMethod eigen_method_from_string(const std::string& s);

constexpr std::size_t default_dimension_cap = std::size_t{1} << 16;

/// Field-free Hamiltonian in the orthonormal DVR basis c = sqrt(w) psi,
/// channel-major (index = channel * grid size + grid point). Entries with
/// |h| < threshold are dropped when threshold > 0.
Eigen::SparseMatrix<double> build_matrix(const SystemSpec& sys, double threshold = 0.0,
                                         std::size_t dimension_cap = default_dimension_cap);

struct EigenOptions {
    double threshold = 0.0;
    /// Dense unless a threshold is set.
    std::optional<EigenMethod> method;
    std::size_t dimension_cap = default_dimension_cap;
    /// Largest dimension handled by the dense path.
    std::size_t dense_cap = std::size_t{1} << 13;
    /// Residual bound of the iterative path, relative to the spectral radius.
    double tolerance = 1e-11;
    std::size_t max_restarts = 1000;
};

struct EigenResult {
    std::vector<double> energies;
    std::vector<WaveFunction> states;
    std::size_t n_requested = 0;
    EigenMethod method = EigenMethod::dense;
};

/// Lowest n_stop + 1 eigenpairs. States are normalized with the DVR weights
/// and their largest-magnitude amplitude is real and positive.
EigenResult solve_bound_states(const SystemSpec& sys, std::size_t n_stop, const EigenOptions& opts = {});

/// Lowest k eigenpairs of a symmetric sparse matrix by thick-restart Lanczos
/// with full reorthogonalization. Eigenvectors in the columns.
struct LanczosResult {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    std::size_t restarts = 0;
};
LanczosResult lanczos_lowest(const Eigen::SparseMatrix<double>& h, std::size_t k, double tolerance,
                             std::size_t max_restarts);

/// One expectation record per state (t = 0, no field, autocorrelation 1).
std::vector<ExpectationRecord> expectations_bound(const EigenResult& result, const SystemSpec& sys);

} // namespace qdk

#pragma once

/**
 * @file eigensolver.hpp
 * @brief Lowest eigenpairs of a real symmetric sparse operator.
 *
 * Block Lanczos with full reorthogonalization and thick restarts: the
 * projected matrix is always V^T H V of the current orthonormal basis, and a
 * restart keeps the best Ritz vectors. Small operators go through a dense
 * symmetric eigendecomposition instead.
 */

#include "chainhhg/sparse_operator.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace chainhhg {

enum class SolverMethod { Auto, Dense, Lanczos };

struct SolverOptions {
    int k = 200;
    double tol = 1e-9;               ///< bound on ||H u - e u|| per pair
    std::uint64_t seed = 20240611;   ///< start-block seed
    int block_size = 4;
    int max_basis = 0;               ///< 0: chosen from k and block size
    int max_restarts = 2000;
    SolverMethod method = SolverMethod::Auto;
    std::size_t dense_threshold = 2000;
    double cluster_gap = 1e-6;
    std::size_t memory_cap_bytes = std::size_t{4} << 30;
    /// Called after every restart with (restart, converged count, worst wanted residual).
    std::function<void(int, int, double)> progress;
};

struct EigenSolution {
    Eigen::VectorXd energies;   ///< ascending
    Eigen::MatrixXd vectors;    ///< columns are orthonormal eigenvectors
    Eigen::VectorXd residuals;  ///< ||H u_j - e_j u_j||
    std::vector<int> cluster;   ///< cluster id per state; equal ids are (near-)degenerate
    std::vector<int> parity;    ///< reflection eigenvalue (+1/-1), 0 when unknown
    std::vector<int> spin_flip; ///< up<->down exchange eigenvalue, 0 when unknown
    std::uint64_t seed = 0;
    double tol = 0.0;
    std::size_t matvecs = 0;

    [[nodiscard]] int count() const noexcept { return static_cast<int>(energies.size()); }
    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(vectors.rows()); }
};

/// Lowest opts.k eigenpairs. Throws ParameterError when k is out of range,
/// ConvergenceError (message lists the residuals) when the restart cap is hit.
[[nodiscard]] EigenSolution lowest_eigenpairs(const SparseOperator& h, const SolverOptions& opts);

/// Full dense decomposition truncated to the lowest k pairs.
[[nodiscard]] EigenSolution dense_eigenpairs(const SparseOperator& h, int k, double cluster_gap = 1e-6);

/// Flips each column so that its largest-magnitude entry is positive. Entries
/// within a relative 1e-6 of the maximum count as tied; the lowest index wins.
void apply_sign_convention(Eigen::Ref<Eigen::MatrixXd> vectors);

/// Groups consecutive energies whose spacing is below gap.
[[nodiscard]] std::vector<int> find_clusters(const Eigen::VectorXd& energies, double gap);

/// Rotates a degenerate block into a basis fixed by pivot rows, independent
/// of the incoming basis: column t is the unique unit vector of the remaining
/// span whose largest row (chosen greedily) is orthogonal to the later columns.
void canonicalize_degenerate_block(Eigen::Ref<Eigen::MatrixXd> block);

/// Canonicalizes every cluster (optionally only among members sharing a
/// label), recomputes Rayleigh quotients and residuals, and re-sorts.
void finalize_solution(const SparseOperator& h, EigenSolution& sol, double cluster_gap,
                       const std::vector<int>* sector_labels = nullptr);

} // namespace chainhhg

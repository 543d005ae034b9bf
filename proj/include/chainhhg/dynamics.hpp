#pragma once

/**
 * @file dynamics.hpp
 * @brief Pulse shape, eigenbasis dipole matrix and time propagation.
 *
 * The interaction-picture path evolves b_k(t), the coefficients of the state
 * on the field-free eigenvectors with the free phases exp(-i e_k t) removed.
 * The full-space path steps psi directly in the Fock basis and serves as an
 * independent reference for small chains.
 */

#include "chainhhg/eigensolver.hpp"
#include "chainhhg/sparse_operator.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace chainhhg {

// ============================================================================
// Pulse
// ============================================================================

struct PulseSpec {
    double omega = 0.0049;
    double e0_over_omega = 0.4;
    int cycles = 5;

    void validate() const;
    [[nodiscard]] double amplitude() const noexcept { return e0_over_omega * omega; }
    [[nodiscard]] double duration() const noexcept;
    /// E0 sin^2(wt / 2n) cos(wt) on [0, T], zero outside.
    [[nodiscard]] double field(double t) const noexcept;
};

// ============================================================================
// Transition matrix
// ============================================================================

struct TransitionMatrix {
    Eigen::VectorXd energies;  ///< energies of the retained states
    Eigen::MatrixXd elements;  ///< symmetric, elements(k, j) = u_k^T diag(d) u_j
    std::vector<int> ids;      ///< state ids in the originating solution

    [[nodiscard]] int size() const noexcept { return static_cast<int>(energies.size()); }
    [[nodiscard]] double max_abs() const { return elements.size() ? elements.cwiseAbs().maxCoeff() : 0.0; }
};

[[nodiscard]] TransitionMatrix transition_matrix(const EigenSolution& sol, const Eigen::VectorXd& dipole);

/// Sub-matrix on the given ids (positions into tm.ids order are looked up by id).
[[nodiscard]] TransitionMatrix restrict_transitions(const TransitionMatrix& tm, const std::vector<int>& keep);

// ============================================================================
// Interaction-picture propagation
// ============================================================================

struct PropagationOptions {
    int samples = 8192;
    /// Relative and absolute dopri5 tolerance.
    double ode_tol = 1e-13;
    /// States not connected to the ground state through couplings above
    /// coupling_cutoff * max|T| keep b = 0 and are not integrated.
    double coupling_cutoff = 1e-14;
    bool keep_coefficients = false;
    double max_norm_drift = 1e-6;
};

struct CoefficientTrajectory {
    Eigen::VectorXd times;
    Eigen::VectorXd x;                ///< real part of the position expectation
    Eigen::MatrixXcd coefficients;    ///< b(t_m) as columns, only when requested
    double max_norm_drift = 0.0;      ///< max_m | ||b(t_m)||^2 - 1 |
    double max_imag = 0.0;            ///< largest discarded imaginary part of x
    int active_states = 0;
    std::size_t rhs_evaluations = 0;
};

/// Starts from b = e_0 (the first retained state, which must be the ground state).
[[nodiscard]] CoefficientTrajectory propagate_interaction_picture(const TransitionMatrix& tm, const PulseSpec& pulse,
                                                                  const PropagationOptions& opts = {});

/// Same propagation from an arbitrary normalized start vector b0.
[[nodiscard]] CoefficientTrajectory propagate_interaction_picture(const TransitionMatrix& tm, const PulseSpec& pulse,
                                                                  const Eigen::VectorXcd& b0,
                                                                  const PropagationOptions& opts);

// ============================================================================
// Full Fock-space reference
// ============================================================================

struct FullSpaceOptions {
    std::int64_t steps = std::int64_t{1} << 20; ///< lower bound; rounded up to a multiple of samples-1
    int samples = 8192;
    double max_norm_drift = 1e-6;
};

struct FullSpaceTrajectory {
    Eigen::VectorXd times;
    Eigen::VectorXd x;
    double max_norm_drift = 0.0;
    std::int64_t steps = 0;
};

/// Strang splitting: half-step diagonal phase (interaction + field), full-step
/// hopping by truncated Taylor series, half-step diagonal phase.
[[nodiscard]] FullSpaceTrajectory propagate_full_space(const SparseOperator& h0, const Eigen::VectorXd& dipole,
                                                       const PulseSpec& pulse, const Eigen::VectorXcd& psi0,
                                                       const FullSpaceOptions& opts = {});

/// CSV with columns t,x.
void write_trajectory_csv(std::ostream& os, const Eigen::VectorXd& times, const Eigen::VectorXd& x);

} // namespace chainhhg

#pragma once

/**
 * @file lattice.hpp
 * @brief SSH-Hubbard chain: field-free Hamiltonian, length-gauge dipole and
 *        the symmetry operations used for selection-rule checks.
 *
 * Fermionic modes are ordered with every up-spin mode before every down-spin
 * mode, each block by flattened site index. Same-spin hops then carry only
 * the parity of same-spin occupations between the two sites, and the Hubbard
 * term is diagonal.
 */

#include "chainhhg/fock_basis.hpp"
#include "chainhhg/sparse_operator.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace chainhhg {

struct ChainSpec {
    int sites = 12;
    double v = 0.10026;  ///< intracell hopping amplitude (bond s, s+1 with s even)
    double w = 0.18268;  ///< intercell hopping amplitude (s odd)
    double U = 0.1;      ///< on-site interaction

    /// Site spacing is one; the two-site unit cell has lattice constant 2.
    static constexpr double lattice_constant = 2.0;

    /// Throws ParameterError unless sites is even and in [2, 32].
    void validate() const;

    [[nodiscard]] std::vector<double> positions() const;
    [[nodiscard]] double position(int s) const noexcept { return s - 0.5 * (sites - 1); }
    /// Amplitude t_s of H = -t_s (c+_s c_s+1 + h.c.).
    [[nodiscard]] double bond_amplitude(int s) const noexcept { return (s % 2 == 0) ? v : w; }
};

/// One-spin-species hopping matrix on a fixed-particle sector (dimension D).
[[nodiscard]] SparseOperator single_spin_hopping(const ChainSpec& spec, const SectorBasis& sector);

/// U times the number of doubly occupied sites.
[[nodiscard]] inline double interaction_diagonal(const ChainSpec& spec, Word up, Word dn) noexcept {
    return spec.U * std::popcount(up & dn);
}

struct AssemblyOptions {
    std::size_t memory_cap_bytes = std::size_t{4} << 30;
};

/// Predicted CSR footprint of H0 for a spec, in bytes.
[[nodiscard]] std::size_t estimate_h0_bytes(const ChainSpec& spec);

/// H0 = hop (x) I + I (x) hop + diag(U n_up n_dn) at half filling.
/// Throws ResourceError when the estimated storage exceeds the cap.
[[nodiscard]] SparseOperator assemble_H0(const ChainSpec& spec, const AssemblyOptions& opts = {});

/// Diagonal of the dipole operator h: sum of occupied-site positions over both spins.
[[nodiscard]] Eigen::VectorXd assemble_dipole_diagonal(const ChainSpec& spec);

// ----------------------------------------------------------------------------
// Symmetries
// ----------------------------------------------------------------------------

/// Reverse the lowest `sites` bits of a word (site s -> N-1-s).
[[nodiscard]] Word reflect_word(Word w, int sites) noexcept;

/// Composite permutation induced by s -> N-1-s. Reversing the order of the
/// same number of fermions in both spin blocks gives equal signs, so the
/// induced operator is a pure permutation: (P x)[perm[g]] = x[g].
[[nodiscard]] std::vector<std::uint32_t> reflection_permutation(const HalfFilledBasis& basis);

/// Composite permutation exchanging the up and down words.
[[nodiscard]] std::vector<std::uint32_t> spin_flip_permutation(const HalfFilledBasis& basis);

/// Composite permutation for c_s -> (-1)^s c_s^dagger on both spins. With up
/// modes ordered before down modes and N even, all string signs cancel and
/// the operator maps (u, d) -> (~u, ~d). It commutes with H0 at half filling
/// and reverses the sign of the dipole.
[[nodiscard]] std::vector<std::uint32_t> particle_hole_permutation(const HalfFilledBasis& basis);

/// <x|P|x> for a permutation operator.
[[nodiscard]] double permutation_expectation(const std::vector<std::uint32_t>& perm, const Eigen::Ref<const Eigen::VectorXd>& x);

/// y = S^2 x in the S_z = 0 half-filled sector.
[[nodiscard]] Eigen::VectorXd apply_spin_squared(const HalfFilledBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Total spin quantum number recovered from <S^2> = S(S+1).
[[nodiscard]] double total_spin_from_expectation(double s2) noexcept;

} // namespace chainhhg

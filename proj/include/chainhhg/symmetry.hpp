#pragma once

/**
 * @file symmetry.hpp
 * @brief Reflection x spin-flip symmetry sectors of the half-filled chain.
 *
 * Both operations commute with H0, and the dipole operator is odd under the
 * reflection and even under the spin flip. Each sector basis vector is a
 * normalized orbit sum  sum_g c_g |g>  with c_g = chi(sigma) / sqrt(|orbit|)
 * for the group element sigma mapping the orbit representative onto g.
 */

#include "chainhhg/fock_basis.hpp"
#include "chainhhg/sparse_operator.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace chainhhg {

/// Orbits of {1, P, Z, PZ} on the composite basis.
class SymmetryOrbits {
public:
    explicit SymmetryOrbits(const HalfFilledBasis& basis);

    [[nodiscard]] std::size_t dimension() const noexcept { return images_.size(); }
    /// Images of g under {1, P, Z, PZ}.
    [[nodiscard]] const std::array<std::uint32_t, 4>& images(std::size_t g) const noexcept { return images_[g]; }
    [[nodiscard]] const std::vector<std::uint32_t>& reflection() const noexcept { return reflection_; }
    [[nodiscard]] const std::vector<std::uint32_t>& spin_flip() const noexcept { return spin_flip_; }

private:
    std::vector<std::array<std::uint32_t, 4>> images_;
    std::vector<std::uint32_t> reflection_;
    std::vector<std::uint32_t> spin_flip_;
};

class SymmetrySector {
public:
    SymmetrySector(const SymmetryOrbits& orbits, int parity, int spin_flip);

    [[nodiscard]] int parity() const noexcept { return parity_; }
    [[nodiscard]] int spin_flip() const noexcept { return spin_flip_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return reps_.size(); }
    [[nodiscard]] std::size_t full_dimension() const noexcept { return row_.size(); }

    /// Operator restricted to the sector. h must commute with the group.
    [[nodiscard]] SparseOperator restrict(const SparseOperator& h) const;

    /// Sector coordinates to a full composite-basis vector.
    [[nodiscard]] Eigen::VectorXd embed(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// Full vector to sector coordinates (orthogonal projection).
    [[nodiscard]] Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& u) const;

private:
    int parity_;
    int spin_flip_;
    std::vector<std::uint32_t> reps_;  ///< full index of each sector row's representative
    std::vector<double> orbit_size_;
    std::vector<std::int32_t> row_;    ///< sector row of each full index, -1 when absent
    std::vector<double> coeff_;        ///< c_g
};

} // namespace chainhhg

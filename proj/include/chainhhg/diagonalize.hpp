#pragma once

#include "chainhhg/eigensolver.hpp"
#include "chainhhg/lattice.hpp"

namespace chainhhg {

struct DiagonalizeOptions {
    SolverOptions solver;
    AssemblyOptions assembly;
    /// Solve the four reflection x spin-flip sectors separately and merge.
    bool use_symmetry = true;
};

/// Lowest solver.k eigenpairs of the chain's H0 as full composite-basis
/// vectors, labelled with reflection and spin-flip eigenvalues. With
/// symmetry on, each sector is enlarged until its highest computed level
/// lies at or above the merged k-th level, so the merged set is exactly the
/// lowest k of the full operator.
[[nodiscard]] EigenSolution diagonalize_chain(const ChainSpec& spec, const DiagonalizeOptions& opts);

/// Fills parity and spin_flip by evaluating <u|P|u> and <u|Z|u>.
void label_symmetries(const HalfFilledBasis& basis, EigenSolution& sol);

} // namespace chainhhg

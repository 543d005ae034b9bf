#include "chainhhg/diagonalize.hpp"

#include "chainhhg/errors.hpp"
#include "chainhhg/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace chainhhg {

namespace {

int round_label(double expectation) {
    if (expectation > 0.5) return 1;
    if (expectation < -0.5) return -1;
    return 0;
}

} // namespace

void label_symmetries(const HalfFilledBasis& basis, EigenSolution& sol) {
    const auto p = reflection_permutation(basis);
    const auto z = spin_flip_permutation(basis);
    sol.parity.resize(static_cast<std::size_t>(sol.count()));
    sol.spin_flip.resize(static_cast<std::size_t>(sol.count()));
    for (int j = 0; j < sol.count(); ++j) {
        sol.parity[static_cast<std::size_t>(j)] = round_label(permutation_expectation(p, sol.vectors.col(j)));
        sol.spin_flip[static_cast<std::size_t>(j)] = round_label(permutation_expectation(z, sol.vectors.col(j)));
    }
}

EigenSolution diagonalize_chain(const ChainSpec& spec, const DiagonalizeOptions& opts) {
    spec.validate();
    const SparseOperator h = assemble_H0(spec, opts.assembly);
    const HalfFilledBasis basis(spec.sites);
    const std::size_t n = h.dimension();
    const int k = opts.solver.k;
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw ParameterError("k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");

    if (!opts.use_symmetry) {
        EigenSolution sol = lowest_eigenpairs(h, opts.solver);
        label_symmetries(basis, sol);
        return sol;
    }

    const SymmetryOrbits orbits(basis);
    struct SectorRun {
        SymmetrySector sector;
        SparseOperator op;
        EigenSolution sol;
        int k = 0;
    };
    std::vector<SectorRun> runs;
    for (int parity : {1, -1})
        for (int flip : {1, -1}) {
            SymmetrySector sector(orbits, parity, flip);
            if (sector.dimension() == 0) continue;
            SparseOperator op = sector.restrict(h);
            runs.push_back({std::move(sector), std::move(op), {}, 0});
        }

    const int guess = (k + 3) / 4 + (k + 3) / 16 + opts.solver.block_size;
    for (auto& run : runs) run.k = static_cast<int>(std::min<std::size_t>(run.op.dimension(), static_cast<std::size_t>(guess)));

    std::vector<bool> stale(runs.size(), true);
    for (;;) {
        for (std::size_t s = 0; s < runs.size(); ++s) {
            if (!stale[s]) continue;
            SolverOptions sub = opts.solver;
            sub.k = runs[s].k;
            sub.seed = opts.solver.seed + 7919 * s;
            sub.progress = nullptr;
            runs[s].sol = lowest_eigenpairs(runs[s].op, sub);
            stale[s] = false;
        }
        std::vector<double> all;
        for (const auto& run : runs)
            for (int i = 0; i < run.sol.count(); ++i) all.push_back(run.sol.energies[i]);
        if (all.size() < static_cast<std::size_t>(k))
            throw ParameterError("sectors hold fewer states than requested");
        std::nth_element(all.begin(), all.begin() + (k - 1), all.end());
        const double kth = all[static_cast<std::size_t>(k - 1)];
        bool grown = false;
        for (std::size_t s = 0; s < runs.size(); ++s) {
            auto& run = runs[s];
            const bool complete = static_cast<std::size_t>(run.k) == run.op.dimension();
            if (complete || run.sol.energies[run.k - 1] >= kth) continue;
            run.k = static_cast<int>(std::min<std::size_t>(run.op.dimension(),
                                                           static_cast<std::size_t>(run.k + run.k / 2 + opts.solver.block_size)));
            stale[s] = true;
            grown = true;
        }
        if (!grown) break;
    }

    // Merge the lowest k across sectors.
    struct Pick {
        double energy;
        std::size_t run;
        int index;
    };
    std::vector<Pick> picks;
    for (std::size_t s = 0; s < runs.size(); ++s)
        for (int i = 0; i < runs[s].sol.count(); ++i) picks.push_back({runs[s].sol.energies[i], s, i});
    std::stable_sort(picks.begin(), picks.end(), [](const Pick& a, const Pick& b) { return a.energy < b.energy; });
    picks.resize(static_cast<std::size_t>(k));

    EigenSolution sol;
    sol.seed = opts.solver.seed;
    sol.tol = opts.solver.tol;
    sol.energies.resize(k);
    sol.vectors.resize(static_cast<Eigen::Index>(n), k);
    sol.parity.resize(static_cast<std::size_t>(k));
    sol.spin_flip.resize(static_cast<std::size_t>(k));
    std::vector<int> sector_label(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const Pick& pick = picks[static_cast<std::size_t>(j)];
        const auto& run = runs[pick.run];
        sol.energies[j] = pick.energy;
        sol.vectors.col(j) = run.sector.embed(run.sol.vectors.col(pick.index));
        sol.parity[static_cast<std::size_t>(j)] = run.sector.parity();
        sol.spin_flip[static_cast<std::size_t>(j)] = run.sector.spin_flip();
        sector_label[static_cast<std::size_t>(j)] = static_cast<int>(pick.run);
    }
    for (auto& run : runs) sol.matvecs += run.sol.matvecs;
    runs.clear();

    finalize_solution(h, sol, opts.solver.cluster_gap, &sector_label);
    const double worst = sol.residuals.maxCoeff();
    if (worst > 10.0 * opts.solver.tol && worst > 1e-11)
        throw ConvergenceError("merged eigenpairs exceed the residual tolerance (worst " + std::to_string(worst) + ")");
    return sol;
}

} // namespace chainhhg

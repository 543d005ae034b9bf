#include "chainhhg/eigensolver.hpp"

#include "chainhhg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace chainhhg {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void fill_random(Eigen::Ref<MatrixXd> q, std::mt19937_64& eng) {
    for (Index c = 0; c < q.cols(); ++c)
        for (Index r = 0; r < q.rows(); ++r)
            q(r, c) = static_cast<double>(eng() >> 11) * 0x1.0p-52 - 1.0;
}

void project_out(const Eigen::Ref<const MatrixXd>& basis, Eigen::Ref<MatrixXd> x) {
    if (basis.cols() == 0) return;
    for (int pass = 0; pass < 2; ++pass) {
        const MatrixXd c = basis.transpose() * x;
        x.noalias() -= basis * c;
    }
}

// Makes q orthonormal and orthogonal to basis. Columns that collapse are
// replaced by fresh random directions. Pass projected = true when q is
// already orthogonal to basis.
void orthonormalize(const Eigen::Ref<const MatrixXd>& basis, Eigen::Ref<MatrixXd> q, std::mt19937_64& eng,
                    bool projected = false) {
    VectorXd entry(q.cols());
    for (Index c = 0; c < q.cols(); ++c) entry[c] = q.col(c).norm();
    if (!projected) project_out(basis, q);
    for (Index c = 0; c < q.cols(); ++c) {
        for (int attempt = 0;; ++attempt) {
            auto col = q.col(c);
            for (int pass = 0; pass < 2; ++pass)
                for (Index j = 0; j < c; ++j) col -= q.col(j).dot(col) * q.col(j);
            const double nrm = col.norm();
            if (nrm > 0.0 && nrm > 1e-10 * entry[c]) {
                col /= nrm;
                break;
            }
            if (attempt >= 4) throw ConvergenceError("Lanczos basis could not be extended");
            fill_random(q.col(c), eng);
            entry[c] = q.col(c).norm();
            project_out(basis, q.col(c));
        }
    }
}

// V(:, 0:keep) <- V(:, 0:used) * Y, row chunk by row chunk.
void rotate_in_place(MatrixXd& v, Index used, const Eigen::Ref<const MatrixXd>& y) {
    constexpr Index chunk = 2048;
    const Index keep = y.cols();
    MatrixXd tmp;
    for (Index r = 0; r < v.rows(); r += chunk) {
        const Index rows = std::min(chunk, v.rows() - r);
        tmp.noalias() = v.block(r, 0, rows, used) * y;
        v.block(r, 0, rows, keep) = tmp;
    }
}

std::string residual_report(const VectorXd& energies, const VectorXd& residuals, int k) {
    std::ostringstream os;
    os.precision(3);
    for (int i = 0; i < k && i < residuals.size(); ++i)
        os << "\n  pair " << i << ": energy " << energies[i] << " residual " << std::scientific << residuals[i]
           << std::defaultfloat;
    return os.str();
}

EigenSolution lanczos(const SparseOperator& h, const SolverOptions& opts) {
    const Index n = static_cast<Index>(h.dimension());
    const Index k = opts.k;
    const Index p = std::max<Index>(1, std::min<Index>(opts.block_size, n));
    Index mmax = opts.max_basis > 0 ? opts.max_basis : k + std::max<Index>(10 * p, k);
    mmax = std::min(mmax, n);
    if (mmax < std::min(n, k + p)) mmax = std::min(n, k + p);
    // Only whole blocks are appended, except for a final partial block that
    // completes the full space.
    if (mmax < n) mmax = std::max(k + p, (mmax / p) * p);

    const std::size_t basis_bytes = static_cast<std::size_t>(n) * static_cast<std::size_t>(mmax) * sizeof(double);
    if (basis_bytes > opts.memory_cap_bytes) {
        const auto fit = static_cast<Index>(opts.memory_cap_bytes / (static_cast<std::size_t>(n) * sizeof(double)));
        if (fit < std::min(n, k + p))
            throw ResourceError("Lanczos basis of " + std::to_string(k + p) + " vectors of length " +
                                std::to_string(n) + " exceeds the memory cap");
        mmax = std::max(k + p, (fit / p) * p);
    }

    std::mt19937_64 eng(opts.seed);
    MatrixXd v(n, mmax);
    MatrixXd t = MatrixXd::Zero(mmax, mmax);
    MatrixXd q(n, p);
    fill_random(q, eng);
    orthonormalize(v.leftCols(0), q, eng);
    MatrixXd w;

    EigenSolution sol;
    sol.seed = opts.seed;
    sol.tol = opts.tol;

    Index j = 0;
    Index last_block = p;
    VectorXd theta;
    MatrixXd y;
    VectorXd res;
    for (int restart = 0;; ++restart) {
        while (j < mmax) {
            const Index pb = std::min(p, mmax - j);
            if (q.cols() != pb) q.conservativeResize(Eigen::NoChange, pb);
            v.middleCols(j, pb) = q;
            w.resize(n, pb);
            h.apply_block(q, w);
            sol.matvecs += static_cast<std::size_t>(pb);
            const auto vj = v.leftCols(j + pb);
            MatrixXd c = vj.transpose() * w;
            w.noalias() -= vj * c;
            const MatrixXd c2 = vj.transpose() * w;
            w.noalias() -= vj * c2;
            c += c2;
            t.block(0, j, j + pb, pb) = c;
            t.block(j, 0, pb, j) = c.topRows(j).transpose();
            t.block(j, j, pb, pb) = 0.5 * (c.bottomRows(pb) + c.bottomRows(pb).transpose());
            j += pb;
            last_block = pb;
            if (j < mmax) {
                q = w;
                orthonormalize(v.leftCols(j), q, eng, true);
            }
        }

        Eigen::SelfAdjointEigenSolver<MatrixXd> es(t.topLeftCorner(j, j));
        theta = es.eigenvalues();
        y = es.eigenvectors();

        res = VectorXd::Zero(k);
        if (j < n) {
            const MatrixXd g = w.transpose() * w;
            for (Index i = 0; i < k; ++i) {
                const VectorXd tail = y.block(j - last_block, i, last_block, 1);
                res[i] = std::sqrt(std::max(0.0, tail.dot(g * tail)));
            }
        }
        Index converged = 0;
        while (converged < k && res[converged] <= opts.tol) ++converged;
        if (opts.progress) opts.progress(restart, static_cast<int>(converged), res.maxCoeff());
        if (converged == k) break;
        if (restart >= opts.max_restarts)
            throw ConvergenceError("Lanczos did not converge within " + std::to_string(opts.max_restarts) +
                                   " restarts; Ritz residuals:" + residual_report(theta, res, static_cast<int>(k)));

        Index keep = std::max(k, std::min(mmax - p, k + (mmax - k) / 2));
        keep = mmax - std::max(p, ((mmax - keep) / p) * p);
        rotate_in_place(v, j, y.topLeftCorner(j, keep));
        t.setZero();
        t.diagonal().head(keep) = theta.head(keep);
        j = keep;
        q = w;
        if (q.cols() != p) {
            const Index have = q.cols();
            q.conservativeResize(Eigen::NoChange, p);
            fill_random(q.rightCols(p - have), eng);
        }
        orthonormalize(v.leftCols(j), q, eng);
    }

    rotate_in_place(v, j, y.topLeftCorner(j, k));
    t.resize(0, 0);
    w.resize(0, 0);
    v.conservativeResize(Eigen::NoChange, k);
    sol.vectors = std::move(v);
    sol.energies = theta.head(k);
    sol.residuals = res;
    return sol;
}

} // namespace

void apply_sign_convention(Eigen::Ref<Eigen::MatrixXd> vectors) {
    for (Index c = 0; c < vectors.cols(); ++c) {
        auto col = vectors.col(c);
        const double peak = col.cwiseAbs().maxCoeff();
        if (peak == 0.0) continue;
        Index pick = 0;
        for (Index r = 0; r < col.size(); ++r) {
            if (std::abs(col[r]) >= peak * (1.0 - 1e-6)) {
                pick = r;
                break;
            }
        }
        if (col[pick] < 0.0) col = -col;
    }
}

std::vector<int> find_clusters(const Eigen::VectorXd& energies, double gap) {
    std::vector<int> ids(static_cast<std::size_t>(energies.size()));
    int id = 0;
    for (Index i = 0; i < energies.size(); ++i) {
        if (i > 0 && energies[i] - energies[i - 1] >= gap) ++id;
        ids[static_cast<std::size_t>(i)] = id;
    }
    return ids;
}

void canonicalize_degenerate_block(Eigen::Ref<Eigen::MatrixXd> block) {
    const Index c = block.cols();
    for (Index t = 0; t < c; ++t) {
        auto rest = block.rightCols(c - t);
        Index pivot = 0;
        rest.rowwise().squaredNorm().maxCoeff(&pivot);
        // Householder reflection sending the pivot row of the remaining span onto e_0.
        VectorXd row = rest.row(pivot).transpose();
        const double alpha = row.norm();
        if (alpha == 0.0) break;
        VectorXd u = row;
        u[0] -= alpha;
        const double un = u.squaredNorm();
        if (un > 0.0) {
            const VectorXd ru = rest * u;
            rest.noalias() -= (2.0 / un) * ru * u.transpose();
        }
    }
}

void finalize_solution(const SparseOperator& h, EigenSolution& sol, double cluster_gap,
                       const std::vector<int>* sector_labels) {
    const Index k = sol.energies.size();
    const double exact_gap = std::max(1e-12, 10.0 * sol.tol);
    // Rotations are only meaningful inside numerically exact degeneracies;
    // elsewhere the Ritz vectors are already unique up to sign.
    const std::vector<int> exact = find_clusters(sol.energies, exact_gap);
    for (Index start = 0; start < k;) {
        Index stop = start + 1;
        while (stop < k && exact[static_cast<std::size_t>(stop)] == exact[static_cast<std::size_t>(start)]) ++stop;
        if (stop - start > 1) {
            std::vector<Index> members(static_cast<std::size_t>(stop - start));
            std::iota(members.begin(), members.end(), start);
            if (sector_labels) {
                std::stable_sort(members.begin(), members.end(), [&](Index a, Index b) {
                    return (*sector_labels)[static_cast<std::size_t>(a)] < (*sector_labels)[static_cast<std::size_t>(b)];
                });
            }
            for (std::size_t s = 0; s < members.size();) {
                std::size_t e = s + 1;
                while (e < members.size() &&
                       (!sector_labels || (*sector_labels)[static_cast<std::size_t>(members[e])] ==
                                              (*sector_labels)[static_cast<std::size_t>(members[s])]))
                    ++e;
                if (e - s > 1) {
                    MatrixXd block(sol.vectors.rows(), static_cast<Index>(e - s));
                    for (std::size_t i = s; i < e; ++i) block.col(static_cast<Index>(i - s)) = sol.vectors.col(members[i]);
                    canonicalize_degenerate_block(block);
                    for (std::size_t i = s; i < e; ++i) sol.vectors.col(members[i]) = block.col(static_cast<Index>(i - s));
                }
                s = e;
            }
        }
        start = stop;
    }

    apply_sign_convention(sol.vectors);

    constexpr Index chunk = 8;
    sol.residuals.resize(k);
    for (Index c0 = 0; c0 < k; c0 += chunk) {
        const Index cols = std::min(chunk, k - c0);
        MatrixXd hv(sol.vectors.rows(), cols);
        h.apply_block(sol.vectors.middleCols(c0, cols), hv);
        sol.matvecs += static_cast<std::size_t>(cols);
        for (Index i = 0; i < cols; ++i) {
            const double e = sol.vectors.col(c0 + i).dot(hv.col(i));
            sol.energies[c0 + i] = e;
            sol.residuals[c0 + i] = (hv.col(i) - e * sol.vectors.col(c0 + i)).norm();
        }
    }

    std::vector<Index> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return sol.energies[a] < sol.energies[b]; });
    if (!std::is_sorted(order.begin(), order.end())) {
        const auto permute_ints = [&](std::vector<int>& xs) {
            if (xs.empty()) return;
            std::vector<int> out(xs.size());
            for (std::size_t i = 0; i < order.size(); ++i) out[i] = xs[static_cast<std::size_t>(order[i])];
            xs = std::move(out);
        };
        VectorXd e(k), r(k);
        for (Index i = 0; i < k; ++i) {
            e[i] = sol.energies[order[static_cast<std::size_t>(i)]];
            r[i] = sol.residuals[order[static_cast<std::size_t>(i)]];
        }
        // Swap columns in place along permutation cycles.
        std::vector<bool> done(static_cast<std::size_t>(k), false);
        for (Index i = 0; i < k; ++i) {
            if (done[static_cast<std::size_t>(i)]) continue;
            VectorXd first = sol.vectors.col(i);
            Index cur = i;
            while (true) {
                done[static_cast<std::size_t>(cur)] = true;
                const Index src = order[static_cast<std::size_t>(cur)];
                if (src == i) {
                    sol.vectors.col(cur) = first;
                    break;
                }
                sol.vectors.col(cur) = sol.vectors.col(src);
                cur = src;
            }
        }
        sol.energies = e;
        sol.residuals = r;
        permute_ints(sol.parity);
        permute_ints(sol.spin_flip);
    }
    sol.cluster = find_clusters(sol.energies, cluster_gap);
}

EigenSolution dense_eigenpairs(const SparseOperator& h, int k, double cluster_gap) {
    const auto n = static_cast<Index>(h.dimension());
    if (k < 1 || k > n) throw ParameterError("k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h.to_dense());
    EigenSolution sol;
    sol.energies = es.eigenvalues().head(k);
    sol.vectors = es.eigenvectors().leftCols(k);
    sol.tol = 1e-12;
    finalize_solution(h, sol, cluster_gap);
    return sol;
}

EigenSolution lowest_eigenpairs(const SparseOperator& h, const SolverOptions& opts) {
    const std::size_t n = h.dimension();
    if (opts.k < 1 || static_cast<std::size_t>(opts.k) > n)
        throw ParameterError("k = " + std::to_string(opts.k) + " outside [1, " + std::to_string(n) + "]");
    if (!(opts.tol > 0.0)) throw ParameterError("solver tolerance must be positive");
    const bool dense = opts.method == SolverMethod::Dense ||
                       (opts.method == SolverMethod::Auto && n <= opts.dense_threshold);
    if (dense) {
        EigenSolution sol = dense_eigenpairs(h, opts.k, opts.cluster_gap);
        sol.seed = opts.seed;
        return sol;
    }
    EigenSolution sol = lanczos(h, opts);
    finalize_solution(h, sol, opts.cluster_gap);
    const double worst = sol.residuals.maxCoeff();
    if (worst > 10.0 * opts.tol)
        throw ConvergenceError("Lanczos residuals exceed the tolerance after refinement:" +
                               residual_report(sol.energies, sol.residuals, opts.k));
    return sol;
}

} // namespace chainhhg

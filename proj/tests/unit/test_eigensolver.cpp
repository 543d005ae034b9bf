#include "doctest.h"

#include "chainhhg/eigensolver.hpp"
#include "chainhhg/errors.hpp"
#include "chainhhg/lattice.hpp"

#include <Eigen/Dense>

#include <random>

using namespace chainhhg;

namespace {

SparseOperator random_sparse_symmetric(std::size_t n, int per_row, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> col(0, n - 1);
    std::vector<std::vector<SparseOperator::Entry>> rows(n);
    for (std::size_t r = 0; r < n; ++r) {
        rows[r].push_back({static_cast<SparseOperator::Index>(r), 4.0 * val(eng)});
        for (int e = 0; e < per_row; ++e) {
            const auto c = col(eng);
            const double x = val(eng);
            rows[r].push_back({static_cast<SparseOperator::Index>(c), x});
            rows[c].push_back({static_cast<SparseOperator::Index>(r), x});
        }
    }
    return SparseOperator::from_rows(std::move(rows));
}

Eigen::VectorXd dense_eigenvalues(const SparseOperator& h) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h.to_dense(), Eigen::EigenvaluesOnly).eigenvalues();
}

double orthonormality_error(const Eigen::MatrixXd& v) {
    return (v.transpose() * v - Eigen::MatrixXd::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("Lanczos matches dense eigenvalues on a random sparse matrix") {
    const auto h = random_sparse_symmetric(2500, 4, 7);
    const auto ref = dense_eigenvalues(h);
    for (int block : {1, 2, 4, 8}) {
        SolverOptions o;
        o.k = 20;
        o.tol = 1e-10;
        o.block_size = block;
        o.method = SolverMethod::Lanczos;
        const auto sol = lowest_eigenpairs(h, o);
        REQUIRE(sol.count() == 20);
        for (int i = 0; i < 20; ++i) CHECK(std::abs(sol.energies[i] - ref[i]) < 1e-9);
        CHECK(sol.residuals.maxCoeff() <= 10 * o.tol);
        CHECK(orthonormality_error(sol.vectors) < 1e-12);
    }
}

TEST_CASE("Lanczos on H0 (N = 6) agrees with the dense path") {
    const ChainSpec spec{6, 0.10026, 0.18268, 0.1};
    const auto h = assemble_H0(spec);
    SolverOptions o;
    o.k = 30;
    o.tol = 1e-11;
    o.method = SolverMethod::Lanczos;
    const auto lan = lowest_eigenpairs(h, o);
    const auto den = dense_eigenpairs(h, 30);
    for (int i = 0; i < 30; ++i) CHECK(std::abs(lan.energies[i] - den.energies[i]) < 1e-10);
    // Same subspace per degeneracy cluster.
    for (int i = 0; i < 30;) {
        int j = i;
        while (j + 1 < 30 && den.cluster[static_cast<std::size_t>(j + 1)] == den.cluster[static_cast<std::size_t>(i)]) ++j;
        if (j + 1 < 30) {
            const auto a = lan.vectors.middleCols(i, j - i + 1);
            const auto b = den.vectors.middleCols(i, j - i + 1);
            const Eigen::MatrixXd overlap = a.transpose() * b;
            const auto sv = Eigen::JacobiSVD<Eigen::MatrixXd>(overlap).singularValues();
            CHECK(sv.minCoeff() > 1.0 - 1e-8);
        }
        i = j + 1;
    }
}

TEST_CASE("degenerate spectrum with multiplicity up to the block size") {
    // diag(0,0,0,1,1,2,3,4) followed by a dense band of levels from 10 upwards.
    const std::size_t n = 2200;
    std::vector<std::vector<SparseOperator::Entry>> rows(n);
    std::vector<double> diag(n);
    for (std::size_t r = 0; r < n; ++r) diag[r] = r < 3 ? 0.0 : r < 5 ? 1.0 : r < 8 ? static_cast<double>(r - 3) : 10.0 + 0.01 * static_cast<double>(r - 8);
    for (std::size_t r = 0; r < n; ++r) rows[r].push_back({static_cast<SparseOperator::Index>(r), diag[r]});
    const auto h = SparseOperator::from_rows(std::move(rows));
    SolverOptions o;
    o.k = 8;
    o.tol = 1e-10;
    o.method = SolverMethod::Lanczos;
    const auto sol = lowest_eigenpairs(h, o);
    const double ref[] = {0, 0, 0, 1, 1, 2, 3, 4};
    for (int i = 0; i < 8; ++i) CHECK(std::abs(sol.energies[i] - ref[i]) < 1e-10);
    CHECK(sol.cluster[0] == sol.cluster[2]);
    CHECK(sol.cluster[2] != sol.cluster[3]);
}

TEST_CASE("same seed gives bitwise identical results") {
    const auto h = random_sparse_symmetric(2100, 3, 11);
    SolverOptions o;
    o.k = 10;
    o.method = SolverMethod::Lanczos;
    const auto a = lowest_eigenpairs(h, o);
    const auto b = lowest_eigenpairs(h, o);
    CHECK(a.energies == b.energies);
    CHECK(a.vectors == b.vectors);
}

TEST_CASE("eigenvectors follow the sign convention") {
    const auto h = random_sparse_symmetric(300, 3, 5);
    const auto sol = dense_eigenpairs(h, 12);
    for (int j = 0; j < sol.count(); ++j) {
        const auto col = sol.vectors.col(j);
        Eigen::Index arg = 0;
        col.cwiseAbs().maxCoeff(&arg);
        CHECK(col[arg] > 0.0);
    }
}

TEST_CASE("sign convention ties go to the lowest index") {
    Eigen::MatrixXd v(4, 1);
    v << 0.1, -0.5, 0.5, 0.2;
    apply_sign_convention(v);
    CHECK(v(1, 0) == 0.5);
    CHECK(v(2, 0) == -0.5);
}

TEST_CASE("cluster detection") {
    Eigen::VectorXd e(6);
    e << 0.0, 1e-9, 0.5, 0.5 + 5e-7, 0.5 + 2e-6, 1.0;
    const auto c = find_clusters(e, 1e-6);
    CHECK(c[0] == c[1]);
    CHECK(c[1] != c[2]);
    CHECK(c[2] == c[3]);
    CHECK(c[3] != c[4]);
    CHECK(c[4] != c[5]);
}

TEST_CASE("canonical degenerate basis does not depend on the incoming rotation") {
    std::mt19937_64 eng(3);
    std::normal_distribution<double> g;
    Eigen::MatrixXd block(40, 3);
    for (Eigen::Index i = 0; i < block.size(); ++i) block.data()[i] = g(eng);
    block = Eigen::HouseholderQR<Eigen::MatrixXd>(block).householderQ() * Eigen::MatrixXd::Identity(40, 3);
    Eigen::MatrixXd rot(3, 3);
    for (Eigen::Index i = 0; i < rot.size(); ++i) rot.data()[i] = g(eng);
    rot = Eigen::HouseholderQR<Eigen::MatrixXd>(rot).householderQ();
    Eigen::MatrixXd a = block;
    Eigen::MatrixXd b = block * rot;
    canonicalize_degenerate_block(a);
    canonicalize_degenerate_block(b);
    apply_sign_convention(a);
    apply_sign_convention(b);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(orthonormality_error(a) < 1e-13);
}

TEST_CASE("invalid requests are rejected") {
    const auto h = random_sparse_symmetric(50, 2, 1);
    SolverOptions o;
    o.k = 0;
    CHECK_THROWS_AS((void)lowest_eigenpairs(h, o), ParameterError);
    o.k = 51;
    CHECK_THROWS_AS((void)lowest_eigenpairs(h, o), ParameterError);
}

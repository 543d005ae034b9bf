#include "doctest.h"

#include "chainhhg/eigensolver.hpp"
#include "chainhhg/errors.hpp"
#include "chainhhg/lattice.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <random>
#include <set>

using namespace chainhhg;

namespace {

// ============================================================================
// Independent second-quantized oracle
// ============================================================================

// Fock state over 2N ordered modes: up modes 0..N-1, then down modes N..2N-1.
using Modes = std::uint64_t;

// c_b then c+_a applied to a mode bitstring; returns the sign (0 when annihilated).
int apply_hop(Modes in, int a, int b, Modes& out) {
    if (!((in >> b) & 1U)) return 0;
    int sign = (std::popcount(in & ((Modes{1} << b) - 1)) & 1) ? -1 : 1;
    Modes mid = in & ~(Modes{1} << b);
    if ((mid >> a) & 1U) return 0;
    sign *= (std::popcount(mid & ((Modes{1} << a) - 1)) & 1) ? -1 : 1;
    out = mid | (Modes{1} << a);
    return sign;
}

// Dense H0 built from second-quantized operators, indexed like the composite basis.
Eigen::MatrixXd oracle_h0(const ChainSpec& spec) {
    const int n = spec.sites;
    const HalfFilledBasis basis(n);
    const auto d = basis.dn.dimension();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(basis.dimension()),
                                              static_cast<Eigen::Index>(basis.dimension()));
    auto index = [&](Modes m) {
        const Word up = static_cast<Word>(m & ((Modes{1} << n) - 1));
        const Word dn = static_cast<Word>(m >> n);
        return static_cast<Eigen::Index>(basis.up.rank(up) * d + basis.dn.rank(dn));
    };
    for (std::size_t iu = 0; iu < basis.up.dimension(); ++iu)
        for (std::size_t id = 0; id < d; ++id) {
            const Modes in = Modes{basis.up.unrank(iu)} | (Modes{basis.dn.unrank(id)} << n);
            const Eigen::Index col = index(in);
            for (int spin = 0; spin < 2; ++spin)
                for (int s = 0; s + 1 < n; ++s) {
                    const int a = spin * n + s;
                    const int b = a + 1;
                    for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
                        Modes out = 0;
                        const int sign = apply_hop(in, x, y, out);
                        if (sign) h(index(out), col) += -spec.bond_amplitude(s) * sign;
                    }
                }
            for (int s = 0; s < n; ++s)
                if (((in >> s) & 1U) && ((in >> (n + s)) & 1U)) h(col, col) += spec.U;
        }
    return h;
}

Eigen::VectorXd dense_eigenvalues(const Eigen::MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
}

Eigen::MatrixXd one_body(const ChainSpec& spec) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(spec.sites, spec.sites);
    for (int s = 0; s + 1 < spec.sites; ++s) t(s, s + 1) = t(s + 1, s) = -spec.bond_amplitude(s);
    return t;
}

} // namespace

// ============================================================================
// Chain geometry
// ============================================================================

TEST_CASE("positions are centred with unit spacing") {
    for (int n : {2, 4, 12}) {
        const ChainSpec spec{n, 0.1, 0.2, 0.0};
        const auto x = spec.positions();
        double sum = 0;
        for (double xi : x) sum += xi;
        CHECK(sum == 0.0);
        for (int s = 0; s + 1 < n; ++s) CHECK(x[static_cast<std::size_t>(s + 1)] - x[static_cast<std::size_t>(s)] == 1.0);
    }
}

TEST_CASE("odd or out-of-range chains are rejected") {
    CHECK_THROWS_WITH_AS(ChainSpec({5, 0.1, 0.2, 0.1}).validate(), "N must be even", ParameterError);
    CHECK_THROWS_AS(ChainSpec({0, 0.1, 0.2, 0.1}).validate(), ParameterError);
    CHECK_THROWS_AS(ChainSpec({34, 0.1, 0.2, 0.1}).validate(), ParameterError);
}

// ============================================================================
// Single-spin hopping
// ============================================================================

TEST_CASE("two sites, one particle: [[0,-v],[-v,0]]") {
    const ChainSpec spec{2, 0.3, 0.7, 0.0};
    const auto h = single_spin_hopping(spec, SectorBasis(2, 1)).to_dense();
    CHECK(h(0, 0) == 0.0);
    CHECK(h(1, 1) == 0.0);
    CHECK(h(0, 1) == -0.3);
    CHECK(h(1, 0) == -0.3);
}

TEST_CASE("four sites, one particle: chiral-symmetric spectrum") {
    const ChainSpec spec{4, 0.10026, 0.18268, 0.0};
    const auto ev = dense_eigenvalues(single_spin_hopping(spec, SectorBasis(4, 1)).to_dense());
    for (int i = 0; i < 4; ++i) CHECK(ev[i] == doctest::Approx(-ev[3 - i]).epsilon(1e-14));
    const auto ref = dense_eigenvalues(one_body(spec));
    for (int i = 0; i < 4; ++i) CHECK(ev[i] == doctest::Approx(ref[i]).epsilon(1e-14));
}

TEST_CASE("four sites, two particles: all 36 entries against second quantization") {
    const ChainSpec spec{4, 0.10026, 0.18268, 0.0};
    const SectorBasis sector(4, 2);
    const auto h = single_spin_hopping(spec, sector).to_dense();
    for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t c = 0; c < 6; ++c) {
            double ref = 0.0;
            for (int s = 0; s < 3; ++s)
                for (auto [a, b] : {std::pair{s, s + 1}, std::pair{s + 1, s}}) {
                    Modes out = 0;
                    const int sign = apply_hop(sector.unrank(c), a, b, out);
                    if (sign && out == sector.unrank(r)) ref += -spec.bond_amplitude(s) * sign;
                }
            CHECK(h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) == ref);
        }
}

// ============================================================================
// Interaction and composite H0
// ============================================================================

TEST_CASE("interaction diagonal examples") {
    const ChainSpec spec{12, 0.1, 0.2, 0.37};
    CHECK(interaction_diagonal(spec, 0b1, 0b1) == 0.37);
    CHECK(interaction_diagonal(spec, 0b010101010101, 0b101010101010) == 0.0);
    CHECK(interaction_diagonal(spec, 0b111111, 0b111111) == doctest::Approx(6 * 0.37));
}

TEST_CASE("H0 equals the second-quantized oracle entry by entry") {
    for (int n : {2, 4, 6}) {
        const ChainSpec spec{n, 0.10026, 0.18268, 0.1};
        const auto h = assemble_H0(spec).to_dense();
        const auto ref = oracle_h0(spec);
        CHECK((h - ref).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("H0 is exactly symmetric with at most 2N+1 entries per row") {
    const ChainSpec spec{8, 0.10026, 0.18268, 0.1};
    const auto h = assemble_H0(spec);
    CHECK(h.max_asymmetry() == 0.0);
    for (std::size_t r = 0; r < h.dimension(); ++r) CHECK(h.row_cols(r).size() <= 2u * 8u + 1u);
}

TEST_CASE("Hubbard dimer closed form") {
    const double v = 0.18268, U = 0.1;
    const ChainSpec spec{2, v, 0.5, U};
    const auto ev = dense_eigenvalues(assemble_H0(spec).to_dense());
    const double root = std::sqrt(U * U + 16 * v * v);
    const double ref[] = {(U - root) / 2, 0.0, U, (U + root) / 2};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(ev[i] - ref[i]) < 1e-12);
}

TEST_CASE("U = 0: ground energy is twice the filled one-body levels") {
    for (int n : {4, 6, 8}) {
        for (auto [v, w] : {std::pair{0.10026, 0.18268}, std::pair{0.18268, 0.10026}}) {
            const ChainSpec spec{n, v, w, 0.0};
            const auto one = dense_eigenvalues(one_body(spec));
            const double ref = 2.0 * one.head(n / 2).sum();
            double e0 = 0.0;
            if (n <= 6) {
                e0 = dense_eigenvalues(assemble_H0(spec).to_dense())[0];
            } else {
                SolverOptions o;
                o.k = 1;
                o.tol = 1e-12;
                o.method = SolverMethod::Lanczos;
                e0 = lowest_eigenpairs(assemble_H0(spec), o).energies[0];
            }
            CHECK(std::abs(e0 - ref) < 1e-10);
        }
    }
}

TEST_CASE("memory cap produces a resource error") {
    const ChainSpec spec{12, 0.1, 0.2, 0.1};
    AssemblyOptions tiny;
    tiny.memory_cap_bytes = 1024;
    CHECK_THROWS_AS((void)assemble_H0(spec, tiny), ResourceError);
    CHECK(estimate_h0_bytes(spec) > 100u * 1024u * 1024u);
}

// ============================================================================
// Dipole and symmetries
// ============================================================================

TEST_CASE("dipole diagonal: occupied positions summed over both spins") {
    const ChainSpec spec{6, 0.1, 0.2, 0.1};
    const HalfFilledBasis basis(6);
    const auto d = assemble_dipole_diagonal(spec);
    CHECK(d.sum() == doctest::Approx(0.0).scale(1.0));
    for (std::size_t g = 0; g < basis.dimension(); ++g) {
        const auto ci = basis.split(g);
        double ref = 0;
        for (int s = 0; s < 6; ++s) {
            if ((basis.up.unrank(ci.up) >> s) & 1U) ref += spec.position(s);
            if ((basis.dn.unrank(ci.dn) >> s) & 1U) ref += spec.position(s);
        }
        CHECK(d[static_cast<Eigen::Index>(g)] == ref);
    }
}

TEST_CASE("reflection and spin flip commute with H0; the dipole is odd under reflection") {
    const ChainSpec spec{6, 0.10026, 0.18268, 0.1};
    const HalfFilledBasis basis(6);
    const auto h = assemble_H0(spec).to_dense();
    const auto d = assemble_dipole_diagonal(spec);
    for (const auto& perm : {reflection_permutation(basis), spin_flip_permutation(basis)}) {
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(h.rows(), h.cols());
        for (std::size_t g = 0; g < perm.size(); ++g) p(perm[g], static_cast<Eigen::Index>(g)) = 1.0;
        CHECK((p * h - h * p).cwiseAbs().maxCoeff() == 0.0);
    }
    const auto refl = reflection_permutation(basis);
    for (std::size_t g = 0; g < refl.size(); ++g) CHECK(d[refl[g]] == -d[static_cast<Eigen::Index>(g)]);
    const auto flip = spin_flip_permutation(basis);
    for (std::size_t g = 0; g < flip.size(); ++g) CHECK(d[flip[g]] == d[static_cast<Eigen::Index>(g)]);
}

TEST_CASE("S^2 commutes with H0 and has eigenvalues S(S+1)") {
    const ChainSpec spec{4, 0.10026, 0.18268, 0.3};
    const HalfFilledBasis basis(4);
    const auto n = static_cast<Eigen::Index>(basis.dimension());
    Eigen::MatrixXd s2(n, n);
    for (Eigen::Index c = 0; c < n; ++c) s2.col(c) = apply_spin_squared(basis, Eigen::VectorXd::Unit(n, c));
    CHECK((s2 - s2.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    const auto h = assemble_H0(spec).to_dense();
    CHECK((s2 * h - h * s2).cwiseAbs().maxCoeff() < 1e-14);
    const auto ev = dense_eigenvalues(s2);
    std::multiset<int> spins;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = total_spin_from_expectation(ev[i]);
        CHECK(std::abs(s - std::round(s)) < 1e-10);
        spins.insert(static_cast<int>(std::round(s)));
    }
    // Sz = 0 states of four spin-1/2 sites with up to two fermions per site:
    // 36 = 20 (S=0) + 15 (S=1) + 1 (S=2)
    CHECK(spins.count(0) == 20);
    CHECK(spins.count(1) == 15);
    CHECK(spins.count(2) == 1);
}

TEST_CASE("particle-hole map commutes with H0 and reverses the dipole") {
    for (int sites : {4, 6}) {
        const ChainSpec spec{sites, 0.10026, 0.18268, 0.37};
        const HalfFilledBasis basis(sites);
        const auto h = assemble_H0(spec).to_dense();
        const auto d = assemble_dipole_diagonal(spec);
        const auto c = particle_hole_permutation(basis);
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(h.rows(), h.cols());
        for (std::size_t g = 0; g < c.size(); ++g) {
            p(c[g], static_cast<Eigen::Index>(g)) = 1.0;
            CHECK(c[c[g]] == g);
            CHECK(d[c[g]] == -d[static_cast<Eigen::Index>(g)]);
        }
        CHECK((p * h - h * p).cwiseAbs().maxCoeff() == 0.0);
    }
}

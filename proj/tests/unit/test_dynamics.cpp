#include "doctest.h"

#include "chainhhg/dynamics.hpp"
#include "chainhhg/eigensolver.hpp"
#include "chainhhg/errors.hpp"
#include "chainhhg/lattice.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

using namespace chainhhg;
using cplx = std::complex<double>;

namespace {

// exp(-i H dt) for a real symmetric 2x2 H.
Eigen::Matrix2cd expm_2x2(double a, double b, double c, double dt) {
    const double m = 0.5 * (a + b);
    const double d = 0.5 * (a - b);
    const double r = std::hypot(d, c);
    const cplx global = std::polar(1.0, -m * dt);
    const double cs = std::cos(r * dt);
    const double sn = r > 0 ? std::sin(r * dt) / r : dt;
    Eigen::Matrix2cd u;
    u(0, 0) = global * cplx{cs, -sn * d};
    u(1, 1) = global * cplx{cs, sn * d};
    u(0, 1) = u(1, 0) = global * cplx{0.0, -sn * c};
    return u;
}

// Schroedinger-picture midpoint exponential propagation sampled every `per` steps.
std::vector<Eigen::Vector2cd> two_level_reference(double e0, double e1, double t01, const PulseSpec& pulse,
                                                  long steps, long per) {
    const double dt = pulse.duration() / static_cast<double>(steps);
    Eigen::Vector2cd psi(1.0, 0.0);
    std::vector<Eigen::Vector2cd> out{psi};
    for (long s = 0; s < steps; ++s) {
        const double e = pulse.field((static_cast<double>(s) + 0.5) * dt);
        psi = expm_2x2(e0, e1, e * t01, dt) * psi;
        if ((s + 1) % per == 0) out.push_back(psi);
    }
    return out;
}

EigenSolution dimer_solution() {
    const ChainSpec spec{2, 0.18268, 0.10026, 0.1};
    return dense_eigenpairs(assemble_H0(spec), 4);
}

} // namespace

// ============================================================================
// Pulse
// ============================================================================

TEST_CASE("pulse shape") {
    const PulseSpec p;
    CHECK(p.amplitude() == doctest::Approx(0.4 * 0.0049));
    CHECK(p.duration() == doctest::Approx(5 * 2 * std::numbers::pi / 0.0049));
    CHECK(p.field(0.0) == 0.0);
    CHECK(p.field(p.duration()) == 0.0);
    CHECK(p.field(-1.0) == 0.0);
    CHECK(p.field(p.duration() + 1.0) == 0.0);
    CHECK(p.field(p.duration() / 2) == doctest::Approx(-p.amplitude()).epsilon(1e-12));
    CHECK_THROWS_AS(PulseSpec({-1.0, 0.4, 5}).validate(), ParameterError);
    CHECK_THROWS_AS(PulseSpec({0.0049, 0.4, 0}).validate(), ParameterError);
}

// ============================================================================
// Transition matrix
// ============================================================================

TEST_CASE("dimer transition matrix against a dense oracle") {
    const ChainSpec spec{2, 0.18268, 0.10026, 0.1};
    const auto sol = dimer_solution();
    const auto d = assemble_dipole_diagonal(spec);
    const auto tm = transition_matrix(sol, d);

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(assemble_H0(spec).to_dense());
    Eigen::MatrixXd u = es.eigenvectors();
    for (int j = 0; j < 4; ++j)
        if (u.col(j).dot(sol.vectors.col(j)) < 0) u.col(j) *= -1.0;
    const Eigen::MatrixXd ref = u.transpose() * d.asDiagonal() * u;
    CHECK((tm.elements - ref).cwiseAbs().maxCoeff() < 1e-14);

    CHECK(std::abs(tm.elements(0, 0)) < 1e-15);
    // Only the odd doublon combination (energy U) couples to the ground state.
    CHECK(std::abs(sol.energies[2] - 0.1) < 1e-12);
    CHECK(std::abs(tm.elements(0, 1)) < 1e-15);
    CHECK(std::abs(tm.elements(0, 3)) < 1e-15);
    CHECK(std::abs(tm.elements(0, 2)) > 0.1);
    CHECK((tm.elements - tm.elements.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("diagonal of T vanishes for parity eigenstates") {
    const ChainSpec spec{6, 0.10026, 0.18268, 0.1};
    const auto sol = dense_eigenpairs(assemble_H0(spec), 60);
    const auto tm = transition_matrix(sol, assemble_dipole_diagonal(spec));
    for (int j = 0; j < 60; ++j) {
        const bool isolated = (j == 0 || sol.cluster[static_cast<std::size_t>(j)] != sol.cluster[static_cast<std::size_t>(j - 1)]) &&
                              (j == 59 || sol.cluster[static_cast<std::size_t>(j)] != sol.cluster[static_cast<std::size_t>(j + 1)]);
        if (isolated) CHECK(std::abs(tm.elements(j, j)) <= 1e-10);
    }
}

TEST_CASE("dimension mismatch is a parameter error") {
    const auto sol = dimer_solution();
    CHECK_THROWS_AS((void)transition_matrix(sol, Eigen::VectorXd::Zero(5)), ParameterError);
}

// ============================================================================
// Interaction picture
// ============================================================================

TEST_CASE("zero field leaves the coefficients untouched") {
    const ChainSpec spec{2, 0.18268, 0.10026, 0.1};
    const auto tm = transition_matrix(dimer_solution(), assemble_dipole_diagonal(spec));
    PulseSpec pulse;
    pulse.e0_over_omega = 0.0;
    PropagationOptions o;
    o.samples = 256;
    o.keep_coefficients = true;
    const auto tr = propagate_interaction_picture(tm, pulse, o);
    CHECK(tr.x.cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((tr.coefficients.col(255) - tr.coefficients.col(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero field keeps |b_k| constant for a superposition start") {
    const ChainSpec spec{4, 0.10026, 0.18268, 0.1};
    const auto sol = dense_eigenpairs(assemble_H0(spec), 12);
    const auto tm = transition_matrix(sol, assemble_dipole_diagonal(spec));
    Eigen::VectorXcd b0 = Eigen::VectorXcd::Zero(12);
    b0[0] = 0.6;
    b0[3] = cplx{0.0, 0.8};
    PulseSpec pulse;
    pulse.e0_over_omega = 0.0;
    PropagationOptions o;
    o.samples = 64;
    o.keep_coefficients = true;
    const auto tr = propagate_interaction_picture(tm, pulse, b0, o);
    for (int m = 0; m < 64; ++m)
        CHECK((tr.coefficients.col(m).cwiseAbs() - b0.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("two-level system against a step-doubled exact propagator") {
    TransitionMatrix tm;
    tm.energies = Eigen::Vector2d(-0.3, -0.25);
    tm.elements = (Eigen::Matrix2d() << 0.0, 1.3, 1.3, 0.0).finished();
    tm.ids = {0, 1};
    const PulseSpec pulse{0.05, 0.4, 2};
    PropagationOptions o;
    o.samples = 101;
    o.keep_coefficients = true;
    const auto tr = propagate_interaction_picture(tm, pulse, o);

    const long steps = 1'000'000;
    const auto coarse = two_level_reference(-0.3, -0.25, 1.3, pulse, steps, steps / 100);
    const auto fine = two_level_reference(-0.3, -0.25, 1.3, pulse, 2 * steps, 2 * steps / 100);
    double worst = 0.0;
    for (int m = 0; m <= 100; ++m) {
        const Eigen::Vector2cd psi = (4.0 * fine[static_cast<std::size_t>(m)] - coarse[static_cast<std::size_t>(m)]) / 3.0;
        const double t = tr.times[m];
        // b_k = exp(+i e_k t) psi_k
        const Eigen::Vector2cd b_ref(std::polar(1.0, -0.3 * t) * psi[0], std::polar(1.0, -0.25 * t) * psi[1]);
        worst = std::max(worst, (tr.coefficients.col(m) - b_ref).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-8);
    CHECK(tr.max_norm_drift < 1e-8);
}

TEST_CASE("flipping eigenvector signs leaves x(t) unchanged") {
    const ChainSpec spec{4, 0.10026, 0.18268, 0.1};
    auto sol = dense_eigenpairs(assemble_H0(spec), 36);
    const auto d = assemble_dipole_diagonal(spec);
    PropagationOptions o;
    o.samples = 512;
    const PulseSpec pulse;
    const auto a = propagate_interaction_picture(transition_matrix(sol, d), pulse, o);
    for (int j = 1; j < 36; j += 3) sol.vectors.col(j) *= -1.0;
    const auto b = propagate_interaction_picture(transition_matrix(sol, d), pulse, o);
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(a.max_norm_drift < 1e-8);
}

// ============================================================================
// Full Fock space
// ============================================================================

TEST_CASE("full-space: zero field keeps the ground-state dipole constant") {
    const ChainSpec spec{4, 0.10026, 0.18268, 0.1};
    const auto h = assemble_H0(spec);
    const auto sol = dense_eigenpairs(h, 1);
    PulseSpec pulse;
    pulse.e0_over_omega = 0.0;
    FullSpaceOptions o;
    o.steps = 1 << 16;
    o.samples = 257;
    const auto tr = propagate_full_space(h, assemble_dipole_diagonal(spec), pulse, sol.vectors.col(0).cast<cplx>(), o);
    CHECK((tr.x.array() - tr.x[0]).abs().maxCoeff() < 1e-10);
    CHECK(tr.max_norm_drift < 1e-10);
}

TEST_CASE("dimer: full-space and interaction-picture trajectories agree") {
    const ChainSpec spec{2, 0.18268, 0.10026, 0.1};
    const auto h = assemble_H0(spec);
    const auto sol = dimer_solution();
    const auto d = assemble_dipole_diagonal(spec);
    const PulseSpec pulse;
    PropagationOptions po;
    po.samples = 2049;
    const auto ip = propagate_interaction_picture(transition_matrix(sol, d), pulse, po);
    FullSpaceOptions fo;
    fo.samples = 2049;
    const auto fs = propagate_full_space(h, d, pulse, sol.vectors.col(0).cast<cplx>(), fo);
    CHECK((ip.x - fs.x).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(fs.max_norm_drift < 1e-10);
}

TEST_CASE("full-space: halving the step changes x(t) by less than 1e-8") {
    const ChainSpec spec{4, 0.10026, 0.18268, 0.1};
    const auto h = assemble_H0(spec);
    const auto sol = dense_eigenpairs(h, 1);
    const auto d = assemble_dipole_diagonal(spec);
    const PulseSpec pulse;
    FullSpaceOptions a;
    a.samples = 1025;
    FullSpaceOptions b = a;
    b.steps = 2 * a.steps;
    const auto psi0 = sol.vectors.col(0).cast<cplx>().eval();
    const auto xa = propagate_full_space(h, d, pulse, psi0, a);
    const auto xb = propagate_full_space(h, d, pulse, psi0, b);
    CHECK((xa.x - xb.x).cwiseAbs().maxCoeff() < 1e-8);
}

#include "chainhhg/dynamics.hpp"

#include "chainhhg/errors.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace chainhhg {

using cplx = std::complex<double>;

// ============================================================================
// Pulse
// ============================================================================

void PulseSpec::validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw ParameterError("omega must be positive");
    if (!(e0_over_omega >= 0.0) || !std::isfinite(e0_over_omega))
        throw ParameterError("E0_over_omega must be non-negative");
    if (cycles < 1) throw ParameterError("n_cyc must be >= 1");
}

double PulseSpec::duration() const noexcept {
    return cycles * 2.0 * std::numbers::pi / omega;
}

double PulseSpec::field(double t) const noexcept {
    if (t <= 0.0 || t >= duration()) return 0.0;
    const double s = std::sin(omega * t / (2.0 * cycles));
    return amplitude() * s * s * std::cos(omega * t);
}

// ============================================================================
// Transition matrix
// ============================================================================

TransitionMatrix transition_matrix(const EigenSolution& sol, const Eigen::VectorXd& dipole) {
    const Eigen::Index n = sol.vectors.rows();
    const Eigen::Index k = sol.vectors.cols();
    if (dipole.size() != n)
        throw ParameterError("dipole has length " + std::to_string(dipole.size()) + ", eigenvectors have " +
                             std::to_string(n));
    TransitionMatrix tm;
    tm.energies = sol.energies;
    tm.elements = Eigen::MatrixXd::Zero(k, k);
    tm.ids.resize(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) tm.ids[static_cast<std::size_t>(j)] = static_cast<int>(j);

    constexpr Eigen::Index chunk = 4096;
    Eigen::MatrixXd scaled;
    for (Eigen::Index r0 = 0; r0 < n; r0 += chunk) {
        const Eigen::Index rows = std::min(chunk, n - r0);
        const auto block = sol.vectors.middleRows(r0, rows);
        scaled = dipole.segment(r0, rows).asDiagonal() * block;
        tm.elements.noalias() += block.transpose() * scaled;
    }
    // Exact symmetry; both triangles carry the same sum up to rounding.
    tm.elements = 0.5 * (tm.elements + tm.elements.transpose()).eval();
    return tm;
}

TransitionMatrix restrict_transitions(const TransitionMatrix& tm, const std::vector<int>& keep) {
    std::map<int, int> where;
    for (int i = 0; i < tm.size(); ++i) where[tm.ids[static_cast<std::size_t>(i)]] = i;
    std::vector<int> pos;
    pos.reserve(keep.size());
    for (int id : keep) {
        const auto it = where.find(id);
        if (it == where.end()) throw ParameterError("state " + std::to_string(id) + " is not available");
        pos.push_back(it->second);
    }
    const auto m = static_cast<Eigen::Index>(pos.size());
    TransitionMatrix out;
    out.energies.resize(m);
    out.elements.resize(m, m);
    out.ids = keep;
    for (Eigen::Index a = 0; a < m; ++a) {
        out.energies[a] = tm.energies[pos[static_cast<std::size_t>(a)]];
        for (Eigen::Index b = 0; b < m; ++b)
            out.elements(a, b) = tm.elements(pos[static_cast<std::size_t>(a)], pos[static_cast<std::size_t>(b)]);
    }
    return out;
}

// ============================================================================
// Interaction picture
// ============================================================================

namespace {

using State = std::vector<cplx>;

// States reachable from the initially occupied ones through couplings above cutoff.
std::vector<int> reachable_states(const Eigen::MatrixXd& t, const Eigen::VectorXcd& b0, double cutoff) {
    const auto k = static_cast<int>(t.rows());
    std::vector<char> seen(static_cast<std::size_t>(k), 0);
    std::vector<int> stack;
    for (int i = 0; i < k; ++i)
        if (b0[i] != cplx{}) {
            seen[static_cast<std::size_t>(i)] = 1;
            stack.push_back(i);
        }
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        for (int j = 0; j < k; ++j)
            if (!seen[static_cast<std::size_t>(j)] && std::abs(t(i, j)) > cutoff) {
                seen[static_cast<std::size_t>(j)] = 1;
                stack.push_back(j);
            }
    }
    std::vector<int> out;
    for (int i = 0; i < k; ++i)
        if (seen[static_cast<std::size_t>(i)]) out.push_back(i);
    return out;
}

struct InteractionRhs {
    const PulseSpec* pulse;
    const Eigen::MatrixXd* t;
    const Eigen::VectorXd* shifted;
    std::size_t* evaluations;
    Eigen::Matrix<double, 2, Eigen::Dynamic> c;
    Eigen::Matrix<double, 2, Eigen::Dynamic> y;
    Eigen::VectorXcd phase;

    void operator()(const State& b, State& dbdt, double time) {
        ++*evaluations;
        const Eigen::Index m = shifted->size();
        const double e = pulse->field(time);
        if (e == 0.0) {
            std::fill(dbdt.begin(), dbdt.end(), cplx{});
            return;
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            phase[j] = std::polar(1.0, -(*shifted)[j] * time);
            const cplx cj = phase[j] * b[static_cast<std::size_t>(j)];
            c(0, j) = cj.real();
            c(1, j) = cj.imag();
        }
        y.noalias() = c * (*t);
        for (Eigen::Index j = 0; j < m; ++j)
            dbdt[static_cast<std::size_t>(j)] = cplx{0.0, -e} * std::conj(phase[j]) * cplx{y(0, j), y(1, j)};
    }
};

} // namespace

CoefficientTrajectory propagate_interaction_picture(const TransitionMatrix& tm, const PulseSpec& pulse,
                                                    const PropagationOptions& opts) {
    if (tm.size() == 0) throw ParameterError("empty transition matrix");
    Eigen::VectorXcd b0 = Eigen::VectorXcd::Zero(tm.size());
    b0[0] = 1.0;
    return propagate_interaction_picture(tm, pulse, b0, opts);
}

CoefficientTrajectory propagate_interaction_picture(const TransitionMatrix& tm, const PulseSpec& pulse,
                                                    const Eigen::VectorXcd& b0, const PropagationOptions& opts) {
    pulse.validate();
    const int k = tm.size();
    if (k == 0) throw ParameterError("empty transition matrix");
    if (b0.size() != k) throw ParameterError("initial coefficient vector has the wrong length");
    if (opts.samples < 3) throw ParameterError("samples must be >= 3");
    if (!(opts.ode_tol > 0.0)) throw ParameterError("ode_tol must be positive");
    const double start_norm = b0.squaredNorm();
    if (std::abs(start_norm - 1.0) > 1e-12) throw ParameterError("initial coefficients are not normalized");

    const auto active = reachable_states(tm.elements, b0, opts.coupling_cutoff * tm.max_abs());
    const auto m = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd t_act(m, m);
    Eigen::VectorXd shifted(m);
    const double e_ref = tm.energies.minCoeff();
    for (Eigen::Index a = 0; a < m; ++a) {
        shifted[a] = tm.energies[active[static_cast<std::size_t>(a)]] - e_ref;
        for (Eigen::Index b = 0; b < m; ++b)
            t_act(a, b) = tm.elements(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]);
    }

    CoefficientTrajectory out;
    out.active_states = static_cast<int>(m);
    const int samples = opts.samples;
    const double duration = pulse.duration();
    out.times.resize(samples);
    for (int i = 0; i < samples; ++i) out.times[i] = duration * i / (samples - 1);
    out.times[samples - 1] = duration;
    out.x.resize(samples);
    if (opts.keep_coefficients) out.coefficients = Eigen::MatrixXcd::Zero(k, samples);

    State b(static_cast<std::size_t>(m));
    for (Eigen::Index a = 0; a < m; ++a) b[static_cast<std::size_t>(a)] = b0[active[static_cast<std::size_t>(a)]];

    InteractionRhs rhs{&pulse, &t_act, &shifted, &out.rhs_evaluations, {}, {}, {}};
    rhs.c.resize(2, m);
    rhs.y.resize(2, m);
    rhs.phase.resize(m);

    Eigen::Matrix<double, 2, Eigen::Dynamic> c(2, m);
    Eigen::Matrix<double, 2, Eigen::Dynamic> tc(2, m);
    int sample = 0;
    auto observe = [&](const State& state, double time) {
        double norm = 0.0;
        for (Eigen::Index a = 0; a < m; ++a) {
            const cplx ca = std::polar(1.0, -shifted[a] * time) * state[static_cast<std::size_t>(a)];
            c(0, a) = ca.real();
            c(1, a) = ca.imag();
            norm += std::norm(ca);
        }
        tc.noalias() = c * t_act;
        const double re = c.row(0).dot(tc.row(0)) + c.row(1).dot(tc.row(1));
        const double im = c.row(0).dot(tc.row(1)) - c.row(1).dot(tc.row(0));
        out.x[sample] = re;
        out.max_imag = std::max(out.max_imag, std::abs(im));
        const double drift = std::abs(norm - 1.0);
        out.max_norm_drift = std::max(out.max_norm_drift, drift);
        if (drift > opts.max_norm_drift) {
            std::ostringstream os;
            os << "norm drift " << drift << " at t=" << time << " exceeds " << opts.max_norm_drift;
            throw ConvergenceError(os.str());
        }
        if (opts.keep_coefficients)
            for (Eigen::Index a = 0; a < m; ++a)
                out.coefficients(active[static_cast<std::size_t>(a)], sample) = state[static_cast<std::size_t>(a)];
        ++sample;
    };

    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_dense_output(opts.ode_tol, opts.ode_tol, odeint::runge_kutta_dopri5<State>());
    const double dt0 = std::min(duration / (samples - 1), 1.0);
    try {
        odeint::integrate_times(stepper, std::ref(rhs), b, out.times.data(), out.times.data() + samples, dt0,
                                observe);
    } catch (const odeint::step_adjustment_error& e) {
        throw ConvergenceError(std::string("ODE step size underflow near t=") +
                               std::to_string(stepper.current_time()) + ": " + e.what());
    } catch (const odeint::no_progress_error& e) {
        throw ConvergenceError(std::string("ODE integration stalled near t=") +
                               std::to_string(stepper.current_time()) + ": " + e.what());
    }
    if (sample != samples) throw ConvergenceError("ODE integration returned early");
    return out;
}

// ============================================================================
// Full Fock space
// ============================================================================

FullSpaceTrajectory propagate_full_space(const SparseOperator& h0, const Eigen::VectorXd& dipole,
                                         const PulseSpec& pulse, const Eigen::VectorXcd& psi0,
                                         const FullSpaceOptions& opts) {
    pulse.validate();
    const auto n = static_cast<Eigen::Index>(h0.dimension());
    if (dipole.size() != n || psi0.size() != n) throw ParameterError("dimension mismatch in full-space propagation");
    if (opts.samples < 2 || opts.steps < 1) throw ParameterError("samples and steps must be positive");

    const std::int64_t intervals = opts.samples - 1;
    const std::int64_t per_sample = (opts.steps + intervals - 1) / intervals;
    const double duration = pulse.duration();
    const double dt = duration / static_cast<double>(intervals * per_sample);

    // Off-diagonal hopping part in its own CSR arrays.
    std::vector<std::int64_t> row_ptr(static_cast<std::size_t>(n) + 1, 0);
    std::vector<std::uint32_t> cols;
    std::vector<double> vals;
    const Eigen::VectorXd diag = h0.diagonal();
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto rc = h0.row_cols(static_cast<std::size_t>(r));
        const auto rv = h0.row_values(static_cast<std::size_t>(r));
        for (std::size_t e = 0; e < rc.size(); ++e)
            if (rc[e] != static_cast<std::uint32_t>(r)) {
                cols.push_back(rc[e]);
                vals.push_back(rv[e]);
            }
        row_ptr[static_cast<std::size_t>(r) + 1] = static_cast<std::int64_t>(cols.size());
    }
    double bound = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        double s = 0.0;
        for (auto e = row_ptr[static_cast<std::size_t>(r)]; e < row_ptr[static_cast<std::size_t>(r) + 1]; ++e)
            s += std::abs(vals[static_cast<std::size_t>(e)]);
        bound = std::max(bound, s);
    }
    const int scale = std::max(1, static_cast<int>(std::ceil(bound * dt / 0.25)));
    const double sub_dt = dt / scale;

    Eigen::VectorXcd term(n), next(n);
    auto hop_step = [&](Eigen::VectorXcd& psi) {
        for (int s = 0; s < scale; ++s) {
            term = psi;
            for (int order = 1; order < 40; ++order) {
                const cplx coef{0.0, -sub_dt / order};
                double largest = 0.0;
                for (Eigen::Index r = 0; r < n; ++r) {
                    cplx acc{};
                    for (auto e = row_ptr[static_cast<std::size_t>(r)]; e < row_ptr[static_cast<std::size_t>(r) + 1]; ++e)
                        acc += vals[static_cast<std::size_t>(e)] * term[cols[static_cast<std::size_t>(e)]];
                    next[r] = coef * acc;
                    largest = std::max(largest, std::abs(next[r]));
                }
                psi += next;
                term.swap(next);
                if (largest < 1e-18) break;
            }
        }
    };

    // Diagonal phases: exp(-i diag dt/2) per state times exp(-i E d dt/2) per distinct dipole value.
    Eigen::VectorXcd static_phase(n);
    for (Eigen::Index r = 0; r < n; ++r) static_phase[r] = std::polar(1.0, -diag[r] * dt / 2.0);
    std::vector<double> levels;
    std::vector<int> level_of(static_cast<std::size_t>(n));
    {
        std::map<double, int> index;
        for (Eigen::Index r = 0; r < n; ++r) index.emplace(dipole[r], 0);
        int next_id = 0;
        for (auto& [value, id] : index) {
            id = next_id++;
            levels.push_back(value);
        }
        for (Eigen::Index r = 0; r < n; ++r) level_of[static_cast<std::size_t>(r)] = index.at(dipole[r]);
    }
    std::vector<cplx> field_phase(levels.size());
    auto diag_step = [&](Eigen::VectorXcd& psi, double e) {
        for (std::size_t l = 0; l < levels.size(); ++l) field_phase[l] = std::polar(1.0, -e * levels[l] * dt / 2.0);
        for (Eigen::Index r = 0; r < n; ++r)
            psi[r] *= static_phase[r] * field_phase[static_cast<std::size_t>(level_of[static_cast<std::size_t>(r)])];
    };

    FullSpaceTrajectory out;
    out.steps = intervals * per_sample;
    out.times.resize(opts.samples);
    out.x.resize(opts.samples);
    Eigen::VectorXcd psi = psi0;
    const double start_norm = psi.squaredNorm();
    auto record = [&](int m, double time) {
        out.times[m] = time;
        out.x[m] = (psi.cwiseAbs2().array() * dipole.array()).sum();
        const double drift = std::abs(psi.squaredNorm() - start_norm);
        out.max_norm_drift = std::max(out.max_norm_drift, drift);
        if (drift > opts.max_norm_drift) {
            std::ostringstream os;
            os << "norm drift " << drift << " at t=" << time << " exceeds " << opts.max_norm_drift;
            throw ConvergenceError(os.str());
        }
    };
    record(0, 0.0);
    std::int64_t step = 0;
    for (std::int64_t m = 1; m <= intervals; ++m) {
        for (std::int64_t s = 0; s < per_sample; ++s, ++step) {
            const double e = pulse.field((static_cast<double>(step) + 0.5) * dt);
            diag_step(psi, e);
            hop_step(psi);
            diag_step(psi, e);
        }
        record(static_cast<int>(m), m == intervals ? duration : static_cast<double>(step) * dt);
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const Eigen::VectorXd& times, const Eigen::VectorXd& x) {
    os << "t,x\n";
    char buf[64];
    for (Eigen::Index i = 0; i < times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", times[i], x[i]);
        os << buf;
    }
}

} // namespace chainhhg

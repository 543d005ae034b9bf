#include "chainhhg/analysis.hpp"

#include "chainhhg/checkpoint.hpp"
#include "chainhhg/errors.hpp"
#include "chainhhg/lattice.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace chainhhg {

// ============================================================================
// Level schemes
// ============================================================================

bool LevelScheme::allowed(int id_a, int id_b) const {
    const int lo = std::min(id_a, id_b);
    const int hi = std::max(id_a, id_b);
    return std::any_of(pairs.begin(), pairs.end(), [&](const LevelPair& p) { return p.i == lo && p.j == hi; });
}

namespace {

int label_or(const std::vector<int>& labels, int id, int fallback) {
    return id >= 0 && id < static_cast<int>(labels.size()) ? labels[static_cast<std::size_t>(id)] : fallback;
}

} // namespace

LevelScheme allowed_transitions(const TransitionMatrix& tm, const EigenSolution& sol, double omega,
                                double relative_threshold) {
    if (!(omega > 0.0)) throw ParameterError("omega must be positive");
    const int k = tm.size();
    LevelScheme scheme;
    scheme.ids = tm.ids;
    scheme.threshold = relative_threshold * tm.max_abs();
    std::vector<int> cl(static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a) {
        const int id = tm.ids[static_cast<std::size_t>(a)];
        scheme.energies.push_back(tm.energies[a]);
        scheme.parity.push_back(label_or(sol.parity, id, 0));
        // Unknown clusters become singletons with ids that cannot collide.
        cl[static_cast<std::size_t>(a)] = label_or(sol.cluster, id, -1 - id);
        scheme.cluster.push_back(cl[static_cast<std::size_t>(a)]);
    }

    std::map<std::pair<int, int>, double> block_max;
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
            auto& m = block_max[{cl[static_cast<std::size_t>(a)], cl[static_cast<std::size_t>(b)]}];
            m = std::max(m, std::abs(tm.elements(a, b)));
        }

    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return tm.ids[static_cast<std::size_t>(a)] < tm.ids[static_cast<std::size_t>(b)]; });
    for (int x = 0; x < k; ++x)
        for (int y = x + 1; y < k; ++y) {
            const int a = order[static_cast<std::size_t>(x)];
            const int b = order[static_cast<std::size_t>(y)];
            const double m = block_max.at({cl[static_cast<std::size_t>(a)], cl[static_cast<std::size_t>(b)]});
            if (m > scheme.threshold) {
                LevelPair p;
                p.i = tm.ids[static_cast<std::size_t>(a)];
                p.j = tm.ids[static_cast<std::size_t>(b)];
                p.magnitude = m;
                p.element = std::abs(tm.elements(a, b));
                p.gap_in_omega = (tm.energies[b] - tm.energies[a]) / omega;
                scheme.pairs.push_back(p);
            }
        }
    return scheme;
}

void write_level_scheme_json(std::ostream& os, const LevelScheme& scheme) {
    nlohmann::ordered_json j;
    j["threshold"] = scheme.threshold;
    auto states = nlohmann::ordered_json::array();
    for (std::size_t a = 0; a < scheme.ids.size(); ++a)
        states.push_back({{"id", scheme.ids[a]},
                          {"energy", scheme.energies[a]},
                          {"parity", scheme.parity[a]},
                          {"cluster", scheme.cluster[a]}});
    j["states"] = std::move(states);
    auto pairs = nlohmann::ordered_json::array();
    for (const auto& p : scheme.pairs)
        pairs.push_back({{"i", p.i}, {"j", p.j}, {"abs_T", p.magnitude}, {"abs_T_element", p.element},
                         {"gap_in_omega", p.gap_in_omega}});
    j["pairs"] = std::move(pairs);
    os << j.dump(2) << '\n';
}

TransitionMatrix reduce_levels(const TransitionMatrix& tm, std::vector<int> keep) {
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    if (keep.empty() || keep.front() != 0) throw ParameterError("the kept state set must contain the ground state 0");
    if (tm.size() == 0 || tm.ids.front() != 0) throw ParameterError("transition matrix does not start at state 0");
    return restrict_transitions(tm, keep);
}

std::vector<int> parse_state_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        try {
            const auto dash = item.find('-', 1);
            std::size_t used = 0;
            if (dash == std::string::npos) {
                out.push_back(std::stoi(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } else {
                const int lo = std::stoi(item.substr(0, dash));
                const int hi = std::stoi(item.substr(dash + 1));
                if (hi < lo) throw std::invalid_argument(item);
                for (int i = lo; i <= hi; ++i) out.push_back(i);
            }
        } catch (const std::exception&) {
            throw ParameterError("cannot parse state list entry '" + item + "'");
        }
    }
    for (int id : out)
        if (id < 0) throw ParameterError("state ids must be non-negative");
    return out;
}

// ============================================================================
// Configuration reports
// ============================================================================

std::string configuration_string(Word up, Word dn, int sites) {
    std::string s(static_cast<std::size_t>(sites), '0');
    for (int i = 0; i < sites; ++i) {
        const bool u = (up >> i) & 1U;
        const bool d = (dn >> i) & 1U;
        s[static_cast<std::size_t>(i)] = u && d ? '2' : u ? 'u' : d ? 'd' : '0';
    }
    return s;
}

ConfigurationReport dominant_configurations(const HalfFilledBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& u,
                                            int top_m, int state_id) {
    if (top_m < 1) throw ParameterError("top_m must be >= 1");
    const auto n = static_cast<std::size_t>(basis.dimension());
    if (static_cast<std::size_t>(u.size()) != n) throw ParameterError("vector length does not match the basis");
    const int sites = basis.up.sites();
    const auto dn_dim = basis.dn.dimension();

    ConfigurationReport report;
    report.state = state_id;
    report.total_weight = u.squaredNorm();

    // Partners at most triple each listed row; a margin covers equal-weight runs.
    const std::size_t want = std::min(n, static_cast<std::size_t>(top_m) * 8 + 16);
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0U);
    auto heavier = [&](std::uint32_t a, std::uint32_t b) {
        const double wa = u[a] * u[a];
        const double wb = u[b] * u[b];
        return wa != wb ? wa > wb : a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(want), idx.end(), heavier);

    auto global_of = [&](Word up, Word dn) {
        return CompositeIndex{basis.up.rank(up), basis.dn.rank(dn)}.global(dn_dim);
    };
    std::set<std::uint32_t> consumed;
    for (std::size_t p = 0; p < want && static_cast<int>(report.entries.size()) < top_m; ++p) {
        const std::uint32_t g = idx[p];
        if (consumed.count(g)) continue;
        consumed.insert(g);
        const auto [iu, id] = basis.split(g);
        const Word up = basis.up.unrank(iu);
        const Word dn = basis.dn.unrank(id);
        const double w = u[g] * u[g];
        ConfigurationEntry e;
        e.rank = static_cast<int>(report.entries.size()) + 1;
        e.configuration = configuration_string(up, dn, sites);
        e.weight = w;
        const Word images[3][2] = {{reflect_word(up, sites), reflect_word(dn, sites)},
                                   {dn, up},
                                   {reflect_word(dn, sites), reflect_word(up, sites)}};
        for (const auto& im : images) {
            const auto h = static_cast<std::uint32_t>(global_of(im[0], im[1]));
            if (consumed.count(h)) continue;
            if (std::abs(u[h] * u[h] - w) <= 1e-10) {
                consumed.insert(h);
                e.partners.push_back(configuration_string(im[0], im[1], sites));
            }
        }
        report.listed_weight += w * static_cast<double>(1 + e.partners.size());
        report.entries.push_back(std::move(e));
    }
    return report;
}

void write_configuration_table(std::ostream& os, const ConfigurationReport& report) {
    os << "# state " << report.state << ", total weight " << report.total_weight << ", listed weight "
       << report.listed_weight << '\n';
    os << "rank  configuration  weight  partners\n";
    char buf[64];
    for (const auto& e : report.entries) {
        std::snprintf(buf, sizeof buf, "%.10e", e.weight);
        os << e.rank << "  " << e.configuration << "  " << buf << "  ";
        if (e.partners.empty()) os << '-';
        for (std::size_t i = 0; i < e.partners.size(); ++i) os << (i ? "," : "") << e.partners[i];
        os << '\n';
    }
}

// ============================================================================
// Spin labels
// ============================================================================

std::vector<double> total_spins(const HalfFilledBasis& basis, const EigenSolution& sol, int count) {
    count = std::min(count, sol.count());
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
        const auto u = sol.vectors.col(j);
        out.push_back(total_spin_from_expectation(u.dot(apply_spin_squared(basis, u))));
    }
    return out;
}

std::vector<double> particle_hole_labels(const HalfFilledBasis& basis, const EigenSolution& sol, int count) {
    count = std::min(count, sol.count());
    const auto perm = particle_hole_permutation(basis);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) out.push_back(permutation_expectation(perm, sol.vectors.col(j)));
    return out;
}

// ============================================================================
// Checkpoint-cached diagonalization
// ============================================================================

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, const ChainSpec& spec, std::uint64_t seed,
                                      double tol) {
    return dir / ("eigen-" + checkpoint_key_hex(spec, seed, tol) + ".bin");
}

EigenSolution cached_diagonalization(const ChainSpec& spec, const DiagonalizeOptions& opts,
                                     const std::filesystem::path& cache_dir) {
    if (cache_dir.empty()) return diagonalize_chain(spec, opts);
    const auto path = checkpoint_path(cache_dir, spec, opts.solver.seed, opts.solver.tol);
    if (std::filesystem::exists(path)) {
        const auto header = read_checkpoint_header(path);
        require_matching(header, spec, opts.solver.seed, opts.solver.tol, 0);
        if (header.k >= opts.solver.k) return read_checkpoint(path, opts.solver.k);
    }
    auto sol = diagonalize_chain(spec, opts);
    std::filesystem::create_directories(cache_dir);
    write_checkpoint(path, spec, sol, opts.solver.cluster_gap);
    write_checkpoint_sidecar(std::filesystem::path(path).replace_extension(".json"), spec, sol);
    return sol;
}

// ============================================================================
// U scan
// ============================================================================

std::vector<OverlayDot> ground_state_overlay(const TransitionMatrix& tm, const EigenSolution& sol, double omega,
                                             double relative_threshold) {
    const auto scheme = allowed_transitions(tm, sol, omega, relative_threshold);
    std::vector<OverlayDot> dots;
    for (int a = 0; a < tm.size(); ++a) {
        const int id = tm.ids[static_cast<std::size_t>(a)];
        if (id == 0) continue;
        dots.push_back({id, (tm.energies[a] - tm.energies[0]) / omega, scheme.allowed(0, id)});
    }
    return dots;
}

ScanPoint run_point(const ChainSpec& chain, const EigenSolution& sol, const Eigen::VectorXd& dipole,
                    const PulseSpec& pulse, const PropagationOptions& prop, double relative_threshold) {
    ScanPoint point;
    point.U = chain.U;
    const auto tm = transition_matrix(sol, dipole);
    const auto traj = propagate_interaction_picture(tm, pulse, prop);
    point.spectrum = spectrum_from_positions(traj.x, pulse);
    point.dots = ground_state_overlay(tm, sol, pulse.omega, relative_threshold);
    point.lowest_allowed_gap = std::numeric_limits<double>::quiet_NaN();
    for (const auto& d : point.dots)
        if (d.allowed) {
            point.lowest_allowed_gap = d.gap_in_omega;
            break;
        }
    point.ok = true;
    return point;
}

std::vector<ScanPoint> u_scan(const std::vector<double>& u_values, const UScanOptions& opts) {
    if (u_values.empty()) throw ParameterError("U grid is empty");
    std::vector<ScanPoint> points;
    for (double u : u_values) {
        ChainSpec chain = opts.chain;
        chain.U = u;
        try {
            chain.validate();
            if (opts.log) opts.log("U=" + std::to_string(u) + ": diagonalizing");
            const auto sol = cached_diagonalization(chain, opts.diag, opts.cache_dir);
            if (opts.log) opts.log("U=" + std::to_string(u) + ": propagating");
            points.push_back(run_point(chain, sol, assemble_dipole_diagonal(chain), opts.pulse, opts.propagation,
                                       opts.relative_threshold));
        } catch (const std::exception& e) {
            ScanPoint p;
            p.U = u;
            p.error = e.what();
            p.lowest_allowed_gap = std::numeric_limits<double>::quiet_NaN();
            if (opts.log) opts.log("U=" + std::to_string(u) + ": failed: " + p.error);
            points.push_back(std::move(p));
        }
    }
    return points;
}

void write_uscan_csv(std::ostream& os, const std::vector<ScanPoint>& points, double max_order) {
    os << "U,harmonic_order,log10_yield\n";
    char buf[96];
    for (const auto& p : points) {
        if (!p.ok) {
            std::snprintf(buf, sizeof buf, "# missing U=%.17g\n", p.U);
            os << buf;
            continue;
        }
        for (Eigen::Index b = 0; b < p.spectrum.size(); ++b) {
            if (max_order > 0.0 && p.spectrum.harmonic_order[b] > max_order) break;
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.U, p.spectrum.harmonic_order[b],
                          p.spectrum.log10_yield[b]);
            os << buf;
        }
    }
}

void write_uscan_overlay_json(std::ostream& os, const std::vector<ScanPoint>& points) {
    auto dots = nlohmann::ordered_json::array();
    auto missing = nlohmann::ordered_json::array();
    for (const auto& p : points) {
        if (!p.ok) {
            missing.push_back({{"U", p.U}, {"error", p.error}});
            continue;
        }
        for (const auto& d : p.dots)
            dots.push_back({{"U", p.U}, {"state", d.state}, {"gap_in_omega", d.gap_in_omega}, {"allowed", d.allowed}});
    }
    nlohmann::ordered_json j;
    j["dots"] = std::move(dots);
    j["missing"] = std::move(missing);
    os << j.dump(2) << '\n';
}

} // namespace chainhhg

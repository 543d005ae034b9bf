#pragma once

/**
 * @file analysis.hpp
 * @brief Selection rules, few-level reduction, configuration reports and U scans.
 */

#include "chainhhg/diagonalize.hpp"
#include "chainhhg/dynamics.hpp"
#include "chainhhg/fock_basis.hpp"
#include "chainhhg/spectrum.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace chainhhg {

// ============================================================================
// Level schemes
// ============================================================================

struct LevelPair {
    int i = 0;                  ///< lower state id
    int j = 0;                  ///< upper state id
    double magnitude = 0.0;     ///< max |T| over the two degeneracy clusters
    double element = 0.0;       ///< |T_ij| itself
    double gap_in_omega = 0.0;  ///< (e_j - e_i) / omega
};

struct LevelScheme {
    std::vector<int> ids;
    std::vector<double> energies;
    std::vector<int> parity;
    std::vector<int> cluster;
    std::vector<LevelPair> pairs;
    double threshold = 0.0;  ///< absolute cutoff actually applied

    [[nodiscard]] bool allowed(int id_a, int id_b) const;
};

/// Pairs whose cluster-level coupling exceeds relative_threshold * max|T|.
/// Labels (parity, cluster) come from sol, indexed by tm.ids.
[[nodiscard]] LevelScheme allowed_transitions(const TransitionMatrix& tm, const EigenSolution& sol, double omega,
                                              double relative_threshold = 1e-10);

void write_level_scheme_json(std::ostream& os, const LevelScheme& scheme);

/// Sorted, de-duplicated restriction of tm to keep. Throws when 0 is missing.
[[nodiscard]] TransitionMatrix reduce_levels(const TransitionMatrix& tm, std::vector<int> keep);

/// Parses "0,2,3" (ranges "5-9" allowed) into state ids.
[[nodiscard]] std::vector<int> parse_state_list(const std::string& text);

// ============================================================================
// Configuration reports
// ============================================================================

struct ConfigurationEntry {
    int rank = 0;
    std::string configuration;          ///< u, d, 2, 0 per site, site 0 leftmost
    std::vector<std::string> partners;  ///< reflection/spin-flip images with equal weight
    double weight = 0.0;                ///< squared amplitude of one configuration
};

struct ConfigurationReport {
    int state = 0;
    std::vector<ConfigurationEntry> entries;
    double listed_weight = 0.0;  ///< weight summed over all listed configurations and partners
    double total_weight = 0.0;   ///< sum over the whole basis
};

[[nodiscard]] std::string configuration_string(Word up, Word dn, int sites);

/// The top_m groups of equal-weight symmetry partners, by descending weight.
[[nodiscard]] ConfigurationReport dominant_configurations(const HalfFilledBasis& basis,
                                                          const Eigen::Ref<const Eigen::VectorXd>& u, int top_m,
                                                          int state_id = 0);

void write_configuration_table(std::ostream& os, const ConfigurationReport& report);

// ============================================================================
// Spin labels
// ============================================================================

/// Total spin S of each of the first count states, from <S^2>.
[[nodiscard]] std::vector<double> total_spins(const HalfFilledBasis& basis, const EigenSolution& sol, int count);

/// Particle-hole eigenvalue <u|C|u> of each of the first count states.
/// Degenerate states may give values strictly between -1 and 1.
[[nodiscard]] std::vector<double> particle_hole_labels(const HalfFilledBasis& basis, const EigenSolution& sol, int count);

// ============================================================================
// Checkpoint-cached diagonalization
// ============================================================================

/// Loads cache_dir/eigen-<key>.bin when it matches (spec, seed, tol) and holds
/// at least k states; otherwise diagonalizes and writes it. Empty cache_dir
/// disables caching.
[[nodiscard]] EigenSolution cached_diagonalization(const ChainSpec& spec, const DiagonalizeOptions& opts,
                                                   const std::filesystem::path& cache_dir);

[[nodiscard]] std::filesystem::path checkpoint_path(const std::filesystem::path& dir, const ChainSpec& spec,
                                                    std::uint64_t seed, double tol);

// ============================================================================
// U scan
// ============================================================================

struct OverlayDot {
    int state = 0;
    double gap_in_omega = 0.0;
    bool allowed = false;
};

struct ScanPoint {
    double U = 0.0;
    bool ok = false;
    std::string error;
    SpectrumResult spectrum;
    std::vector<OverlayDot> dots;
    double lowest_allowed_gap = 0.0;  ///< in units of omega, NaN when none
};

struct UScanOptions {
    ChainSpec chain;
    PulseSpec pulse;
    DiagonalizeOptions diag;
    PropagationOptions propagation;
    std::filesystem::path cache_dir;
    double relative_threshold = 1e-10;
    std::function<void(const std::string&)> log;
};

/// Ground-state overlay for one solution: every excited state with its gap
/// and the cluster-level allowed flag of its coupling to state 0.
[[nodiscard]] std::vector<OverlayDot> ground_state_overlay(const TransitionMatrix& tm, const EigenSolution& sol,
                                                           double omega, double relative_threshold = 1e-10);

/// Full pipeline for one chain: spectrum plus overlay.
[[nodiscard]] ScanPoint run_point(const ChainSpec& chain, const EigenSolution& sol, const Eigen::VectorXd& dipole,
                                  const PulseSpec& pulse, const PropagationOptions& prop, double relative_threshold);

/// One point per U value; failures are recorded in the point and the scan goes on.
[[nodiscard]] std::vector<ScanPoint> u_scan(const std::vector<double>& u_values, const UScanOptions& opts);

/// Columns U,harmonic_order,log10_yield; orders above max_order are skipped (<= 0 keeps all).
void write_uscan_csv(std::ostream& os, const std::vector<ScanPoint>& points, double max_order = 0.0);
void write_uscan_overlay_json(std::ostream& os, const std::vector<ScanPoint>& points);

} // namespace chainhhg

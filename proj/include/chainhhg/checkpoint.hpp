#pragma once

/**
 * @file checkpoint.hpp
 * @brief Binary cache of an eigen-decomposition plus a JSON sidecar.
 *
 * Layout (native little-endian): magic "CHHGCKP1", u32 version, the header
 * fields in declaration order, then energies, residuals, parity, spin-flip
 * and cluster labels (k each), then the k eigenvectors column by column.
 */

#include "chainhhg/eigensolver.hpp"
#include "chainhhg/lattice.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace chainhhg {

struct CheckpointHeader {
    std::int32_t sites = 0;
    double v = 0.0;
    double w = 0.0;
    double U = 0.0;
    std::int32_t k = 0;
    std::uint64_t seed = 0;
    double tol = 0.0;
    double cluster_gap = 0.0;
    std::uint64_t dimension = 0;

    [[nodiscard]] ChainSpec chain() const { return {sites, v, w, U}; }
};

/// 64-bit FNV-1a of the canonical text of (N, v, w, U, seed, tol). The state
/// count is not part of the key: a checkpoint with more states serves any
/// request for fewer.
[[nodiscard]] std::uint64_t checkpoint_key(const ChainSpec& spec, std::uint64_t seed, double tol);
[[nodiscard]] std::string checkpoint_key_hex(const ChainSpec& spec, std::uint64_t seed, double tol);

void write_checkpoint(const std::filesystem::path& path, const ChainSpec& spec, const EigenSolution& sol,
                      double cluster_gap);

/// Writes the energies/residuals/labels sidecar as JSON.
void write_checkpoint_sidecar(const std::filesystem::path& path, const ChainSpec& spec, const EigenSolution& sol);

[[nodiscard]] CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

/// Loads the first max_states states (all when max_states <= 0).
[[nodiscard]] EigenSolution read_checkpoint(const std::filesystem::path& path, int max_states = 0,
                                            CheckpointHeader* header = nullptr);

/// Throws StaleCheckpointError unless the header matches spec/seed/tol and
/// holds at least k states.
void require_matching(const CheckpointHeader& header, const ChainSpec& spec, std::uint64_t seed, double tol, int k);

} // namespace chainhhg

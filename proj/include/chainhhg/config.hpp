#pragma once

/**
 * @file config.hpp
 * @brief Run configuration: defaults, INI files and per-key overrides.
 *
 * Keys live in sections [chain] [pulse] [solver] [propagation] [output]. Each
 * key name is unique across sections, so "U" and "chain.U" address the same
 * setting.
 */

#include "chainhhg/diagonalize.hpp"
#include "chainhhg/dynamics.hpp"
#include "chainhhg/lattice.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace chainhhg {

/// Hopping pairs of the two phases (trivial: v > w).
inline constexpr double kHoppingStrong = 0.18268;
inline constexpr double kHoppingWeak = 0.10026;

struct RunConfig {
    ChainSpec chain{12, kHoppingWeak, kHoppingStrong, 0.1};
    PulseSpec pulse;
    DiagonalizeOptions diag;
    PropagationOptions propagation;
    int states = 0;                 ///< states used in propagation, 0 = all computed
    std::string keep;               ///< reduced-model state list, empty = none
    std::filesystem::path directory = "out";
    std::string checkpoint;         ///< explicit checkpoint path, empty = derived from the key
    std::string formats = "csv,json";
    bool trajectory = false;
    double threshold = 1e-10;
    int top = 10;
    int state = 0;
    std::string u_values = "0:0.01:0.1";
    int threads = 0;                ///< 0 = all available cores

    RunConfig();

    /// Sets one key ("U" or "chain.U"). Throws ParameterError on unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    void load_ini(const std::filesystem::path& path);
    void load_ini(std::istream& is);
    void validate() const;

    [[nodiscard]] std::filesystem::path checkpoint_file() const;
    /// Every key with its current value, in section order, as INI text.
    void write_ini(std::ostream& os) const;
};

/// All recognised keys as "section.key".
[[nodiscard]] const std::vector<std::string>& config_keys();

/// "a:step:b" inclusive range or a comma list.
[[nodiscard]] std::vector<double> parse_value_grid(const std::string& text);

} // namespace chainhhg

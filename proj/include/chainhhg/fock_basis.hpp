#pragma once

/**
 * @file fock_basis.hpp
 * @brief Fixed-particle-number occupation words for one spin species and the
 *        composite up (x) down product basis.
 *
 * Bit s of a word is set when flattened site s = 2*cell + m is occupied.
 * Words are ordered by ascending numeric value, which coincides with the
 * colexicographic combinadic order, so rank(w) = sum_i C(p_i, i+1) over the
 * ascending set-bit positions p_0 < p_1 < ...
 */

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

namespace chainhhg {

using Word = std::uint32_t;

inline constexpr int kMaxSites = 32;

/// Binomial coefficient C(n, k) for 0 <= n <= 32; zero when k < 0 or k > n.
[[nodiscard]] std::uint64_t binomial(int n, int k) noexcept;

class SectorBasis {
public:
    /// Enumerates all C(sites, particles) words in ascending order.
    /// Throws ParameterError when particles > sites or sites > 32.
    SectorBasis(int sites, int particles);

    [[nodiscard]] int sites() const noexcept { return sites_; }
    [[nodiscard]] int particles() const noexcept { return particles_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return words_.size(); }

    [[nodiscard]] Word unrank(std::size_t r) const noexcept { return words_[r]; }
    /// O(N) combinadic rank. The word must belong to the sector.
    [[nodiscard]] std::size_t rank(Word w) const noexcept;
    [[nodiscard]] bool contains(Word w) const noexcept;

    [[nodiscard]] std::span<const Word> words() const noexcept { return words_; }

private:
    int sites_;
    int particles_;
    std::vector<Word> words_;
    // table_[p][i] = C(p, i) for the rank sum
    std::array<std::array<std::uint32_t, kMaxSites + 1>, kMaxSites + 1> table_{};
};

/// (-1)^(number of occupied sites strictly between a and b).
/// Precondition: a != b and exactly one of a, b is occupied in word.
[[nodiscard]] inline int hopping_parity(Word word, int a, int b) noexcept {
    const int lo = a < b ? a : b;
    const int hi = a < b ? b : a;
    const Word between = (hi - lo > 1) ? (((Word{1} << (hi - lo - 1)) - 1) << (lo + 1)) : 0;
    return (std::popcount(word & between) & 1) ? -1 : 1;
}

/// Index of a state in the up (x) down product basis: global = up * D_dn + dn.
struct CompositeIndex {
    std::size_t up = 0;
    std::size_t dn = 0;

    [[nodiscard]] constexpr std::size_t global(std::size_t dn_dim) const noexcept {
        return up * dn_dim + dn;
    }
    [[nodiscard]] static constexpr CompositeIndex from_global(std::size_t g, std::size_t dn_dim) noexcept {
        return {g / dn_dim, g % dn_dim};
    }
    constexpr auto operator<=>(const CompositeIndex&) const = default;
};

/// Up and down sectors at half filling of an N-site chain.
struct HalfFilledBasis {
    SectorBasis up;
    SectorBasis dn;

    explicit HalfFilledBasis(int sites);

    [[nodiscard]] int sites() const noexcept { return up.sites(); }
    [[nodiscard]] std::size_t dimension() const noexcept { return up.dimension() * dn.dimension(); }
    [[nodiscard]] CompositeIndex split(std::size_t g) const noexcept {
        return CompositeIndex::from_global(g, dn.dimension());
    }
};

} // namespace chainhhg

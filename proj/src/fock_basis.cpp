#include "chainhhg/fock_basis.hpp"

#include "chainhhg/errors.hpp"

#include <string>

namespace chainhhg {

std::uint64_t binomial(int n, int k) noexcept {
    if (k < 0 || n < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t c = 1;
    for (int i = 1; i <= k; ++i) c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return c;
}

SectorBasis::SectorBasis(int sites, int particles)
    : sites_(sites), particles_(particles) {
    if (sites < 0 || sites > kMaxSites)
        throw ParameterError("site count " + std::to_string(sites) + " outside [0, 32]");
    if (particles < 0 || particles > sites)
        throw ParameterError("particle count " + std::to_string(particles) +
                             " outside [0, " + std::to_string(sites) + "]");

    for (int p = 0; p <= kMaxSites; ++p)
        for (int i = 0; i <= kMaxSites; ++i)
            table_[p][i] = static_cast<std::uint32_t>(binomial(p, i));

    const std::uint64_t dim = binomial(sites, particles);
    words_.reserve(dim);
    if (particles == 0) {
        words_.push_back(0);
        return;
    }
    // Gosper's hack walks k-subsets in ascending numeric order.
    std::uint64_t w = (std::uint64_t{1} << particles) - 1;
    const std::uint64_t limit = std::uint64_t{1} << sites;
    while (w < limit) {
        words_.push_back(static_cast<Word>(w));
        const std::uint64_t c = w & (~w + 1);
        const std::uint64_t r = w + c;
        w = (((r ^ w) >> 2) / c) | r;
    }
}

std::size_t SectorBasis::rank(Word w) const noexcept {
    std::size_t r = 0;
    int i = 1;
    while (w) {
        const int p = std::countr_zero(w);
        r += table_[p][i++];
        w &= w - 1;
    }
    return r;
}

bool SectorBasis::contains(Word w) const noexcept {
    if (sites_ < kMaxSites && (static_cast<std::uint64_t>(w) >> sites_) != 0) return false;
    return std::popcount(w) == particles_;
}

HalfFilledBasis::HalfFilledBasis(int sites)
    : up(sites, sites / 2), dn(sites, sites / 2) {
    if (sites % 2 != 0) throw ParameterError("N must be even");
}

} // namespace chainhhg

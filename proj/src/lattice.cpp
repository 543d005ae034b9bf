#include "chainhhg/lattice.hpp"

#include "chainhhg/errors.hpp"

#include <cmath>
#include <string>

namespace chainhhg {

void ChainSpec::validate() const {
    if (sites % 2 != 0) throw ParameterError("N must be even");
    if (sites < 2 || sites > kMaxSites) throw ParameterError("N must lie in [2, 32], got " + std::to_string(sites));
    if (!std::isfinite(v) || !std::isfinite(w) || !std::isfinite(U))
        throw ParameterError("chain parameters must be finite");
}

std::vector<double> ChainSpec::positions() const {
    std::vector<double> x(static_cast<std::size_t>(sites));
    for (int s = 0; s < sites; ++s) x[static_cast<std::size_t>(s)] = position(s);
    return x;
}

SparseOperator single_spin_hopping(const ChainSpec& spec, const SectorBasis& sector) {
    if (sector.sites() != spec.sites) throw ParameterError("sector built for a different chain length");
    const std::size_t dim = sector.dimension();
    std::vector<std::vector<SparseOperator::Entry>> rows(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        const Word word = sector.unrank(r);
        for (int s = 0; s + 1 < spec.sites; ++s) {
            const Word pair = (Word{1} << s) | (Word{1} << (s + 1));
            const Word occ = word & pair;
            if (occ == 0 || occ == pair) continue;
            const Word moved = word ^ pair;
            const double amp = -spec.bond_amplitude(s) * hopping_parity(word, s, s + 1);
            rows[r].push_back({static_cast<SparseOperator::Index>(sector.rank(moved)), amp});
        }
    }
    return SparseOperator::from_rows(std::move(rows));
}

std::size_t estimate_h0_bytes(const ChainSpec& spec) {
    spec.validate();
    const std::uint64_t d = binomial(spec.sites, spec.sites / 2);
    // Each single-spin word of k particles on N sites has on average
    // (N-1) * 2 k (N-k) / (N (N-1)) movable bonds.
    const double k = spec.sites / 2.0;
    const double hops = 2.0 * k * (spec.sites - k) / spec.sites;
    const double n = static_cast<double>(d) * static_cast<double>(d);
    const double nnz = n * (2.0 * hops + 1.0);
    return static_cast<std::size_t>((n + 1.0) * sizeof(std::uint64_t) +
                                    nnz * (sizeof(SparseOperator::Index) + sizeof(double)));
}

SparseOperator assemble_H0(const ChainSpec& spec, const AssemblyOptions& opts) {
    spec.validate();
    const std::size_t estimate = estimate_h0_bytes(spec);
    if (estimate > opts.memory_cap_bytes)
        throw ResourceError("H0 storage estimate " + std::to_string(estimate / (1u << 20)) +
                            " MiB exceeds the cap of " + std::to_string(opts.memory_cap_bytes / (1u << 20)) + " MiB");

    const HalfFilledBasis basis(spec.sites);
    const SparseOperator hop = single_spin_hopping(spec, basis.up);
    const std::size_t d = basis.up.dimension();
    const std::size_t n = d * d;

    std::vector<double> doubly(n);
    std::vector<std::uint64_t> row_ptr(n + 1, 0);
    for (std::size_t iu = 0; iu < d; ++iu) {
        const Word up = basis.up.unrank(iu);
        for (std::size_t id = 0; id < d; ++id) {
            const std::size_t g = iu * d + id;
            doubly[g] = interaction_diagonal(spec, up, basis.dn.unrank(id));
            row_ptr[g + 1] = hop.row_cols(iu).size() + hop.row_cols(id).size() + (doubly[g] != 0.0 ? 1 : 0);
        }
    }
    for (std::size_t g = 0; g < n; ++g) row_ptr[g + 1] += row_ptr[g];

    std::vector<SparseOperator::Index> cols(row_ptr.back());
    std::vector<double> values(row_ptr.back());
    const auto dd = static_cast<std::int64_t>(d);
#pragma omp parallel for schedule(static)
    for (std::int64_t iu_s = 0; iu_s < dd; ++iu_s) {
        const auto iu = static_cast<std::size_t>(iu_s);
        const auto up_cols = hop.row_cols(iu);
        const auto up_vals = hop.row_values(iu);
        for (std::size_t id = 0; id < d; ++id) {
            const std::size_t g = iu * d + id;
            std::uint64_t p = row_ptr[g];
            const auto dn_cols = hop.row_cols(id);
            const auto dn_vals = hop.row_values(id);
            // Column order: up hops below iu, the iu block (dn hops and the
            // diagonal), then up hops above iu.
            std::size_t a = 0;
            for (; a < up_cols.size() && up_cols[a] < iu; ++a, ++p) {
                cols[p] = static_cast<SparseOperator::Index>(up_cols[a] * d + id);
                values[p] = up_vals[a];
            }
            std::size_t b = 0;
            for (; b < dn_cols.size() && dn_cols[b] < id; ++b, ++p) {
                cols[p] = static_cast<SparseOperator::Index>(iu * d + dn_cols[b]);
                values[p] = dn_vals[b];
            }
            if (doubly[g] != 0.0) {
                cols[p] = static_cast<SparseOperator::Index>(g);
                values[p] = doubly[g];
                ++p;
            }
            for (; b < dn_cols.size(); ++b, ++p) {
                cols[p] = static_cast<SparseOperator::Index>(iu * d + dn_cols[b]);
                values[p] = dn_vals[b];
            }
            for (; a < up_cols.size(); ++a, ++p) {
                cols[p] = static_cast<SparseOperator::Index>(up_cols[a] * d + id);
                values[p] = up_vals[a];
            }
        }
    }
    return SparseOperator(n, std::move(row_ptr), std::move(cols), std::move(values));
}

Eigen::VectorXd assemble_dipole_diagonal(const ChainSpec& spec) {
    spec.validate();
    const HalfFilledBasis basis(spec.sites);
    const std::size_t d = basis.up.dimension();
    std::vector<double> word_dipole(d);
    for (std::size_t r = 0; r < d; ++r) {
        Word w = basis.up.unrank(r);
        double sum = 0.0;
        while (w) {
            sum += spec.position(std::countr_zero(w));
            w &= w - 1;
        }
        word_dipole[r] = sum;
    }
    Eigen::VectorXd h(static_cast<Eigen::Index>(d * d));
    for (std::size_t iu = 0; iu < d; ++iu)
        for (std::size_t id = 0; id < d; ++id)
            h[static_cast<Eigen::Index>(iu * d + id)] = word_dipole[iu] + word_dipole[id];
    return h;
}

Word reflect_word(Word w, int sites) noexcept {
    Word out = 0;
    while (w) {
        const int s = std::countr_zero(w);
        out |= Word{1} << (sites - 1 - s);
        w &= w - 1;
    }
    return out;
}

std::vector<std::uint32_t> reflection_permutation(const HalfFilledBasis& basis) {
    const std::size_t d = basis.up.dimension();
    std::vector<std::uint32_t> single(d);
    for (std::size_t r = 0; r < d; ++r)
        single[r] = static_cast<std::uint32_t>(basis.up.rank(reflect_word(basis.up.unrank(r), basis.sites())));
    std::vector<std::uint32_t> perm(d * d);
    for (std::size_t iu = 0; iu < d; ++iu)
        for (std::size_t id = 0; id < d; ++id)
            perm[iu * d + id] = static_cast<std::uint32_t>(single[iu] * d + single[id]);
    return perm;
}

std::vector<std::uint32_t> particle_hole_permutation(const HalfFilledBasis& basis) {
    const std::size_t d = basis.up.dimension();
    const Word mask = (Word{1} << basis.sites()) - 1;
    std::vector<std::uint32_t> single(d);
    for (std::size_t r = 0; r < d; ++r)
        single[r] = static_cast<std::uint32_t>(basis.up.rank(~basis.up.unrank(r) & mask));
    std::vector<std::uint32_t> perm(d * d);
    for (std::size_t iu = 0; iu < d; ++iu)
        for (std::size_t id = 0; id < d; ++id)
            perm[iu * d + id] = static_cast<std::uint32_t>(single[iu] * d + single[id]);
    return perm;
}

std::vector<std::uint32_t> spin_flip_permutation(const HalfFilledBasis& basis) {
    const std::size_t d = basis.up.dimension();
    std::vector<std::uint32_t> perm(d * d);
    for (std::size_t iu = 0; iu < d; ++iu)
        for (std::size_t id = 0; id < d; ++id) perm[iu * d + id] = static_cast<std::uint32_t>(id * d + iu);
    return perm;
}

double permutation_expectation(const std::vector<std::uint32_t>& perm, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (perm.size() != static_cast<std::size_t>(x.size())) throw ParameterError("permutation dimension mismatch");
    double acc = 0.0;
    for (std::size_t g = 0; g < perm.size(); ++g) acc += x[static_cast<Eigen::Index>(perm[g])] * x[static_cast<Eigen::Index>(g)];
    return acc;
}

Eigen::VectorXd apply_spin_squared(const HalfFilledBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& x) {
    const std::size_t d = basis.up.dimension();
    if (static_cast<std::size_t>(x.size()) != d * d) throw ParameterError("S^2 dimension mismatch");
    const int sites = basis.sites();
    Eigen::VectorXd y(x.size());
    const auto dd = static_cast<std::int64_t>(d);
    // S^2 = S- S+ at S_z = 0:
    //   diagonal  sum_i n_i,dn (1 - n_i,up)
    //   exchange  -(c+_i,up c_j,up)(c+_j,dn c_i,dn) for i != j
#pragma omp parallel for schedule(static)
    for (std::int64_t iu_s = 0; iu_s < dd; ++iu_s) {
        const auto iu = static_cast<std::size_t>(iu_s);
        const Word up = basis.up.unrank(iu);
        for (std::size_t id = 0; id < d; ++id) {
            const Word dn = basis.dn.unrank(id);
            const std::size_t g = iu * d + id;
            double acc = std::popcount(dn & ~up) * x[static_cast<Eigen::Index>(g)];
            for (int i = 0; i < sites; ++i) {
                const Word bi = Word{1} << i;
                if ((up & bi) || !(dn & bi)) continue;
                for (int j = 0; j < sites; ++j) {
                    const Word bj = Word{1} << j;
                    if (j == i || !(up & bj) || (dn & bj)) continue;
                    const Word up2 = up ^ bi ^ bj;
                    const Word dn2 = dn ^ bi ^ bj;
                    const double sign = -hopping_parity(up, i, j) * hopping_parity(dn, i, j);
                    const std::size_t g2 = basis.up.rank(up2) * d + basis.dn.rank(dn2);
                    acc += sign * x[static_cast<Eigen::Index>(g2)];
                }
            }
            y[static_cast<Eigen::Index>(g)] = acc;
        }
    }
    return y;
}

double total_spin_from_expectation(double s2) noexcept {
    return 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * std::max(0.0, s2)));
}

} // namespace chainhhg

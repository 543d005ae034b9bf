#include "chainhhg/symmetry.hpp"

#include "chainhhg/errors.hpp"
#include "chainhhg/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace chainhhg {

SymmetryOrbits::SymmetryOrbits(const HalfFilledBasis& basis)
    : reflection_(reflection_permutation(basis)), spin_flip_(spin_flip_permutation(basis)) {
    const std::size_t n = basis.dimension();
    images_.resize(n);
    for (std::size_t g = 0; g < n; ++g) {
        const std::uint32_t pg = reflection_[g];
        images_[g] = {static_cast<std::uint32_t>(g), pg, spin_flip_[g], spin_flip_[pg]};
    }
}

SymmetrySector::SymmetrySector(const SymmetryOrbits& orbits, int parity, int spin_flip)
    : parity_(parity), spin_flip_(spin_flip) {
    if ((parity != 1 && parity != -1) || (spin_flip != 1 && spin_flip != -1))
        throw ParameterError("symmetry labels must be +1 or -1");
    const std::size_t n = orbits.dimension();
    row_.assign(n, -1);
    coeff_.assign(n, 0.0);
    const std::array<int, 4> chi = {1, parity, spin_flip, parity * spin_flip};
    for (std::size_t g = 0; g < n; ++g) {
        const auto& img = orbits.images(g);
        if (*std::min_element(img.begin(), img.end()) != g) continue;
        std::array<std::uint32_t, 4> members{};
        std::array<double, 4> weight{};
        std::size_t count = 0;
        for (int e = 0; e < 4; ++e) {
            std::size_t i = 0;
            while (i < count && members[i] != img[static_cast<std::size_t>(e)]) ++i;
            if (i == count) {
                members[count] = img[static_cast<std::size_t>(e)];
                weight[count++] = 0.0;
            }
            weight[i] += chi[static_cast<std::size_t>(e)];
        }
        double norm2 = 0.0;
        for (std::size_t i = 0; i < count; ++i) norm2 += weight[i] * weight[i];
        if (norm2 == 0.0) continue;
        const double inv = 1.0 / std::sqrt(norm2);
        const auto sector_row = static_cast<std::int32_t>(reps_.size());
        reps_.push_back(static_cast<std::uint32_t>(g));
        orbit_size_.push_back(static_cast<double>(count));
        for (std::size_t i = 0; i < count; ++i) {
            row_[members[i]] = sector_row;
            coeff_[members[i]] = weight[i] * inv;
        }
    }
}

SparseOperator SymmetrySector::restrict(const SparseOperator& h) const {
    if (h.dimension() != row_.size()) throw ParameterError("operator dimension does not match the sector's basis");
    std::vector<std::vector<SparseOperator::Entry>> rows(reps_.size());
    for (std::size_t a = 0; a < reps_.size(); ++a) {
        const std::uint32_t rep = reps_[a];
        const double scale = std::sqrt(orbit_size_[a]);
        const auto cols = h.row_cols(rep);
        const auto vals = h.row_values(rep);
        auto& out = rows[a];
        out.reserve(cols.size());
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const std::int32_t b = row_[cols[i]];
            if (b < 0) continue;
            out.push_back({static_cast<SparseOperator::Index>(b), scale * coeff_[cols[i]] * vals[i]});
        }
    }
    return SparseOperator::from_rows(std::move(rows));
}

Eigen::VectorXd SymmetrySector::embed(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (static_cast<std::size_t>(x.size()) != reps_.size()) throw ParameterError("sector vector has the wrong length");
    Eigen::VectorXd u(static_cast<Eigen::Index>(row_.size()));
    for (std::size_t g = 0; g < row_.size(); ++g)
        u[static_cast<Eigen::Index>(g)] = row_[g] < 0 ? 0.0 : coeff_[g] * x[row_[g]];
    return u;
}

Eigen::VectorXd SymmetrySector::project(const Eigen::Ref<const Eigen::VectorXd>& u) const {
    if (static_cast<std::size_t>(u.size()) != row_.size()) throw ParameterError("full vector has the wrong length");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(reps_.size()));
    for (std::size_t g = 0; g < row_.size(); ++g)
        if (row_[g] >= 0) x[row_[g]] += coeff_[g] * u[static_cast<Eigen::Index>(g)];
    return x;
}

} // namespace chainhhg

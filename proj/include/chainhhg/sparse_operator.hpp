#pragma once

/**
 * @file sparse_operator.hpp
 * @brief Real symmetric operator in compressed-row storage.
 *
 * Column indices within each row are sorted and unique. Both triangles are
 * stored, so a matvec is a plain row sweep.
 */

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace chainhhg {

class SparseOperator {
public:
    using Index = std::uint32_t;

    struct Entry {
        Index col;
        double value;
    };

    SparseOperator() = default;

    /// Builds from per-row entry lists. Duplicates within a row are merged,
    /// exact zeros dropped and columns sorted.
    static SparseOperator from_rows(std::vector<std::vector<Entry>> rows);

    /// Builds from raw CSR arrays whose rows are already sorted and unique.
    SparseOperator(std::size_t dim, std::vector<std::uint64_t> row_ptr,
                   std::vector<Index> cols, std::vector<double> values);

    [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }
    [[nodiscard]] std::size_t nonzeros() const noexcept { return values_.size(); }

    [[nodiscard]] std::span<const Index> row_cols(std::size_t r) const noexcept {
        return {cols_.data() + row_ptr_[r], cols_.data() + row_ptr_[r + 1]};
    }
    [[nodiscard]] std::span<const double> row_values(std::size_t r) const noexcept {
        return {values_.data() + row_ptr_[r], values_.data() + row_ptr_[r + 1]};
    }
    [[nodiscard]] double at(std::size_t r, std::size_t c) const noexcept;
    [[nodiscard]] Eigen::VectorXd diagonal() const;

    /// y = A x.
    void apply(std::span<const double> x, std::span<double> y) const;
    [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

    /// Y = A X for a block of column vectors.
    void apply_block(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::Ref<Eigen::MatrixXd> y) const;

    /// Largest |A(r,c) - A(c,r)| over stored entries.
    [[nodiscard]] double max_asymmetry() const;

    [[nodiscard]] Eigen::MatrixXd to_dense() const;

    /// Gershgorin bound on the spectral radius.
    [[nodiscard]] double norm_bound() const noexcept;

    /// Text dump of "row col value" triples in row-major order.
    void write_triples(std::ostream& os) const;

    [[nodiscard]] std::size_t memory_bytes() const noexcept {
        return row_ptr_.size() * sizeof(std::uint64_t) + cols_.size() * sizeof(Index) +
               values_.size() * sizeof(double);
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::uint64_t> row_ptr_{0};
    std::vector<Index> cols_;
    std::vector<double> values_;
};

} // namespace chainhhg

#include "chainhhg/sparse_operator.hpp"

#include "chainhhg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace chainhhg {

SparseOperator SparseOperator::from_rows(std::vector<std::vector<Entry>> rows) {
    const std::size_t dim = rows.size();
    std::vector<std::uint64_t> row_ptr(dim + 1, 0);
    std::vector<Index> cols;
    std::vector<double> values;
    for (std::size_t r = 0; r < dim; ++r) {
        auto& row = rows[r];
        std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
        for (std::size_t i = 0; i < row.size();) {
            const Index c = row[i].col;
            if (c >= dim) throw ParameterError("column index out of range");
            double v = 0.0;
            for (; i < row.size() && row[i].col == c; ++i) v += row[i].value;
            if (v != 0.0) {
                cols.push_back(c);
                values.push_back(v);
            }
        }
        row_ptr[r + 1] = cols.size();
        std::vector<Entry>().swap(row);
    }
    return SparseOperator(dim, std::move(row_ptr), std::move(cols), std::move(values));
}

SparseOperator::SparseOperator(std::size_t dim, std::vector<std::uint64_t> row_ptr,
                               std::vector<Index> cols, std::vector<double> values)
    : dim_(dim), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values)) {
    if (row_ptr_.size() != dim_ + 1 || row_ptr_.back() != cols_.size() || cols_.size() != values_.size())
        throw ParameterError("inconsistent CSR arrays");
}

double SparseOperator::at(std::size_t r, std::size_t c) const noexcept {
    const auto cs = row_cols(r);
    const auto it = std::lower_bound(cs.begin(), cs.end(), static_cast<Index>(c));
    if (it == cs.end() || *it != c) return 0.0;
    return values_[row_ptr_[r] + static_cast<std::size_t>(it - cs.begin())];
}

Eigen::VectorXd SparseOperator::diagonal() const {
    Eigen::VectorXd d(static_cast<Eigen::Index>(dim_));
    for (std::size_t r = 0; r < dim_; ++r) d[static_cast<Eigen::Index>(r)] = at(r, r);
    return d;
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != dim_ || y.size() != dim_) throw ParameterError("matvec dimension mismatch");
    const auto n = static_cast<std::int64_t>(dim_);
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < n; ++r) {
        double acc = 0.0;
        for (std::uint64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) acc += values_[p] * x[cols_[p]];
        y[r] = acc;
    }
}

Eigen::VectorXd SparseOperator::apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(x.size());
    apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
          std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
    return y;
}

void SparseOperator::apply_block(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::Ref<Eigen::MatrixXd> y) const {
    if (static_cast<std::size_t>(x.rows()) != dim_ || y.rows() != x.rows() || y.cols() != x.cols())
        throw ParameterError("block matvec dimension mismatch");
    const Eigen::Index p = x.cols();
    if (p == 1) {
        Eigen::VectorXd xc = x.col(0);
        Eigen::VectorXd yc(xc.size());
        apply(std::span<const double>(xc.data(), dim_), std::span<double>(yc.data(), dim_));
        y.col(0) = yc;
        return;
    }
    // Interleave the block so each gathered row touches contiguous memory.
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor xr = x;
    RowMajor yr(x.rows(), p);
    const auto n = static_cast<std::int64_t>(dim_);
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < n; ++r) {
        double* out = yr.data() + r * p;
        for (Eigen::Index c = 0; c < p; ++c) out[c] = 0.0;
        for (std::uint64_t q = row_ptr_[r]; q < row_ptr_[r + 1]; ++q) {
            const double v = values_[q];
            const double* in = xr.data() + static_cast<std::int64_t>(cols_[q]) * p;
            for (Eigen::Index c = 0; c < p; ++c) out[c] += v * in[c];
        }
    }
    y = yr;
}

double SparseOperator::max_asymmetry() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < dim_; ++r) {
        const auto cs = row_cols(r);
        const auto vs = row_values(r);
        for (std::size_t i = 0; i < cs.size(); ++i)
            worst = std::max(worst, std::abs(vs[i] - at(cs[i], r)));
    }
    return worst;
}

Eigen::MatrixXd SparseOperator::to_dense() const {
    const auto n = static_cast<Eigen::Index>(dim_);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t r = 0; r < dim_; ++r) {
        const auto cs = row_cols(r);
        const auto vs = row_values(r);
        for (std::size_t i = 0; i < cs.size(); ++i)
            a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cs[i])) = vs[i];
    }
    return a;
}

double SparseOperator::norm_bound() const noexcept {
    double bound = 0.0;
    for (std::size_t r = 0; r < dim_; ++r) {
        double s = 0.0;
        for (double v : row_values(r)) s += std::abs(v);
        bound = std::max(bound, s);
    }
    return bound;
}

void SparseOperator::write_triples(std::ostream& os) const {
    os << std::setprecision(17);
    for (std::size_t r = 0; r < dim_; ++r) {
        const auto cs = row_cols(r);
        const auto vs = row_values(r);
        for (std::size_t i = 0; i < cs.size(); ++i) os << r << ' ' << cs[i] << ' ' << vs[i] << '\n';
    }
}

} // namespace chainhhg

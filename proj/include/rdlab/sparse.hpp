#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rdlab {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse row matrix. Duplicate triplets are summed on build.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets, bool symmetric = false);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }
    [[nodiscard]] bool symmetric() const noexcept { return symmetric_; }

    [[nodiscard]] const std::vector<std::size_t>& row_offsets() const noexcept { return offsets_; }
    [[nodiscard]] const std::vector<std::size_t>& col_indices() const noexcept { return cols_idx_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    /// Entry (i, j), zero when not stored.
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const;

    void multiply(std::span<const double> x, std::span<double> y) const;
    [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const;
    [[nodiscard]] std::vector<double> diagonal() const;

    /// Largest |a_ij - a_ji| over stored entries.
    [[nodiscard]] double max_asymmetry() const;

    /// Principal submatrix on the given (ascending) index set.
    [[nodiscard]] SparseMatrix restrict_to(std::span<const std::size_t> keep) const;

    /// Returns a + scale * b; both must have identical dimensions.
    [[nodiscard]] static SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double scale);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    bool symmetric_ = false;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::size_t> cols_idx_;
    std::vector<double> values_;
};

struct CgResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for SPD systems. Stops when
/// ||b - Ax|| <= rel_tol * ||b||; throws SolverError otherwise.
[[nodiscard]] CgResult solve_cg(const SparseMatrix& a, std::span<const double> b, double rel_tol = 1e-10,
                                std::size_t max_iter = 0);

} // namespace rdlab

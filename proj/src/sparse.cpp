#include "rdlab/sparse.hpp"

#include "rdlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rdlab {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets, bool symmetric)
    : rows_(rows), cols_(cols), symmetric_(symmetric)
{
    for (const Triplet& t : triplets) {
        if (t.row >= rows || t.col >= cols) {
            throw std::out_of_range("SparseMatrix: triplet index out of range");
        }
    }
    std::sort(triplets.begin(), triplets.end(),
              [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    offsets_.assign(rows + 1, 0);
    cols_idx_.clear();
    values_.clear();
    for (std::size_t i = 0; i < triplets.size();) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < triplets.size() && triplets[j].row == triplets[i].row && triplets[j].col == triplets[i].col) {
            sum += triplets[j].value;
            ++j;
        }
        cols_idx_.push_back(triplets[i].col);
        values_.push_back(sum);
        ++offsets_[triplets[i].row + 1];
        i = j;
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
}

double SparseMatrix::operator()(std::size_t i, std::size_t j) const
{
    if (i >= rows_ || j >= cols_) {
        throw std::out_of_range("SparseMatrix: index out of range");
    }
    const auto first = cols_idx_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    const auto last = cols_idx_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    return (it != last && *it == j) ? values_[static_cast<std::size_t>(it - cols_idx_.begin())] : 0.0;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    if (x.size() != cols_ || y.size() != rows_) {
        throw std::invalid_argument("SparseMatrix::multiply: dimension mismatch");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
            s += values_[k] * x[cols_idx_[k]];
        }
        y[i] = s;
    }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const
{
    std::vector<double> y(rows_);
    multiply(x, y);
    return y;
}

std::vector<double> SparseMatrix::diagonal() const
{
    std::vector<double> d(std::min(rows_, cols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = (*this)(i, i);
    }
    return d;
}

double SparseMatrix::max_asymmetry() const
{
    double worst = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
            worst = std::max(worst, std::abs(values_[k] - (*this)(cols_idx_[k], i)));
        }
    }
    return worst;
}

SparseMatrix SparseMatrix::restrict_to(std::span<const std::size_t> keep) const
{
    std::vector<std::size_t> map(std::max(rows_, cols_), static_cast<std::size_t>(-1));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        map[keep[k]] = k;
    }
    std::vector<Triplet> t;
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const std::size_t i = keep[k];
        for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p) {
            const std::size_t j = map[cols_idx_[p]];
            if (j != static_cast<std::size_t>(-1)) {
                t.push_back({k, j, values_[p]});
            }
        }
    }
    return SparseMatrix(keep.size(), keep.size(), std::move(t), symmetric_);
}

SparseMatrix SparseMatrix::add(const SparseMatrix& a, const SparseMatrix& b, double scale)
{
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
        throw std::invalid_argument("SparseMatrix::add: dimension mismatch");
    }
    std::vector<Triplet> t;
    t.reserve(a.nnz() + b.nnz());
    for (std::size_t i = 0; i < a.rows_; ++i) {
        for (std::size_t k = a.offsets_[i]; k < a.offsets_[i + 1]; ++k) {
            t.push_back({i, a.cols_idx_[k], a.values_[k]});
        }
        for (std::size_t k = b.offsets_[i]; k < b.offsets_[i + 1]; ++k) {
            t.push_back({i, b.cols_idx_[k], scale * b.values_[k]});
        }
    }
    return SparseMatrix(a.rows_, a.cols_, std::move(t), a.symmetric_ && b.symmetric_);
}

CgResult solve_cg(const SparseMatrix& a, std::span<const double> b, double rel_tol, std::size_t max_iter)
{
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) {
        throw std::invalid_argument("solve_cg: dimension mismatch");
    }
    if (max_iter == 0) {
        max_iter = std::max<std::size_t>(10 * n, 10);
    }
    CgResult res;
    res.x.assign(n, 0.0);

    const double bnorm = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
    if (bnorm == 0.0) {
        return res;
    }
    std::vector<double> inv_diag = a.diagonal();
    for (double& d : inv_diag) {
        if (!(d > 0.0)) {
            throw std::domain_error("solve_cg: non-positive diagonal entry, matrix is not SPD");
        }
        d = 1.0 / d;
    }

    std::vector<double> r(b.begin(), b.end());
    std::vector<double> z(n);
    std::vector<double> p(n);
    std::vector<double> ap(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = inv_diag[i] * r[i];
    }
    p = z;
    double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
    double rnorm = bnorm;

    for (std::size_t it = 1; it <= max_iter; ++it) {
        a.multiply(p, ap);
        const double pap = std::inner_product(p.begin(), p.end(), ap.begin(), 0.0);
        if (!(pap > 0.0)) {
            throw SolverError("solve_cg: breakdown, matrix is not positive definite", rnorm / bnorm, it);
        }
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
        res.iterations = it;
        res.relative_residual = rnorm / bnorm;
        if (res.relative_residual <= rel_tol) {
            return res;
        }
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = inv_diag[i] * r[i];
        }
        const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = z[i] + beta * p[i];
        }
    }
    throw SolverError("solve_cg: no convergence after " + std::to_string(max_iter) +
                          " iterations, relative residual " + std::to_string(res.relative_residual),
                      res.relative_residual, max_iter);
}

} // namespace rdlab

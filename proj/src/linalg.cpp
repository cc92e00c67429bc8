#include "biot/linalg.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <string>

namespace biot {

SparseMatrix::SparseMatrix(int rows, int cols, std::vector<Triplet> entries) : rows_(rows), cols_(cols) {
    for (const auto& t : entries)
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw std::out_of_range("triplet outside matrix shape");
    std::sort(entries.begin(), entries.end(),
              [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    offsets_.assign(rows + 1, 0);
    for (std::size_t k = 0; k < entries.size();) {
        const int r = entries[k].row;
        const int c = entries[k].col;
        double v = 0.0;
        for (; k < entries.size() && entries[k].row == r && entries[k].col == c; ++k) v += entries[k].value;
        cols_idx_.push_back(c);
        values_.push_back(v);
        ++offsets_[r + 1];
    }
    for (int r = 0; r < rows; ++r) offsets_[r + 1] += offsets_[r];
}

double SparseMatrix::coeff(int r, int c) const {
    auto first = cols_idx_.begin() + offsets_[r];
    auto last = cols_idx_.begin() + offsets_[r + 1];
    auto it = std::lower_bound(first, last, c);
    return (it != last && *it == c) ? values_[it - cols_idx_.begin()] : 0.0;
}

Vector SparseMatrix::diagonal() const {
    Vector d(rows_, 0.0);
    for (int r = 0; r < rows_; ++r) d[r] = coeff(r, r);
    return d;
}

void SparseMatrix::multiply(const Vector& x, Vector& y) const {
    if (static_cast<int>(x.size()) != cols_) throw std::invalid_argument("dimension mismatch in multiply");
    y.assign(rows_, 0.0);
    for (int r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) s += values_[k] * x[cols_idx_[k]];
        y[r] = s;
    }
}

Vector SparseMatrix::operator*(const Vector& x) const {
    Vector y;
    multiply(x, y);
    return y;
}

void SparseMatrix::axpby(double a, double b, const SparseMatrix& other) {
    if (other.offsets_ != offsets_ || other.cols_idx_ != cols_idx_)
        throw std::invalid_argument("axpby needs identical sparsity patterns");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] = a * values_[k] + b * other.values_[k];
}

SparseMatrix SparseMatrix::linear_combination(double a, const SparseMatrix& A, double b, const SparseMatrix& B) {
    if (A.rows_ != B.rows_ || A.cols_ != B.cols_) throw std::invalid_argument("shape mismatch");
    std::vector<Triplet> t;
    t.reserve(A.values_.size() + B.values_.size());
    for (int r = 0; r < A.rows_; ++r) {
        for (int k = A.offsets_[r]; k < A.offsets_[r + 1]; ++k) t.push_back({r, A.cols_idx_[k], a * A.values_[k]});
        for (int k = B.offsets_[r]; k < B.offsets_[r + 1]; ++k) t.push_back({r, B.cols_idx_[k], b * B.values_[k]});
    }
    return SparseMatrix(A.rows_, A.cols_, std::move(t));
}

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

namespace {

void check_symmetry(const SparseMatrix& A) {
    const auto& off = A.row_offsets();
    const auto& col = A.col_indices();
    const auto& val = A.values();
    const int n = A.rows();
    const int stride = std::max(1, n / 64);
    double scale = 0.0;
    for (double v : val) scale = std::max(scale, std::abs(v));
    for (int r = 0; r < n; r += stride) {
        for (int k = off[r]; k < off[r + 1]; ++k) {
            double a = val[k];
            double b = A.coeff(col[k], r);
            if (std::abs(a - b) > 1e-12 * std::max({std::abs(a), std::abs(b), 1e-3 * scale}))
                throw std::invalid_argument("solve_spd: matrix is not symmetric");
        }
    }
}

}  // namespace

SolveResult solve_spd(const SparseMatrix& A, const Vector& b, const SolveControls& controls, const Vector& guess) {
    const int n = A.rows();
    if (A.cols() != n || static_cast<int>(b.size()) != n) throw std::invalid_argument("solve_spd: dimension mismatch");
    if (!(controls.rel_tolerance > 0.0 && controls.rel_tolerance < 1.0))
        throw std::invalid_argument("solve_spd: rel_tolerance must lie in (0, 1)");
    check_symmetry(A);

    SolveResult res;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        return res;
    }
    const int max_it = controls.max_iterations > 0 ? controls.max_iterations : 20 * n;

    Vector inv_diag(n, 1.0);
    if (controls.preconditioner == Preconditioner::diagonal) {
        Vector d = A.diagonal();
        for (int i = 0; i < n; ++i) inv_diag[i] = d[i] > 0.0 ? 1.0 / d[i] : 1.0;
    }

    Vector& x = res.x;
    x = guess.empty() ? Vector(n, 0.0) : guess;
    Vector r(n), z(n), p(n), q(n);
    A.multiply(x, q);
    for (int i = 0; i < n; ++i) r[i] = b[i] - q[i];
    double rnorm = norm2(r);
    if (rnorm <= controls.rel_tolerance * bnorm) {
        res.residual = rnorm / bnorm;
        return res;
    }
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_it; ++it) {
        A.multiply(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) {
            res.iterations = it;
            throw SolveError("solve_spd: matrix is not positive definite", rnorm / bnorm);
        }
        const double alpha = rz / pq;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rnorm = norm2(r);
        if (rnorm <= controls.rel_tolerance * bnorm) {
            // Confirm against the true residual to rule out drift.
            A.multiply(x, q);
            for (int i = 0; i < n; ++i) r[i] = b[i] - q[i];
            rnorm = norm2(r);
            if (rnorm <= controls.rel_tolerance * bnorm) {
                res.iterations = it;
                res.residual = rnorm / bnorm;
                return res;
            }
        }
        for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolveError("solve_spd: no convergence after " + std::to_string(max_it) +
                         " iterations (residual " + std::to_string(rnorm / bnorm) + ")",
                     rnorm / bnorm);
}

struct SpdFactorization::Impl {
    Eigen::CholmodSimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower> llt;
    bool analyzed = false;
    std::vector<int> offsets;
    std::vector<int> cols;
};

SpdFactorization::SpdFactorization() : impl_(std::make_unique<Impl>()) {}
SpdFactorization::~SpdFactorization() = default;
SpdFactorization::SpdFactorization(SpdFactorization&&) noexcept = default;
SpdFactorization& SpdFactorization::operator=(SpdFactorization&&) noexcept = default;

void SpdFactorization::factorize(const SparseMatrix& A) {
    const int n = A.rows();
    // CSR of a symmetric matrix read as CSC is its transpose, i.e. itself.
    Eigen::Map<const Eigen::SparseMatrix<double>> map(n, n, A.nnz(), A.row_offsets().data(), A.col_indices().data(),
                                                      A.values().data());
    const Eigen::SparseMatrix<double> view = map;
    const bool same = impl_->analyzed && impl_->offsets == A.row_offsets() && impl_->cols == A.col_indices();
    if (!same) {
        impl_->llt.analyzePattern(view);
        impl_->offsets = A.row_offsets();
        impl_->cols = A.col_indices();
        impl_->analyzed = true;
    }
    impl_->llt.factorize(view);
    if (impl_->llt.info() != Eigen::Success) throw SolveError("sparse factorization failed: matrix is not positive definite", 1.0);
}

Vector SpdFactorization::solve(const Vector& b) const {
    Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = impl_->llt.solve(rhs);
    return Vector(x.data(), x.data() + x.size());
}

}  // namespace biot

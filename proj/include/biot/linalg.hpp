#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

namespace biot {

using Vector = std::vector<double>;

struct Triplet {
    int row;
    int col;
    double value;
};

// Compressed sparse row matrix; column indices sorted and unique per row.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(int rows, int cols, std::vector<Triplet> entries);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int nnz() const { return static_cast<int>(values_.size()); }

    const std::vector<int>& row_offsets() const { return offsets_; }
    const std::vector<int>& col_indices() const { return cols_idx_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double coeff(int r, int c) const;
    Vector diagonal() const;
    void multiply(const Vector& x, Vector& y) const;
    Vector operator*(const Vector& x) const;

    // this = a * this + b * other; both must share the sparsity pattern.
    void axpby(double a, double b, const SparseMatrix& other);
    // Same pattern as `other` plus this matrix's entries.
    static SparseMatrix linear_combination(double a, const SparseMatrix& A, double b, const SparseMatrix& B);

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> offsets_{0};
    std::vector<int> cols_idx_;
    std::vector<double> values_;
};

enum class Preconditioner { none, diagonal };

struct SolveControls {
    double rel_tolerance = 1e-10;
    int max_iterations = 0;  // 0 -> 20 * n
    Preconditioner preconditioner = Preconditioner::diagonal;
};

struct SolveResult {
    Vector x;
    int iterations = 0;
    double residual = 0.0;  // ||b - Ax|| / ||b||
};

class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Preconditioned conjugate gradients. `guess` may be empty.
SolveResult solve_spd(const SparseMatrix& A, const Vector& b, const SolveControls& controls = {},
                      const Vector& guess = {});

// Sparse Cholesky (CHOLMOD) for the ill-conditioned majorant systems. The
// symbolic analysis is kept across refactorisations with the same pattern.
class SpdFactorization {
public:
    SpdFactorization();
    ~SpdFactorization();
    SpdFactorization(SpdFactorization&&) noexcept;
    SpdFactorization& operator=(SpdFactorization&&) noexcept;

    void factorize(const SparseMatrix& A);
    Vector solve(const Vector& b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);

}  // namespace biot

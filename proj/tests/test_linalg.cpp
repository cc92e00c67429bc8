#include <gtest/gtest.h>

#include <random>

#include "biot/linalg.hpp"

using namespace biot;

namespace {

SparseMatrix laplace_1d(int n) {
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, 2.0});
        if (i > 0) t.push_back({i, i - 1, -1.0});
        if (i + 1 < n) t.push_back({i, i + 1, -1.0});
    }
    return SparseMatrix(n, n, t);
}

}  // namespace

TEST(SparseMatrix, DuplicatesSummedAndSorted) {
    SparseMatrix A(2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 2, 3.0}, {1, 0, -1.0}});
    EXPECT_EQ(A.nnz(), 3);
    EXPECT_DOUBLE_EQ(A.coeff(1, 2), 4.0);
    EXPECT_DOUBLE_EQ(A.coeff(0, 0), 0.0);
    EXPECT_EQ(A.col_indices()[1], 0);
    Vector y = A * Vector{1.0, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(y[0], 2.0);
    EXPECT_DOUBLE_EQ(y[1], 3.0);
    EXPECT_THROW(SparseMatrix(1, 1, {{1, 0, 1.0}}), std::out_of_range);
}

TEST(SparseMatrix, LinearCombination) {
    SparseMatrix A(2, 2, {{0, 0, 1.0}});
    SparseMatrix B(2, 2, {{1, 1, 2.0}, {0, 1, 1.0}});
    SparseMatrix C = SparseMatrix::linear_combination(2.0, A, 3.0, B);
    EXPECT_DOUBLE_EQ(C.coeff(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(C.coeff(1, 1), 6.0);
    EXPECT_DOUBLE_EQ(C.coeff(0, 1), 3.0);
}

TEST(SolveSpd, Identity) {
    SparseMatrix I(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
    auto r = solve_spd(I, {1.0, -2.0, 3.5});
    EXPECT_NEAR(r.x[0], 1.0, 1e-14);
    EXPECT_NEAR(r.x[1], -2.0, 1e-14);
    EXPECT_NEAR(r.x[2], 3.5, 1e-14);
}

TEST(SolveSpd, TwoByTwo) {
    SparseMatrix A(2, 2, {{0, 0, 4.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0}});
    auto r = solve_spd(A, {1.0, 2.0});
    EXPECT_NEAR(r.x[0], 1.0 / 11.0, 1e-12);
    EXPECT_NEAR(r.x[1], 7.0 / 11.0, 1e-12);
    EXPECT_LE(r.residual, 1e-10);
}

TEST(SolveSpd, ZeroRhs) {
    auto r = solve_spd(laplace_1d(5), Vector(5, 0.0));
    EXPECT_EQ(r.iterations, 0);
    for (double v : r.x) EXPECT_EQ(v, 0.0);
}

TEST(SolveSpd, SingularReportsFailure) {
    SparseMatrix A(2, 2, {{0, 0, 1.0}});
    try {
        solve_spd(A, {1.0, 1.0});
        FAIL() << "expected failure";
    } catch (const SolveError& e) {
        EXPECT_GT(e.residual(), 1e-10);
    }
}

TEST(SolveSpd, NonsymmetricRejected) {
    SparseMatrix A(2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 1, 2.0}});
    EXPECT_THROW(solve_spd(A, {1.0, 1.0}), std::invalid_argument);
}

TEST(SolveSpd, ResidualContractAndDeterminism) {
    const int n = 200;
    SparseMatrix A = laplace_1d(n);
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Vector b(n);
    for (double& v : b) v = d(gen);
    SolveControls c;
    c.rel_tolerance = 1e-11;
    auto r1 = solve_spd(A, b, c);
    auto r2 = solve_spd(A, b, c);
    EXPECT_EQ(r1.x, r2.x);
    Vector Ax = A * r1.x;
    double res = 0.0;
    for (int i = 0; i < n; ++i) res += (b[i] - Ax[i]) * (b[i] - Ax[i]);
    EXPECT_LE(std::sqrt(res) / norm2(b), 1e-11);
}

TEST(SpdFactorization, MatchesCg) {
    const int n = 50;
    SparseMatrix A = laplace_1d(n);
    Vector b(n, 1.0);
    SpdFactorization f;
    f.factorize(A);
    Vector x = f.solve(b);
    Vector y = solve_spd(A, b, {1e-13, 0, Preconditioner::diagonal}).x;
    for (int i = 0; i < n; ++i) EXPECT_NEAR(x[i], y[i], 1e-9);
    // Refactorise a scaled copy on the cached pattern.
    for (double& v : A.values()) v *= 2.0;
    f.factorize(A);
    Vector z = f.solve(b);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(z[i], 0.5 * x[i], 1e-9);
}

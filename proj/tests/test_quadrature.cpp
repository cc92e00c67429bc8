#include <gtest/gtest.h>

#include <cmath>

#include "biot/quadrature.hpp"

using namespace biot;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Integral of l0^a l1^b l2^c over a triangle divided by its area.
double monomial_mean(int a, int b, int c) {
    return 2.0 * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2);
}

}  // namespace

TEST(Quadrature, WeightsPositiveAndNormalised) {
    for (int deg : {1, 2, 4, 6, 8}) {
        const auto& r = triangle_rule(deg);
        double s = 0.0;
        for (double w : r.weights) {
            EXPECT_GT(w, 0.0);
            s += w;
        }
        EXPECT_NEAR(s, 1.0, 1e-15);
        for (const auto& p : r.points) EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-14);
    }
}

TEST(Quadrature, ExactForBarycentricMonomials) {
    for (int deg : {1, 2, 4, 6, 8}) {
        const auto& r = triangle_rule(deg);
        EXPECT_GE(r.degree, deg);
        for (int a = 0; a <= deg; ++a)
            for (int b = 0; a + b <= deg; ++b)
                for (int c = 0; a + b + c <= deg; ++c) {
                    double q = 0.0;
                    for (std::size_t k = 0; k < r.points.size(); ++k)
                        q += r.weights[k] * std::pow(r.points[k][0], a) * std::pow(r.points[k][1], b) *
                             std::pow(r.points[k][2], c);
                    EXPECT_NEAR(q, monomial_mean(a, b, c), 1e-12) << deg << ' ' << a << b << c;
                }
    }
}

TEST(Quadrature, RequestBeyondTableThrows) { EXPECT_THROW(triangle_rule(9), std::invalid_argument); }

TEST(Quadrature, GaussLineExactness) {
    for (int n = 1; n <= 4; ++n) {
        const auto& r = gauss_line(n);
        for (int k = 0; k < 2 * n; ++k) {
            double q = 0.0;
            for (std::size_t i = 0; i < r.points.size(); ++i) q += r.weights[i] * std::pow(r.points[i], k);
            EXPECT_NEAR(q, 1.0 / (k + 1), 1e-14);
        }
    }
    EXPECT_THROW(gauss_line(5), std::invalid_argument);
}

#pragma once

#include <array>
#include <vector>

namespace biot {

// Symmetric triangle rule in barycentric coordinates. Weights sum to one, so
// the integral over a cell is area * sum(w_q f(x_q)).
struct QuadratureRule {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int degree = 0;
};

// Smallest built-in rule exact to at least `degree` (available: 1, 2, 4, 6, 8).
const QuadratureRule& triangle_rule(int degree);

// Gauss-Legendre rule on [0, 1].
struct LineRule {
    std::vector<double> points;
    std::vector<double> weights;
};

const LineRule& gauss_line(int n_points);

}  // namespace biot

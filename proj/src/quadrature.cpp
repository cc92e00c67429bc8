#include "biot/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace biot {

namespace {

void add_centroid(QuadratureRule& r, double w) {
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(w);
}

// Orbit of (a, b, b).
void add_orbit3(QuadratureRule& r, double a, double w) {
    double b = 0.5 * (1.0 - a);
    r.points.push_back({a, b, b});
    r.points.push_back({b, a, b});
    r.points.push_back({b, b, a});
    for (int k = 0; k < 3; ++k) r.weights.push_back(w);
}

// Orbit of (a, b, c) with distinct entries.
void add_orbit6(QuadratureRule& r, double a, double b, double w) {
    double c = 1.0 - a - b;
    r.points.push_back({a, b, c});
    r.points.push_back({a, c, b});
    r.points.push_back({b, a, c});
    r.points.push_back({b, c, a});
    r.points.push_back({c, a, b});
    r.points.push_back({c, b, a});
    for (int k = 0; k < 6; ++k) r.weights.push_back(w);
}

QuadratureRule make_rule(int degree) {
    QuadratureRule r;
    r.degree = degree;
    switch (degree) {
        case 1:
            add_centroid(r, 1.0);
            break;
        case 2:
            add_orbit3(r, 2.0 / 3.0, 1.0 / 3.0);
            break;
        case 4:
            add_orbit3(r, 0.108103018168070, 0.223381589678011);
            add_orbit3(r, 0.816847572980459, 0.109951743655322);
            break;
        case 6:
            add_orbit3(r, 0.501426509658179, 0.116786275726379);
            add_orbit3(r, 0.873821971016996, 0.050844906370207);
            add_orbit6(r, 0.053145049844817, 0.310352451033784, 0.082851075618374);
            break;
        case 8:
            add_centroid(r, 0.144315607677787);
            add_orbit3(r, 0.081414823414554, 0.095091634267285);
            add_orbit3(r, 0.658861384496480, 0.103217370534718);
            add_orbit3(r, 0.898905543365938, 0.032458497623198);
            add_orbit6(r, 0.008394777409958, 0.263112829634638, 0.027230314174435);
            break;
        default:
            throw std::logic_error("no triangle rule of that degree");
    }
    // Renormalise the tabulated weights so they sum to one to round-off.
    double s = 0.0;
    for (double w : r.weights) s += w;
    for (double& w : r.weights) w /= s;
    return r;
}

LineRule make_line(int n) {
    LineRule r;
    std::vector<double> x, w;
    switch (n) {
        case 1:
            x = {0.0};
            w = {2.0};
            break;
        case 2:
            x = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
            w = {1.0, 1.0};
            break;
        case 3:
            x = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
            w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
            break;
        case 4: {
            double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(1.2));
            double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(1.2));
            double wa = (18.0 + std::sqrt(30.0)) / 36.0;
            double wb = (18.0 - std::sqrt(30.0)) / 36.0;
            x = {-b, -a, a, b};
            w = {wb, wa, wa, wb};
            break;
        }
        default:
            throw std::logic_error("no Gauss rule with that many points");
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
        r.points.push_back(0.5 * (x[k] + 1.0));
        r.weights.push_back(0.5 * w[k]);
    }
    return r;
}

}  // namespace

const QuadratureRule& triangle_rule(int degree) {
    static const QuadratureRule rules[] = {make_rule(1), make_rule(2), make_rule(4), make_rule(6), make_rule(8)};
    for (const auto& r : rules)
        if (r.degree >= degree) return r;
    throw std::invalid_argument("requested quadrature degree exceeds 8");
}

const LineRule& gauss_line(int n_points) {
    static const LineRule rules[] = {make_line(1), make_line(2), make_line(3), make_line(4)};
    if (n_points < 1 || n_points > 4) throw std::invalid_argument("Gauss rule supports 1 to 4 points");
    return rules[n_points - 1];
}

}  // namespace biot

#include "biot/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace biot {

void BiotParameters::validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
    if (!(K[0] > 0.0 && K[1] > 0.0)) throw std::invalid_argument("permeability must be positive");
    if (dim != 2) throw std::invalid_argument("only two space dimensions are implemented");
}

double plane_strain_lambda(double lambda_vol, double mu) {
    if (!(mu > 0.0) || !(lambda_vol >= 0.0)) throw std::invalid_argument("invalid Lame parameters");
    return 2.0 * lambda_vol * mu / (lambda_vol + 2.0 * mu);
}

std::pair<double, double> lame_from_young(double E, double nu) {
    if (!(E > 0.0) || !(nu >= 0.0 && nu < 0.5)) throw std::invalid_argument("invalid elastic moduli");
    return {E / (2.0 * (1.0 + nu)), E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))};
}

TuningConstants derived_constants(const BiotParameters& p, Point lo, Point hi, TuningMode mode, double user_L) {
    p.validate();
    const double a = hi.x - lo.x, b = hi.y - lo.y;
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("degenerate domain");
    TuningConstants c;
    const double bulk = p.lambda + 2.0 * p.mu / p.dim;
    switch (mode) {
        case TuningMode::optimal: c.L = p.alpha * p.alpha / (2.0 * bulk); break;
        case TuningMode::classical: c.L = p.alpha * p.alpha / bulk; break;
        case TuningMode::user:
            if (!(user_L > 0.0)) throw std::invalid_argument("user L must be positive");
            c.L = user_L;
            c.below_guarantee = p.lambda == 0.0 || user_L < p.alpha * p.alpha / (2.0 * p.lambda);
            break;
    }
    c.gamma = std::sqrt(2.0 * c.L);
    c.q = c.L / (p.beta + c.L);
    c.lambda_K = p.lambda_K();
    c.mu_K = p.mu_K();
    c.C_F = 1.0 / (std::numbers::pi * std::sqrt(1.0 / (a * a) + 1.0 / (b * b)));
    c.C_K = std::sqrt(2.0);
    c.C_tr = 0.0;
    c.Cp2 = (1.0 + c.C_tr * c.C_tr) / (p.beta + c.L);
    c.Cu2 = c.C_F * c.C_F * c.C_K * c.C_K / (2.0 * p.mu);
    return c;
}

double contraction_sum(double q, int i) {
    double s = 1.0, qk = 1.0;
    for (int k = 1; k <= i - 1; ++k) {
        qk *= q;
        s += qk;
    }
    return s;
}

TimeGrid::TimeGrid(double T_, int N_) : T(T_), N(N_) {
    if (!(T > 0.0) || N < 1) throw std::invalid_argument("time grid needs T > 0 and N >= 1");
}

CaseName parse_case(const std::string& s) {
    if (s == "ex1") return CaseName::ex1;
    if (s == "ex2") return CaseName::ex2;
    throw std::invalid_argument("unknown case '" + s + "'");
}

Variant parse_variant(const std::string& s) {
    if (s == "simplified") return Variant::simplified;
    if (s == "realistic") return Variant::realistic;
    throw std::invalid_argument("unknown variant '" + s + "'");
}

const char* to_string(CaseName c) { return c == CaseName::ex1 ? "ex1" : "ex2"; }
const char* to_string(Variant v) { return v == Variant::simplified ? "simplified" : "realistic"; }

namespace {

// phi = x(1-x)y(1-y) and its derivatives.
struct Bubble {
    double v, x, y, xx, yy, xy;
};

Bubble bubble(Point p) {
    const double X = p.x * (1 - p.x), Y = p.y * (1 - p.y);
    return {X * Y, (1 - 2 * p.x) * Y, X * (1 - 2 * p.y), -2 * Y, -2 * X, (1 - 2 * p.x) * (1 - 2 * p.y)};
}

}  // namespace

ProblemDefinition manufactured_case(CaseName name, Variant variant) {
    ProblemDefinition P;
    P.name = std::string(to_string(name)) + "-" + to_string(variant);
    P.T = 10.0;
    BiotParameters& k = P.params;
    k.alpha = 1.0;
    if (name == CaseName::ex1) {
        if (variant == Variant::simplified) {
            k.mu = 1.0;
            k.lambda = plane_strain_lambda(1.0, 1.0);
            k.beta = 1.0;
            k.K = {1.0, 1.0};
        } else {
            auto [mu, lam] = lame_from_young(0.594e9, 0.2);
            k.mu = mu;
            k.lambda = plane_strain_lambda(lam, mu);
            k.beta = 9.406e-8;
            k.K = {100.0, 100.0};
            P.pressure_scale = 1e8;
        }
    } else {
        if (variant == Variant::simplified) {
            auto [mu, lam] = lame_from_young(0.594, 0.2);
            k.mu = mu;
            k.lambda = plane_strain_lambda(lam, mu);
            k.beta = 0.1165;
            k.K = {1.0, 1.0};
        } else {
            auto [mu, lam] = lame_from_young(7e7, 0.2);
            k.mu = mu;
            k.lambda = plane_strain_lambda(lam, mu);
            k.beta = 6.8909e-5;
            k.K = {50e-10, 200e-10};
            P.pressure_scale = 1e8;
        }
    }
    k.validate();

    const double s = P.pressure_scale;
    const BiotParameters prm = k;
    P.exact_p = [s](Point x, double t) {
        const Bubble b = bubble(x);
        Jet j;
        j.val[0] = s * t * b.v;
        j.grad[0][0] = s * t * b.x;
        j.grad[0][1] = s * t * b.y;
        return j;
    };
    if (name == CaseName::ex1) {
        P.exact_u = [](Point x, double t) {
            const Bubble b = bubble(x);
            Jet j;
            for (int c = 0; c < 2; ++c) {
                j.val[c] = t * b.v;
                j.grad[c][0] = t * b.x;
                j.grad[c][1] = t * b.y;
            }
            return j;
        };
        // -mu Lap u - (lambda + mu) grad div u + alpha grad p
        P.f = [prm, s](Point x, double t) {
            const Bubble b = bubble(x);
            const double lap = b.xx + b.yy;
            const double gd0 = b.xx + b.xy, gd1 = b.xy + b.yy;
            return std::array<double, 2>{
                t * (-prm.mu * lap - (prm.lambda + prm.mu) * gd0 + prm.alpha * s * b.x),
                t * (-prm.mu * lap - (prm.lambda + prm.mu) * gd1 + prm.alpha * s * b.y)};
        };
        P.g = [prm, s](Point x, double t) {
            const Bubble b = bubble(x);
            return prm.beta * s * b.v + prm.alpha * (b.x + b.y) - s * t * (prm.K[0] * b.xx + prm.K[1] * b.yy);
        };
    } else {
        P.exact_u = [](Point x, double t) {
            Jet j;
            j.val[0] = t * (x.x * x.x + x.y * x.y);
            j.val[1] = t * (x.x + x.y);
            j.grad[0][0] = 2 * t * x.x;
            j.grad[0][1] = 2 * t * x.y;
            j.grad[1][0] = t;
            j.grad[1][1] = t;
            return j;
        };
        // Lap u = t (4, 0), grad div u = t (2, 0)
        P.f = [prm, s](Point x, double t) {
            const Bubble b = bubble(x);
            return std::array<double, 2>{t * (-4 * prm.mu - 2 * (prm.lambda + prm.mu) + prm.alpha * s * b.x),
                                         t * prm.alpha * s * b.y};
        };
        P.g = [prm, s](Point x, double t) {
            const Bubble b = bubble(x);
            return prm.beta * s * b.v + prm.alpha * (2 * x.x + 1) - s * t * (prm.K[0] * b.xx + prm.K[1] * b.yy);
        };
    }
    return P;
}

ScalarData rhs_tilde_g(const std::function<double(Point, double)>& g, double t, double tau,
                       const BiotParameters& params, const Field& p_prev, const Field& u_prev) {
    if (&p_prev.space().mesh() != &u_prev.space().mesh())
        throw std::invalid_argument("previous fields live on different meshes");
    return [&g, t, tau, beta = params.beta, alpha = params.alpha, &p_prev, &u_prev](int c, const Bary& b, Point x) {
        const double p = evaluate(p_prev, c, b).val[0];
        const double d = evaluate(u_prev, c, b).div[0];
        return tau * g(x, t) + beta * p + alpha * d;
    };
}

}  // namespace biot

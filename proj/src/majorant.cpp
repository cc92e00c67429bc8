#include "biot/majorant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace biot {

namespace {

constexpr int kDataDegree = 8;  // integrands with analytic data
constexpr double kMinWeight = 1e-12;
constexpr double kMaxWeight = 1e12;

// Per-cell constant gradient of a P1 field.
std::array<double, 2> cell_gradient(const Field& f, int c) {
    const FieldPoint v = evaluate(f, c, Bary{1.0 / 3, 1.0 / 3, 1.0 / 3});
    return {v.grad[0][0], v.grad[0][1]};
}

struct Strain {
    double e11, e22, e12, div;
};

Strain strain_at(const FieldPoint& u) {
    return {u.grad[0][0], u.grad[1][1], 0.5 * (u.grad[0][1] + u.grad[1][0]), u.grad[0][0] + u.grad[1][1]};
}

void require_p1(const Field& f, Shape shape, const char* what) {
    if (f.space().family() != Family::P1 || f.space().shape() != shape)
        throw std::invalid_argument(std::string(what) + " must be a P1 field");
}

}  // namespace

double optimal_weight(double A, double B) {
    if (A <= 0.0 && B <= 0.0) return 1.0;
    if (A <= 0.0) return kMaxWeight;
    if (B <= 0.0) return kMinWeight;
    return std::clamp(std::sqrt(B / A), kMinWeight, kMaxWeight);
}

double weighted_total(double A, double B, double w) { return (1.0 + w) * A + (1.0 + 1.0 / w) * B; }

MajorantValue majorant_pressure(const FluxData& data, const Field& z, double zeta) {
    if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
    const Field& p = *data.p_h;
    const Mesh& mesh = p.space().mesh();
    if (&z.space().mesh() != &mesh) throw std::invalid_argument("flux and pressure on different meshes");
    if (z.space().is_lagrange()) throw std::invalid_argument("flux must be an H(div) field");
    require_p1(p, Shape::scalar, "pressure");

    const QuadratureRule& rule = triangle_rule(kDataDegree);
    MajorantValue v;
    v.per_cell.assign(mesh.n_cells(), 0.0);
    BasisPoint B;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto g = cell_gradient(p, c);
        const double area = mesh.cell_area(c);
        double a = 0.0, e = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Bary& b = rule.points[q];
            z.space().evaluate(c, b, B);
            const FieldPoint zv = evaluate(z, c, B);
            const double d0 = zv.val[0] - data.K_tau[0] * g[0];
            const double d1 = zv.val[1] - data.K_tau[1] * g[1];
            a += rule.weights[q] * (d0 * d0 / data.K_tau[0] + d1 * d1 / data.K_tau[1]);
            const double r = data.R0(c, b, mesh.cell_point(c, b)) + zv.div[0];
            e += rule.weights[q] * r * r;
        }
        v.per_cell[c] = area * a;
        v.dual += area * a;
        v.equilibration += area * e;
    }
    v.eta_part = data.D_eta;
    v.weight = zeta;
    v.total = weighted_total(v.dual, data.Cp2 * (2.0 * v.equilibration + v.eta_part + v.boundary), zeta);
    return v;
}

MajorantValue majorant_stress(const StressData& data, const Field& tau, double xi) {
    if (!(xi > 0.0)) throw std::invalid_argument("xi must be positive");
    const Field& u = *data.u_h;
    const Field& p = *data.p_h;
    const Mesh& mesh = u.space().mesh();
    if (&tau.space().mesh() != &mesh || &p.space().mesh() != &mesh)
        throw std::invalid_argument("stress majorant fields on different meshes");
    if (tau.space().shape() != Shape::sym_tensor) throw std::invalid_argument("stress dual must be a tensor field");
    require_p1(u, Shape::vector, "displacement");
    require_p1(p, Shape::scalar, "pressure");

    const double inv2mu = 1.0 / (2.0 * data.mu);
    const double tr = data.lambda / (2.0 * data.lambda + 2.0 * data.mu);
    const QuadratureRule& rule = triangle_rule(kDataDegree);
    MajorantValue v;
    v.per_cell.assign(mesh.n_cells(), 0.0);
    BasisPoint B;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Strain s = strain_at(evaluate(u, c, Bary{1.0 / 3, 1.0 / 3, 1.0 / 3}));
        const double sig[3] = {2 * data.mu * s.e11 + data.lambda * s.div, 2 * data.mu * s.e22 + data.lambda * s.div,
                               2 * data.mu * s.e12};
        const auto gp = cell_gradient(p, c);
        const double area = mesh.cell_area(c);
        double a = 0.0, e = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Bary& b = rule.points[q];
            tau.space().evaluate(c, b, B);
            const FieldPoint tv = evaluate(tau, c, B);
            const double X0 = tv.val[0] - sig[0], X1 = tv.val[1] - sig[1], X2 = tv.val[2] - sig[2];
            a += rule.weights[q] * inv2mu * (X0 * X0 + X1 * X1 + 2 * X2 * X2 - tr * (X0 + X1) * (X0 + X1));
            const auto f = data.f(mesh.cell_point(c, b));
            const double r0 = f[0] - data.alpha * gp[0] + tv.div[0];
            const double r1 = f[1] - data.alpha * gp[1] + tv.div[1];
            e += rule.weights[q] * (r0 * r0 + r1 * r1);
        }
        v.per_cell[c] = area * a;
        v.dual += area * a;
        v.equilibration += area * e;
    }
    v.weight = xi;
    v.total = weighted_total(v.dual, data.Cu2 * (v.equilibration + v.boundary), xi);
    return v;
}

DualSystem flux_system(std::shared_ptr<const Mesh> mesh, Family family, std::array<double, 2> K_tau) {
    if (family != Family::RT0 && family != Family::RT1) throw std::invalid_argument("flux dual must be RT0 or RT1");
    DualSystem s;
    s.space = std::make_shared<const Space>(std::move(mesh), family);
    FormCoefficients k;
    k.K = {1.0 / K_tau[0], 1.0 / K_tau[1]};
    s.mass = assemble_bilinear(BilinearKind::rt_mass, *s.space, *s.space, k);
    // Pad to the union pattern so both matrices combine in place.
    s.divdiv = SparseMatrix::linear_combination(
        1.0, assemble_bilinear(BilinearKind::rt_divdiv, *s.space, *s.space), 0.0, s.mass);
    s.mass = SparseMatrix::linear_combination(1.0, s.mass, 0.0, s.divdiv);
    return s;
}

DualSystem stress_system(std::shared_ptr<const Mesh> mesh, Family family, double mu, double lambda) {
    if (family != Family::P1 && family != Family::P2) throw std::invalid_argument("stress dual must be P1 or P2");
    DualSystem s;
    s.space = std::make_shared<const Space>(std::move(mesh), family, Shape::sym_tensor);
    FormCoefficients k;
    k.mu = mu;
    k.lambda = lambda;
    s.mass = assemble_bilinear(BilinearKind::compliance_mass, *s.space, *s.space, k);
    s.divdiv = SparseMatrix::linear_combination(
        1.0, assemble_bilinear(BilinearKind::tensor_divdiv, *s.space, *s.space), 0.0, s.mass);
    s.mass = SparseMatrix::linear_combination(1.0, s.mass, 0.0, s.divdiv);
    return s;
}

namespace {

// Shared alternating minimisation. `evaluate` returns the majorant of a dual
// field for a weight; `scale` maps the weight to the divdiv factor s, and the
// minimiser solves (mass + s divdiv) y = b1 - s b2.
template <class Eval, class Scale>
Minimization alternate(Field initial, const DualSystem& sys, const Vector& b1, const Vector& b2, int cycles,
                       FactorReuse* reuse, bool reuse_only, Eval evaluate_at, Scale scale) {
    if (cycles < 1) throw std::invalid_argument("at least one optimization cycle is required");
    Minimization out;
    // Weight-free parts first, then the optimal weight for them.
    MajorantValue v = evaluate_at(initial, 1.0);
    double w = optimal_weight(v.dual, v.total - 2.0 * v.dual);  // total(1) = 2 dual + 2 rest
    v = evaluate_at(initial, w);
    out.dual = std::move(initial);
    out.value = v;
    out.cycle_totals.push_back(v.total);

    SpdFactorization local;
    const bool use_cached = reuse_only && reuse && reuse->valid && reuse->factor;
    const int n_solves = use_cached ? 1 : cycles;
    for (int k = 0; k < n_solves; ++k) {
        SpdFactorization* f = reuse && reuse->factor ? reuse->factor : &local;
        double s;
        if (use_cached) {
            s = scale(reuse->weight);
        } else {
            s = scale(w);
            SparseMatrix A = sys.mass;
            A.axpby(1.0, s, sys.divdiv);
            f->factorize(A);
            if (reuse) {
                reuse->weight = w;
                reuse->valid = true;
            }
        }
        Vector rhs(b1.size());
        for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] = b1[j] - s * b2[j];
        Field y(sys.space, f->solve(rhs));
        MajorantValue t = evaluate_at(y, 1.0);
        const double wn = optimal_weight(t.dual, 0.5 * t.total - t.dual);
        t = evaluate_at(y, wn);
        out.cycle_totals.push_back(t.total);
        if (t.total <= out.value.total) {
            out.value = std::move(t);
            out.dual = std::move(y);
            w = wn;
        }
    }
    return out;
}

}  // namespace

Minimization minimize_flux(const FluxData& data, const DualSystem& sys, int cycles, FactorReuse* reuse,
                           bool reuse_only) {
    const Field& p = *data.p_h;
    const Mesh& mesh = p.space().mesh();
    Field z0 = interpolate(sys.space, [&](int c, Point) {
        const auto g = cell_gradient(p, c);
        return std::array<double, 3>{data.K_tau[0] * g[0], data.K_tau[1] * g[1], 0.0};
    });
    const Vector b1 = assemble_linear(
        *sys.space,
        [&](int c, const Bary&, Point) {
            const auto g = cell_gradient(p, c);
            LoadPoint l;
            l.val[0] = g[0];
            l.val[1] = g[1];
            return l;
        },
        sys.space->degree() + 1);
    const Vector b2 = assemble_linear(
        *sys.space,
        [&](int c, const Bary& b, Point x) {
            LoadPoint l;
            l.div[0] = data.R0(c, b, x);
            return l;
        },
        kDataDegree);
    (void)mesh;
    auto eval = [&](const Field& z, double w) { return majorant_pressure(data, z, w); };
    // (1 + 1/zeta)/(1 + zeta) = 1/zeta: divdiv factor 2 Cp2 / zeta
    auto scale = [&](double w) { return 2.0 * data.Cp2 / w; };
    return alternate(std::move(z0), sys, b1, b2, cycles, reuse, reuse_only, eval, scale);
}

Minimization minimize_stress(const StressData& data, const DualSystem& sys, int cycles, FactorReuse* reuse,
                             bool reuse_only) {
    const Field& u = *data.u_h;
    const Field& p = *data.p_h;
    auto sigma = [&](int c) {
        const Strain s = strain_at(evaluate(u, c, Bary{1.0 / 3, 1.0 / 3, 1.0 / 3}));
        return std::array<double, 3>{2 * data.mu * s.e11 + data.lambda * s.div,
                                     2 * data.mu * s.e22 + data.lambda * s.div, 2 * data.mu * s.e12};
    };
    Field t0 = interpolate(sys.space, [&](int c, Point) { return sigma(c); });
    // (A^{-1} sigma_h, psi) = (eps(u_h), psi); the xy entry counts twice.
    const Vector b1 = assemble_linear(
        *sys.space,
        [&](int c, const Bary&, Point) {
            const Strain s = strain_at(evaluate(u, c, Bary{1.0 / 3, 1.0 / 3, 1.0 / 3}));
            LoadPoint l;
            l.val[0] = s.e11;
            l.val[1] = s.e22;
            l.val[2] = 2.0 * s.e12;
            return l;
        },
        2 * sys.space->degree());
    const Vector b2 = assemble_linear(
        *sys.space,
        [&](int c, const Bary&, Point x) {
            const auto f = data.f(x);
            const auto gp = cell_gradient(p, c);
            LoadPoint l;
            l.div[0] = f[0] - data.alpha * gp[0];
            l.div[1] = f[1] - data.alpha * gp[1];
            return l;
        },
        kDataDegree);
    auto eval = [&](const Field& t, double w) {
        MajorantValue v = majorant_stress(data, t, w);
        return v;
    };
    auto scale = [&](double w) { return data.Cu2 / w; };
    return alternate(std::move(t0), sys, b1, b2, cycles, reuse, reuse_only, eval, scale);
}

double pressure_l2_bound(double Mp, double tau, double lambda_K, double C_F, double beta) {
    return Mp / (tau * lambda_K / (C_F * C_F) + beta);
}

DisplacementBounds majorant_displacement(double stress_total, double pressure_l2, double alpha, double mu,
                                         double lambda, int dim, double chi) {
    if (!(lambda > 0.0)) throw std::invalid_argument("displacement bound needs lambda > 0");
    if (chi <= 0.0) chi = 1.0 / lambda;
    if (!(2.0 * chi * lambda > 1.0)) throw std::invalid_argument("chi must satisfy 2 chi lambda > 1");
    DisplacementBounds b;
    b.stress = stress_total;
    b.energy = 2.0 * lambda * chi * chi * alpha * alpha / (2.0 * chi * lambda - 1.0) * pressure_l2 + 2.0 * stress_total;
    b.div = b.energy / (2.0 * mu / dim + lambda);
    return b;
}

const char* to_string(IterMode m) {
    switch (m) {
        case IterMode::consecutive: return "consecutive";
        case IterMode::lag: return "lag";
        case IterMode::tilde: return "tilde";
    }
    return "?";
}

namespace {

double denominator(double x, bool stated) { return stated ? 1.0 - x * x : (1.0 - x) * (1.0 - x); }

double flow_factor(const IterationBoundInputs& in) {
    return in.C_F * in.C_F * in.beta / (in.lambda_K * in.tau) + 1.0;
}

double mechanics_factor(const IterationBoundInputs& in) { return 1.0 + in.dim * in.lambda / (2.0 * in.mu); }

double tilde_bracket(const IterationBoundInputs& in, double eta10_distance2, const IterateSummary& first) {
    const double g2 = in.gamma * in.gamma;
    return in.alpha * in.alpha / g2 * first.div + in.L * in.L / g2 * first.pressure_l2 + in.eta0_discrepancy2 +
           eta10_distance2;
}

}  // namespace

double lag_factor(double q, int m, bool stated_denominator) {
    const double x = std::pow(q, m);
    return x / denominator(x, stated_denominator);
}

double iteration_bracket(const IterationBoundInputs& in, double eta_distance2, const IterateSummary& a,
                         const IterateSummary& b, const IterativeOptions& opt) {
    if (opt.derived_bracket)
        return eta_distance2 + in.alpha * in.alpha / in.L * (a.div + b.div) + in.L * (a.pressure_l2 + b.pressure_l2);
    return eta_distance2 + 0.5 * in.lambda * (a.div + b.div) + 0.25 * in.L * (a.pressure_l2 + b.pressure_l2);
}

double iter_majorant_pressure(const IterationBoundInputs& in, IterMode mode, int i, int m, double eta_distance2,
                              const IterateSummary& a, const IterateSummary& b, double eta10_distance2,
                              const IterateSummary& first, const IterativeOptions& opt) {
    const double Fp = flow_factor(in);
    const bool st = opt.stated_denominator;
    switch (mode) {
        case IterMode::consecutive:
            if (i < 2) throw std::invalid_argument("consecutive bound needs i >= 2");
            return 3.0 * Fp * lag_factor(in.q, 1, st) * iteration_bracket(in, eta_distance2, a, b, opt);
        case IterMode::lag:
            if (m < 1 || m >= i) throw std::invalid_argument("lag bound needs 1 <= m < i");
            return 3.0 * Fp * lag_factor(in.q, m, st) * iteration_bracket(in, eta_distance2, a, b, opt);
        case IterMode::tilde:
            if (i < 1) throw std::invalid_argument("tilde bound needs i >= 1");
            return Fp * 3.0 * std::pow(in.q, 2 * i - 1) / denominator(in.q, st) *
                   tilde_bracket(in, eta10_distance2, first);
    }
    throw std::invalid_argument("unknown mode");
}

double iter_majorant_displacement(const IterationBoundInputs& in, IterMode mode, int i, int m, double eta_distance2,
                                  const IterateSummary& a, const IterateSummary& b, double eta10_distance2,
                                  const IterateSummary& first, const IterativeOptions& opt) {
    const double Fu = mechanics_factor(in);
    const bool st = opt.stated_denominator;
    switch (mode) {
        case IterMode::consecutive:
            if (i < 2) throw std::invalid_argument("consecutive bound needs i >= 2");
            return Fu * 3.0 * in.q * in.q / denominator(in.q, st) * iteration_bracket(in, eta_distance2, a, b, opt);
        case IterMode::lag: {
            if (m < 1 || m >= i) throw std::invalid_argument("lag bound needs 1 <= m < i");
            const double x = std::pow(in.q, m);
            return Fu * 3.0 * x * x / denominator(x, st) * iteration_bracket(in, eta_distance2, a, b, opt);
        }
        case IterMode::tilde:
            if (i < 1) throw std::invalid_argument("tilde bound needs i >= 1");
            return Fu * 3.0 * std::pow(in.q, 2 * i) / denominator(in.q, st) *
                   tilde_bracket(in, eta10_distance2, first);
    }
    throw std::invalid_argument("unknown mode");
}

ErrorSet exact_errors(const Field& p_h, const Field& u_h, const ProblemDefinition& problem, double t, double tau) {
    const Mesh& mesh = p_h.space().mesh();
    if (&u_h.space().mesh() != &mesh) throw std::invalid_argument("fields on different meshes");
    const BiotParameters& k = problem.params;
    const QuadratureRule& rule = triangle_rule(kDataDegree);
    ErrorSet e;
    e.per_cell_p.assign(mesh.n_cells(), 0.0);
    e.per_cell_u.assign(mesh.n_cells(), 0.0);
    BasisPoint Bp, Bu;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const double area = mesh.cell_area(c);
        double gp = 0, pb = 0, pl = 0, st = 0, dv = 0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Bary& b = rule.points[q];
            const Point x = mesh.cell_point(c, b);
            p_h.space().evaluate(c, b, Bp);
            u_h.space().evaluate(c, b, Bu);
            const FieldPoint ph = evaluate(p_h, c, Bp);
            const FieldPoint uh = evaluate(u_h, c, Bu);
            const Jet P = problem.exact_p(x, t);
            const Jet U = problem.exact_u(x, t);
            const double w = rule.weights[q];
            const double ep = P.val[0] - ph.val[0];
            const double ex = P.grad[0][0] - ph.grad[0][0], ey = P.grad[0][1] - ph.grad[0][1];
            gp += w * tau * (k.K[0] * ex * ex + k.K[1] * ey * ey);
            pl += w * ep * ep;
            const double e11 = U.grad[0][0] - uh.grad[0][0], e22 = U.grad[1][1] - uh.grad[1][1];
            const double e12 = 0.5 * (U.grad[0][1] - uh.grad[0][1] + U.grad[1][0] - uh.grad[1][0]);
            st += w * (e11 * e11 + e22 * e22 + 2 * e12 * e12);
            dv += w * (e11 + e22) * (e11 + e22);
        }
        gp *= area;
        pl *= area;
        pb = k.beta * pl;
        st *= 2.0 * k.mu * area;
        dv *= area;
        e.grad_p += gp;
        e.p_beta += pb;
        e.p_l2 += pl;
        e.strain += st;
        e.div_l2 += dv;
        e.div_lambda += k.lambda * dv;
        e.per_cell_p[c] = gp + pb;
        e.per_cell_u[c] = st + k.lambda * dv;
    }
    e.e_p = e.grad_p + e.p_beta;
    e.e_u = e.strain + e.div_lambda;
    e.combined = e.e_p + e.e_u;
    return e;
}

std::pair<double, double> exact_norms(const Mesh& mesh, const ProblemDefinition& problem, double t, double tau) {
    const BiotParameters& k = problem.params;
    const double np = integrate(
                          mesh,
                          [&](int, const Bary&, Point x) {
                              const Jet P = problem.exact_p(x, t);
                              return tau * (k.K[0] * P.grad[0][0] * P.grad[0][0] +
                                            k.K[1] * P.grad[0][1] * P.grad[0][1]) +
                                     k.beta * P.val[0] * P.val[0];
                          },
                          kDataDegree)
                          .total;
    const double nu = integrate(
                          mesh,
                          [&](int, const Bary&, Point x) {
                              const Jet U = problem.exact_u(x, t);
                              const double e12 = 0.5 * (U.grad[0][1] + U.grad[1][0]);
                              const double d = U.grad[0][0] + U.grad[1][1];
                              return 2.0 * k.mu *
                                         (U.grad[0][0] * U.grad[0][0] + U.grad[1][1] * U.grad[1][1] + 2 * e12 * e12) +
                                     k.lambda * d * d;
                          },
                          kDataDegree)
                          .total;
    return {np, nu};
}

MajorantEvaluator::MajorantEvaluator(const Discretization& d, MajorantOptions options)
    : d_(d), options_(options) {
    const BiotParameters& k = d.params();
    const double tau = d.grid.tau();
    flux_ = flux_system(d.mesh, options_.flux_family, {tau * k.K[0], tau * k.K[1]});
    stress_ = stress_system(d.mesh, options_.stress_family, k.mu, k.lambda);
    flux_reuse_.factor = &flux_factor_;
    stress_reuse_.factor = &stress_factor_;
    if (options_.cycles < 1) throw std::invalid_argument("at least one optimization cycle is required");
}

IterationBoundInputs MajorantEvaluator::bound_inputs() const {
    const BiotParameters& k = d_.params();
    const TuningConstants& c = d_.constants;
    IterationBoundInputs in;
    in.q = c.q;
    in.L = c.L;
    in.gamma = c.gamma;
    in.alpha = k.alpha;
    in.beta = k.beta;
    in.mu = k.mu;
    in.lambda = k.lambda;
    in.dim = k.dim;
    in.tau = d_.grid.tau();
    in.lambda_K = c.lambda_K;
    in.C_F = c.C_F;
    in.eta0_discrepancy2 = options_.eta0_discrepancy2;
    return in;
}

int MajorantEvaluator::lag_for(int I) const {
    int m = options_.lag_m > 0 ? options_.lag_m : (I + 1) / 2;
    return m;
}

double MajorantEvaluator::eta_term(int i, const IterateBounds* first) const {
    const TuningConstants& c = d_.constants;
    const double g2 = c.gamma * c.gamma;
    const double e0 = options_.eta0_discrepancy2;
    if (options_.eta_mode == EtaMode::contraction || i == 1) return 2.0 * g2 * std::pow(c.q, 2 * (i - 1)) * e0;
    if (!first) throw std::logic_error("eta term needs the first iterate");
    // ||eta^{i-1} - eta^{i-1}_h|| <= Cq (a/g sqrt(M_div(1)) + L/g sqrt(M_L2(1))) + (Cq + 1) ||eta^0 - eta^0_h||
    const double Cq = contraction_sum(c.q, i - 1);
    const double a = d_.params().alpha / c.gamma * std::sqrt(first->displacement.div) +
                     c.L / c.gamma * std::sqrt(first->pressure_l2);
    const double s = Cq * a + (Cq + 1.0) * std::sqrt(e0);
    return 2.0 * g2 * s * s;
}

IterateBounds MajorantEvaluator::evaluate_iterate(const IterationHistory& h, int i, const IterateBounds* first,
                                                  bool reuse) {
    const ProblemDefinition& P = *d_.problem;
    const BiotParameters& k = P.params;
    const TuningConstants& c = d_.constants;
    const IterationState& s = h.state(i);
    const IterationState& before = h.state(i - 1);

    IterateBounds out;
    out.i = i;

    ScalarData gt;
    if (options_.previous_data == MajorantOptions::PreviousData::discrete) {
        gt = rhs_tilde_g(P.g, h.t, h.tau, k, h.p_prev, h.u_prev);
    } else {
        const double t0 = h.t - h.tau;
        gt = [&P, &h, &k, t0](int, const Bary&, Point x) {
            const Jet p = P.exact_p(x, t0), u = P.exact_u(x, t0);
            return h.tau * P.g(x, h.t) + k.beta * p.val[0] + k.alpha * (u.grad[0][0] + u.grad[1][1]);
        };
    }
    FluxData fd;
    fd.p_h = &s.p;
    fd.K_tau = {h.tau * k.K[0], h.tau * k.K[1]};
    fd.Cp2 = c.Cp2;
    fd.D_eta = eta_term(i, first);
    fd.R0 = [&](int cell, const Bary& b, Point x) {
        return gt(cell, b, x) - c.gamma * before.eta(cell, b) - (k.beta + c.L) * evaluate(s.p, cell, b).val[0];
    };
    Minimization fm = minimize_flux(fd, flux_, options_.cycles, &flux_reuse_, reuse);
    out.pressure = std::move(fm.value);
    out.flux_cycles = std::move(fm.cycle_totals);
    out.pressure_l2 = pressure_l2_bound(out.pressure.total, h.tau, c.lambda_K, c.C_F, k.beta);

    StressData sd;
    sd.u_h = &s.u;
    sd.p_h = &s.p;
    sd.f = [&](Point x) { return P.f(x, h.t); };
    sd.alpha = k.alpha;
    sd.mu = k.mu;
    sd.lambda = k.lambda;
    sd.Cu2 = c.Cu2;
    Minimization sm = minimize_stress(sd, stress_, options_.cycles, &stress_reuse_, reuse);
    out.stress = std::move(sm.value);
    out.stress_cycles = std::move(sm.cycle_totals);
    out.displacement =
        majorant_displacement(out.stress.total, out.pressure_l2, k.alpha, k.mu, k.lambda, k.dim, options_.chi);
    return out;
}

StepReport MajorantEvaluator::evaluate_step(const IterationHistory& h) {
    const int I = h.final_state().i;
    StepReport r;
    r.n = h.n;
    r.t = h.t;
    r.I = I;
    r.m = std::min(lag_for(I), std::max(I - 1, 1));
    r.ratios = h.ratios;

    // Iterates needed by the requested bounds.
    std::vector<int> need{I};
    const bool want_cons = options_.modes[0] && I >= 2;
    const bool want_lag = options_.modes[1] && I >= 2;
    const bool want_tilde = options_.modes[2];
    if (want_cons) need.push_back(I - 1);
    if (want_lag) need.push_back(I - r.m);
    if (want_tilde || options_.eta_mode == EtaMode::lemma_Mq) need.push_back(1);
    std::sort(need.begin(), need.end());
    need.erase(std::unique(need.begin(), need.end()), need.end());

    std::vector<IterateBounds> cache;
    cache.reserve(need.size() + 1);
    auto find = [&](int i) -> const IterateBounds* {
        for (const auto& b : cache)
            if (b.i == i) return &b;
        return nullptr;
    };
    // The primary evaluation minimises fully; the rest may reuse its schedule.
    const int primary = options_.eta_mode == EtaMode::lemma_Mq ? 1 : I;
    flux_reuse_.valid = false;
    stress_reuse_.valid = false;
    cache.push_back(evaluate_iterate(h, primary, nullptr, false));
    for (int i : need) {
        if (i == primary) continue;
        cache.push_back(evaluate_iterate(h, i, find(1), options_.reuse_schedule));
    }
    const IterateBounds& fin = *find(I);
    r.final_bounds = fin;

    const IterationBoundInputs in = bound_inputs();
    const Mesh& mesh = *d_.mesh;
    auto summary = [&](int i) {
        const IterateBounds* b = find(i);
        return IterateSummary{i, b->pressure_l2, b->displacement.div};
    };
    const double eta10 = find(1) ? broken_distance2(h.state(1).eta, h.state(0).eta, mesh) : 0.0;
    const IterateSummary first = find(1) ? summary(1) : IterateSummary{};
    const IterativeOptions& opt = options_.iterative;
    if (want_cons) {
        const double d2 = broken_distance2(h.state(I).eta, h.state(I - 1).eta, mesh);
        r.iter_p[0] = iter_majorant_pressure(in, IterMode::consecutive, I, 1, d2, summary(I), summary(I - 1), eta10,
                                             first, opt);
        r.iter_u[0] = iter_majorant_displacement(in, IterMode::consecutive, I, 1, d2, summary(I), summary(I - 1),
                                                 eta10, first, opt);
        r.iter_available[0] = true;
    }
    if (want_lag) {
        const double d2 = broken_distance2(h.state(I).eta, h.state(I - r.m).eta, mesh);
        r.iter_p[1] = iter_majorant_pressure(in, IterMode::lag, I, r.m, d2, summary(I), summary(I - r.m), eta10,
                                             first, opt);
        r.iter_u[1] = iter_majorant_displacement(in, IterMode::lag, I, r.m, d2, summary(I), summary(I - r.m), eta10,
                                                 first, opt);
        r.iter_available[1] = true;
    }
    if (want_tilde) {
        r.iter_p[2] = iter_majorant_pressure(in, IterMode::tilde, I, 0, 0.0, first, first, eta10, first, opt);
        r.iter_u[2] = iter_majorant_displacement(in, IterMode::tilde, I, 0, 0.0, first, first, eta10, first, opt);
        r.iter_available[2] = true;
    }
    bool any = false;
    double min_p = 0.0, min_u = 0.0;
    for (int k = 0; k < kIterModes; ++k) {
        if (!r.iter_available[k]) continue;
        min_p = any ? std::min(min_p, r.iter_p[k]) : r.iter_p[k];
        min_u = any ? std::min(min_u, r.iter_u[k]) : r.iter_u[k];
        any = true;
    }
    if (!any) throw std::invalid_argument("no iteration bound available to combine");
    r.M_p = 2.0 * (fin.pressure.total + min_p);
    r.M_u = 2.0 * (fin.displacement.energy + min_u);
    r.M = r.M_p + r.M_u;
    if (r.iter_available[0]) {
        r.M_p_consecutive = 2.0 * (fin.pressure.total + r.iter_p[0]);
        r.M_u_consecutive = 2.0 * (fin.displacement.energy + r.iter_u[0]);
    }

    r.errors = exact_errors(h.final_state().p, h.final_state().u, *d_.problem, h.t, h.tau);
    std::tie(r.norm_p, r.norm_u) = exact_norms(mesh, *d_.problem, h.t, h.tau);
    r.indicator_p = fin.pressure.per_cell;
    r.indicator_u = fin.stress.per_cell;
    std::sort(cache.begin(), cache.end(), [](const IterateBounds& a, const IterateBounds& b) { return a.i < b.i; });
    r.evaluated = std::move(cache);
    return r;
}

void Accumulated::add(const StepReport& r) {
    ++steps;
    e_p += r.errors.e_p;
    e_u += r.errors.e_u;
    combined += r.errors.combined;
    norm_p += r.norm_p;
    norm_u += r.norm_u;
    Mh_p += r.final_bounds.pressure.total;
    Mh_u += r.final_bounds.displacement.energy;
    Mh_p_l2 += r.final_bounds.pressure_l2;
    Mh_u_div += r.final_bounds.displacement.div;
    M_p += r.M_p;
    M_u += r.M_u;
    M += r.M;
    M_consecutive += r.M_p_consecutive + r.M_u_consecutive;
    M_p_consecutive += r.M_p_consecutive;
    M_u_consecutive += r.M_u_consecutive;
    for (int k = 0; k < kIterModes; ++k) {
        iter_p[k] += r.iter_p[k];
        iter_u[k] += r.iter_u[k];
    }
    p_l2 += r.errors.p_l2;
    div_l2 += r.errors.div_l2;
    for (double q : r.ratios) max_ratio = std::max(max_ratio, q);
}

double efficiency(double bound, double error) {
    if (error <= 0.0) return bound <= 0.0 ? 1.0 : INFINITY;
    return std::sqrt(bound / error);
}

}  // namespace biot

#include "biot/solver.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace biot {

namespace {

std::array<double, 3> as3(const Jet& j) { return {j.val[0], j.val[1], j.val[2]}; }

Vector boundary_at(const Space& S, const std::vector<int>& dofs, const SpaceTimeJet& exact, double t) {
    return boundary_values(S, dofs, [&](Point x) { return as3(exact(x, t)); });
}

Field difference(const Field& a, const Field& b) {
    Vector c = a.coeffs();
    for (std::size_t k = 0; k < c.size(); ++k) c[k] -= b.coeffs()[k];
    return Field(a.space_ptr(), std::move(c));
}

}  // namespace

Discretization::Discretization(const ProblemDefinition& prob, std::shared_ptr<const Mesh> m, const TimeGrid& g,
                               const TuningConstants& c, SolveControls lin)
    : problem(&prob), mesh(std::move(m)), grid(g), constants(c), linear(lin) {
    const BiotParameters& k = prob.params;
    k.validate();
    if (!boundary_facets(*mesh, Variable::p, BcKind::neumann).empty() ||
        !boundary_facets(*mesh, Variable::u, BcKind::neumann).empty())
        throw std::invalid_argument("Neumann boundaries are not supported by the solver");

    p_space = std::make_shared<const Space>(mesh, Family::P1, Shape::scalar);
    u_space = std::make_shared<const Space>(mesh, Family::P1, Shape::vector);

    mass = assemble_bilinear(BilinearKind::mass, *p_space, *p_space);
    div = assemble_bilinear(BilinearKind::div_coupling, *u_space, *p_space);
    grad = assemble_bilinear(BilinearKind::grad_coupling, *p_space, *u_space);

    FormCoefficients fc;
    fc.K = {grid.tau() * k.K[0], grid.tau() * k.K[1]};
    SparseMatrix stiff = assemble_bilinear(BilinearKind::stiffness, *p_space, *p_space, fc);
    p_dofs = facet_dofs(*p_space, boundary_facets(*mesh, Variable::p, BcKind::dirichlet));
    flow = ConstrainedOperator(SparseMatrix::linear_combination(1.0, stiff, k.beta + c.L, mass), p_dofs);

    FormCoefficients ec;
    ec.mu = k.mu;
    ec.lambda = k.lambda;
    u_dofs = facet_dofs(*u_space, boundary_facets(*mesh, Variable::u, BcKind::dirichlet));
    mechanics = ConstrainedOperator(assemble_bilinear(BilinearKind::elasticity, *u_space, *u_space, ec), u_dofs);
}

const IterationState& IterationHistory::state(int i) const {
    for (const auto& s : states)
        if (s.i == i) return s;
    throw std::out_of_range("iterate " + std::to_string(i) + " of step " + std::to_string(n) + " not stored");
}

BrokenP1 compute_eta(const Field& u, const Field& p, const BiotParameters& params, const TuningConstants& c) {
    const Mesh& m = u.space().mesh();
    if (&m != &p.space().mesh()) throw std::invalid_argument("eta: fields on different meshes");
    BrokenP1 eta;
    eta.values.resize(3 * static_cast<std::size_t>(m.n_cells()));
    const double a = params.alpha / c.gamma, b = c.L / c.gamma;
    for (int cell = 0; cell < m.n_cells(); ++cell) {
        for (int k = 0; k < 3; ++k) {
            Bary bc{0, 0, 0};
            bc[k] = 1.0;
            eta.values[3 * cell + k] = a * evaluate(u, cell, bc).div[0] - b * evaluate(p, cell, bc).val[0];
        }
    }
    return eta;
}

double broken_distance2(const BrokenP1& a, const BrokenP1& b, const Mesh& mesh) {
    // Exact for linears: area/12 * (sum d_k^2 + (sum d_k)^2)
    double s = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        double d[3], sum = 0.0, sq = 0.0;
        for (int k = 0; k < 3; ++k) {
            d[k] = a.values[3 * c + k] - b.values[3 * c + k];
            sum += d[k];
            sq += d[k] * d[k];
        }
        s += mesh.cell_area(c) / 12.0 * (sq + sum * sum);
    }
    return s;
}

Vector eta_load(const Discretization& d, const Field& u, const Field& p) {
    Vector a = d.div * u.coeffs();
    Vector b = d.mass * p.coeffs();
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = d.params().alpha * a[k] - d.constants.L * b[k];
    return a;
}

Field flow_step(const Discretization& d, const Vector& load, const Vector& boundary, const Field& guess) {
    Vector rhs = d.flow.rhs(load, boundary);
    return Field(d.p_space, solve_spd(d.flow.matrix(), rhs, d.linear, guess.coeffs()).x);
}

Field mechanics_step(const Discretization& d, const Vector& f_load, const Field& p, const Vector& boundary,
                     const Field& guess) {
    Vector load = d.grad * p.coeffs();
    for (std::size_t k = 0; k < load.size(); ++k) load[k] = f_load[k] - d.params().alpha * load[k];
    Vector rhs = d.mechanics.rhs(load, boundary);
    return Field(d.u_space, solve_spd(d.mechanics.matrix(), rhs, d.linear, guess.coeffs()).x);
}

std::pair<Field, Field> initial_fields(const Discretization& d) {
    const ProblemDefinition& P = *d.problem;
    Field p = interpolate(d.p_space, [&](int, Point x) { return as3(P.exact_p(x, 0.0)); });
    Field u = interpolate(d.u_space, [&](int, Point x) { return as3(P.exact_u(x, 0.0)); });
    return {std::move(p), std::move(u)};
}

IterationHistory fixed_stress_timestep(const Discretization& d, int n, const Field& p_prev, const Field& u_prev,
                                       const SolverControls& controls) {
    if (controls.max_iterations < 1) throw std::invalid_argument("at least one iteration is required");
    const ProblemDefinition& P = *d.problem;
    const BiotParameters& k = P.params;
    const TuningConstants& c = d.constants;
    const Mesh& mesh = *d.mesh;

    IterationHistory h;
    h.n = n;
    h.t = d.grid.time(n);
    h.tau = d.grid.tau();
    h.p_prev = p_prev;
    h.u_prev = u_prev;

    // (g~, w) = tau (g, w) + beta (p_prev, w) + alpha (div u_prev, w)
    Vector flow_base = assemble_linear(
        *d.p_space, [&](int, const Bary&, Point x) { LoadPoint l; l.val[0] = h.tau * P.g(x, h.t); return l; }, 8);
    {
        Vector mp = d.mass * p_prev.coeffs();
        Vector du = d.div * u_prev.coeffs();
        for (std::size_t i = 0; i < flow_base.size(); ++i) flow_base[i] += k.beta * mp[i] + k.alpha * du[i];
    }
    const Vector f_load = assemble_linear(
        *d.u_space,
        [&](int, const Bary&, Point x) {
            const auto f = P.f(x, h.t);
            LoadPoint l;
            l.val[0] = f[0];
            l.val[1] = f[1];
            return l;
        },
        8);
    const Vector p_bc = boundary_at(*d.p_space, d.p_dofs, P.exact_p, h.t);
    const Vector u_bc = boundary_at(*d.u_space, d.u_dofs, P.exact_u, h.t);

    IterationState prev;
    prev.i = 0;
    if (controls.initial_guess == InitialGuess::previous_step) {
        prev.p = p_prev;
        prev.u = u_prev;
    } else {
        prev.p = Field(d.p_space);
        prev.u = Field(d.u_space);
    }
    prev.eta = compute_eta(prev.u, prev.p, k, c);
    h.states.push_back(prev);

    NormCoefficients pk;
    pk.K = {h.tau * k.K[0], h.tau * k.K[1]};
    NormCoefficients uk;
    uk.mu = k.mu;

    double last_delta = -1.0;
    for (int i = 1; i <= controls.max_iterations; ++i) {
        const IterationState& before = h.states.back();
        Vector load = eta_load(d, before.u, before.p);
        for (std::size_t j = 0; j < load.size(); ++j) load[j] = flow_base[j] - load[j];

        IterationState s;
        s.i = i;
        try {
            s.p = flow_step(d, load, p_bc, before.p);
            s.u = mechanics_step(d, f_load, s.p, u_bc, before.u);
        } catch (const SolveError& e) {
            throw SolveError("step " + std::to_string(n) + ", iteration " + std::to_string(i) + ": " + e.what(),
                             e.residual());
        }
        s.eta = compute_eta(s.u, s.p, k, c);
        s.delta_eta_norm = std::sqrt(broken_distance2(s.eta, before.eta, mesh));
        s.delta_p_energy = weighted_norm(NormKind::grad_K, difference(s.p, before.p), pk, nullptr, 2).total;
        s.delta_u_energy = weighted_norm(NormKind::strain_2mu, difference(s.u, before.u), uk, nullptr, 2).total;

        if (last_delta > 0.0) {
            const double r = s.delta_eta_norm / last_delta;
            h.ratios.push_back(r);
            if (r > c.q + 1e-10) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "step %d, iteration %d: contraction ratio %.6e exceeds q = %.6e", n, i,
                              r, c.q);
                h.warnings.emplace_back(buf);
            }
        } else if (last_delta == 0.0) {
            h.ratios.push_back(0.0);
        }
        last_delta = s.delta_eta_norm;

        if (!controls.store_all_iterates && h.states.size() > 1) h.states.erase(h.states.begin() + 1);
        h.states.push_back(std::move(s));
        if (controls.eta_tolerance > 0.0 && last_delta <= controls.eta_tolerance) {
            h.converged = true;
            break;
        }
    }
    if (controls.eta_tolerance == 0.0) h.converged = true;
    return h;
}

std::vector<IterationHistory> run_transient(const Discretization& d, const SolverControls& controls,
                                            const StepObserver& observer, bool keep_iterates) {
    auto [p, u] = initial_fields(d);
    std::vector<IterationHistory> out;
    for (int n = 1; n <= d.grid.N; ++n) {
        IterationHistory h = fixed_stress_timestep(d, n, p, u, controls);
        if (observer) observer(h);
        p = h.final_state().p;
        u = h.final_state().u;
        if (!keep_iterates) {
            IterationState last = h.final_state();
            h.states.erase(h.states.begin() + 1, h.states.end());
            h.states.push_back(std::move(last));
        }
        out.push_back(std::move(h));
    }
    return out;
}

}  // namespace biot

#include <gtest/gtest.h>

#include <cmath>

#include "biot/solver.hpp"

using namespace biot;

namespace {

std::shared_ptr<const Mesh> square(int n, Pattern pat = Pattern::crisscross) {
    return std::make_shared<const Mesh>(build_uniform_mesh({0, 0}, {1, 1}, n, n, pat));
}

ProblemDefinition zero_problem() {
    ProblemDefinition P = manufactured_case(CaseName::ex1, Variant::simplified);
    P.name = "zero";
    P.exact_p = [](Point, double) { return Jet{}; };
    P.exact_u = [](Point, double) { return Jet{}; };
    P.f = [](Point, double) { return std::array<double, 2>{0, 0}; };
    P.g = [](Point, double) { return 0.0; };
    return P;
}

struct Problem {
    ProblemDefinition P;
    std::shared_ptr<const Mesh> mesh;
    TuningConstants c;
    std::unique_ptr<Discretization> d;

    Problem(ProblemDefinition prob, int n, int N) : P(std::move(prob)), mesh(square(n)) {
        c = derived_constants(P.params, mesh->lo, mesh->hi, TuningMode::optimal);
        d = std::make_unique<Discretization>(P, mesh, TimeGrid(P.T, N), c);
    }
};

bool same(const Field& a, const Field& b) { return a.coeffs() == b.coeffs(); }

}  // namespace

TEST(Eta, LinearDisplacement) {
    auto P = manufactured_case(CaseName::ex1, Variant::simplified);
    auto mesh = square(4);
    auto c = derived_constants(P.params, mesh->lo, mesh->hi, TuningMode::optimal);
    auto ps = std::make_shared<const Space>(mesh, Family::P1);
    auto us = std::make_shared<const Space>(mesh, Family::P1, Shape::vector);
    Field u = interpolate(us, [](int, Point x) { return std::array<double, 3>{x.x, x.y, 0}; });
    Field p(ps);
    BrokenP1 eta = compute_eta(u, p, P.params, c);
    EXPECT_NEAR(c.gamma, std::sqrt(0.6), 1e-15);
    for (double v : eta.values) EXPECT_NEAR(v, 2.0 / std::sqrt(0.6), 1e-12);
    EXPECT_NEAR(2.0 / std::sqrt(0.6), 2.582, 1e-3);

    BrokenP1 zero = compute_eta(Field(us), p, P.params, c);
    for (double v : zero.values) EXPECT_EQ(v, 0.0);

    // linearity
    Field pl = interpolate(ps, [](int, Point x) { return std::array<double, 3>{x.x - x.y, 0, 0}; });
    Field u2 = u, p2 = pl;
    for (double& v : u2.coeffs()) v *= 2;
    for (double& v : p2.coeffs()) v *= 2;
    BrokenP1 a = compute_eta(u, pl, P.params, c), b = compute_eta(u2, p2, P.params, c);
    for (std::size_t k = 0; k < a.values.size(); ++k) EXPECT_NEAR(b.values[k], 2 * a.values[k], 1e-13);
}

TEST(Eta, BrokenDistanceExact) {
    auto mesh = std::make_shared<const Mesh>(make_mesh({{0, 0}, {2, 0}, {0, 1}}, {{0, 1, 2}}));
    BrokenP1 a{{1, 2, 3}}, b{{0, 0, 0}};
    // area/12 (sum d^2 + (sum d)^2) = 1/12 (14 + 36)
    EXPECT_NEAR(broken_distance2(a, b, *mesh), 50.0 / 12.0, 1e-14);
}

TEST(Steps, ZeroProblem) {
    Problem s(zero_problem(), 4, 2);
    const Discretization& d = *s.d;
    Vector zp(d.p_space->n_dofs(), 0.0), zu(d.u_space->n_dofs(), 0.0);
    Field p = flow_step(d, zp, zp, Field(d.p_space));
    for (double v : p.coeffs()) EXPECT_EQ(v, 0.0);
    Field u = mechanics_step(d, zu, p, zu, Field(d.u_space));
    for (double v : u.coeffs()) EXPECT_EQ(v, 0.0);

    auto [p0, u0] = initial_fields(d);
    IterationHistory h = fixed_stress_timestep(d, 1, p0, u0, SolverControls{});
    EXPECT_TRUE(h.converged);
    EXPECT_EQ(h.states.size(), 6u);
    EXPECT_EQ(h.states[1].delta_eta_norm, 0.0);
    EXPECT_TRUE(h.warnings.empty());
}

TEST(Steps, PressureGradientLoad) {
    // alpha (grad p, v) with p = x equals alpha times the x-row of the vector mass action on ones
    Problem s(manufactured_case(CaseName::ex1, Variant::simplified), 3, 1);
    const Discretization& d = *s.d;
    Field p = interpolate(d.p_space, [](int, Point x) { return std::array<double, 3>{x.x, 0, 0}; });
    Vector gp = d.grad * p.coeffs();
    Vector ref = assemble_linear(*d.u_space, [](int, const Bary&, Point) { LoadPoint l; l.val[0] = 1; return l; }, 2);
    ASSERT_EQ(gp.size(), ref.size());
    for (std::size_t k = 0; k < gp.size(); ++k) EXPECT_NEAR(gp[k], ref[k], 1e-14);
}

TEST(Steps, EtaLoadMatchesQuadrature) {
    Problem s(manufactured_case(CaseName::ex2, Variant::simplified), 3, 1);
    const Discretization& d = *s.d;
    Field u = interpolate(d.u_space, [](int, Point x) { return std::array<double, 3>{x.x * x.y, x.y * x.y - x.x, 0}; });
    Field p = interpolate(d.p_space, [](int, Point x) { return std::array<double, 3>{std::sin(x.x + 2 * x.y), 0, 0}; });
    BrokenP1 eta = compute_eta(u, p, s.P.params, s.c);
    Vector ref = assemble_linear(
        *d.p_space, [&](int c, const Bary& b, Point) { LoadPoint l; l.val[0] = s.c.gamma * eta(c, b); return l; }, 2);
    Vector got = eta_load(d, u, p);
    for (std::size_t k = 0; k < got.size(); ++k) EXPECT_NEAR(got[k], ref[k], 1e-13);
}

TEST(Transient, Contraction) {
    for (CaseName name : {CaseName::ex1, CaseName::ex2}) {
        Problem s(manufactured_case(name, Variant::simplified), 8, 3);
        SolverControls sc;
        sc.max_iterations = 6;
        run_transient(*s.d, sc, [&](const IterationHistory& h) {
            EXPECT_EQ(h.ratios.size(), 5u);
            for (double r : h.ratios) EXPECT_LE(r, s.c.q + 1e-10);
            EXPECT_TRUE(h.warnings.empty());
            // discrete bound: flux and strain increments against the previous eta increment
            for (std::size_t k = 2; k < h.states.size(); ++k) {
                const double de2 = std::pow(h.states[k - 1].delta_eta_norm, 2);
                EXPECT_LE(h.states[k].delta_p_energy, s.c.q * de2 * (1 + 1e-8) + 1e-30);
                EXPECT_LE(h.states[k].delta_u_energy, s.c.q * s.c.q * de2 * (1 + 1e-8) + 1e-30);
            }
        });
    }
}

TEST(Transient, SingleStepEqualsTimestep) {
    Problem s(manufactured_case(CaseName::ex1, Variant::simplified), 4, 1);
    auto runs = run_transient(*s.d, SolverControls{});
    auto [p0, u0] = initial_fields(*s.d);
    IterationHistory h = fixed_stress_timestep(*s.d, 1, p0, u0, SolverControls{});
    ASSERT_EQ(runs.size(), 1u);
    EXPECT_TRUE(same(runs[0].final_state().p, h.final_state().p));
    EXPECT_TRUE(same(runs[0].final_state().u, h.final_state().u));
    EXPECT_EQ(runs[0].states.size(), 2u);
}

TEST(Transient, Deterministic) {
    Problem a(manufactured_case(CaseName::ex2, Variant::simplified), 4, 3);
    Problem b(manufactured_case(CaseName::ex2, Variant::simplified), 4, 3);
    auto ra = run_transient(*a.d, SolverControls{}, {}, true);
    auto rb = run_transient(*b.d, SolverControls{}, {}, true);
    for (std::size_t n = 0; n < ra.size(); ++n) {
        ASSERT_EQ(ra[n].states.size(), rb[n].states.size());
        for (std::size_t i = 0; i < ra[n].states.size(); ++i) {
            EXPECT_TRUE(same(ra[n].states[i].p, rb[n].states[i].p));
            EXPECT_EQ(ra[n].states[i].delta_eta_norm, rb[n].states[i].delta_eta_norm);
        }
        EXPECT_EQ(ra[n].ratios, rb[n].ratios);
    }
}

TEST(Transient, ToleranceStop) {
    Problem s(manufactured_case(CaseName::ex1, Variant::simplified), 4, 1);
    SolverControls sc;
    sc.max_iterations = 50;
    sc.eta_tolerance = 1e-8;
    auto [p0, u0] = initial_fields(*s.d);
    IterationHistory h = fixed_stress_timestep(*s.d, 1, p0, u0, sc);
    EXPECT_TRUE(h.converged);
    EXPECT_LT(h.states.size(), 51u);
    EXPECT_LE(h.final_state().delta_eta_norm, 1e-8);
    EXPECT_THROW(h.state(100), std::out_of_range);
}

TEST(Transient, ColdStartStartsFromZero) {
    Problem s(manufactured_case(CaseName::ex1, Variant::simplified), 4, 2);
    SolverControls sc;
    sc.initial_guess = InitialGuess::zero;
    auto runs = run_transient(*s.d, sc, {}, true);
    for (double v : runs[1].states[0].p.coeffs()) EXPECT_EQ(v, 0.0);
    for (double v : runs[1].states[0].eta.values) EXPECT_EQ(v, 0.0);
}

TEST(Transient, RejectsNeumannBoundary) {
    auto P = manufactured_case(CaseName::ex1, Variant::simplified);
    Mesh m = build_uniform_mesh({0, 0}, {1, 1}, 2, 2);
    for (int f : boundary_facets(m, Variable::p, BcKind::dirichlet)) {
        const auto& v = m.facets[f];
        if (m.vertices[v[0]].x == 0.0 && m.vertices[v[1]].x == 0.0) set_boundary_tag(m, f, Variable::p, BcKind::neumann);
    }
    auto mesh = std::make_shared<const Mesh>(std::move(m));
    auto c = derived_constants(P.params, mesh->lo, mesh->hi, TuningMode::optimal);
    EXPECT_THROW(Discretization(P, mesh, TimeGrid(1, 1), c), std::invalid_argument);
}

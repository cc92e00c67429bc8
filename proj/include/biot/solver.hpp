#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "biot/fem.hpp"
#include "biot/linalg.hpp"
#include "biot/model.hpp"

namespace biot {

// Spaces, cached matrices and constraints shared by every time step.
// Pressure is P1, displacement is vector P1.
struct Discretization {
    Discretization(const ProblemDefinition& problem, std::shared_ptr<const Mesh> mesh, const TimeGrid& grid,
                   const TuningConstants& constants, SolveControls linear = {});

    const ProblemDefinition* problem;
    std::shared_ptr<const Mesh> mesh;
    TimeGrid grid;
    TuningConstants constants;
    SolveControls linear;

    std::shared_ptr<const Space> p_space;
    std::shared_ptr<const Space> u_space;
    SparseMatrix mass;        // (p, w)
    SparseMatrix div;         // (div u, w)
    SparseMatrix grad;        // (grad p, v)
    ConstrainedOperator flow; // (K_tau grad p, grad w) + (beta + L)(p, w)
    ConstrainedOperator mechanics;
    std::vector<int> p_dofs;  // Dirichlet dofs
    std::vector<int> u_dofs;

    const BiotParameters& params() const { return problem->params; }
};

// Iterate 0 of each step: the converged fields of the previous step, or zero
// in the interior (boundary values are imposed by the first solve).
enum class InitialGuess { previous_step, zero };

struct SolverControls {
    int max_iterations = 5;
    InitialGuess initial_guess = InitialGuess::previous_step;
    double eta_tolerance = 0.0;  // 0: always run max_iterations
    bool store_all_iterates = true;
};

struct IterationState {
    int i = 0;
    Field p;
    Field u;
    BrokenP1 eta;
    double delta_eta_norm = -1.0;  // ||eta^i - eta^{i-1}||, negative for i = 0
    double delta_p_energy = 0.0;   // ||grad(p^i - p^{i-1})||^2_{K_tau}
    double delta_u_energy = 0.0;   // ||eps(u^i - u^{i-1})||^2_{2 mu}
};

struct IterationHistory {
    int n = 0;
    double t = 0.0;
    double tau = 0.0;
    Field p_prev;  // converged fields of step n - 1
    Field u_prev;
    std::vector<IterationState> states;  // states[k].i increasing, states[0].i = 0
    bool converged = false;
    std::vector<double> ratios;  // ratios[k] = |d eta^{k+2}| / |d eta^{k+1}|
    std::vector<std::string> warnings;

    const IterationState& final_state() const { return states.back(); }
    // State with iteration index i; throws when it was not stored.
    const IterationState& state(int i) const;
};

// (alpha/gamma) div u - (L/gamma) p, exact per cell.
BrokenP1 compute_eta(const Field& u, const Field& p, const BiotParameters& params, const TuningConstants& c);

// Squared L2 norm of a - b.
double broken_distance2(const BrokenP1& a, const BrokenP1& b, const Mesh& mesh);

// (gamma eta, w) for eta built from (u, p), i.e. alpha (div u, w) - L (p, w).
Vector eta_load(const Discretization& d, const Field& u, const Field& p);

// Flow solve with load `load` = (g~ - gamma eta^{i-1}, w) and boundary values.
Field flow_step(const Discretization& d, const Vector& load, const Vector& boundary, const Field& guess);

// Mechanics solve with load (f, v) - alpha (grad p, v).
Field mechanics_step(const Discretization& d, const Vector& f_load, const Field& p, const Vector& boundary,
                     const Field& guess);

// Fixed-stress iterations of step n starting from the converged fields of
// step n - 1.
IterationHistory fixed_stress_timestep(const Discretization& d, int n, const Field& p_prev, const Field& u_prev,
                                       const SolverControls& controls);

// Initial fields: interpolants of the exact solution at t = 0.
std::pair<Field, Field> initial_fields(const Discretization& d);

using StepObserver = std::function<void(const IterationHistory&)>;

// Runs all steps. Each finished step is passed to `observer`; the returned
// histories keep only the final iterate unless `keep_iterates` is set.
std::vector<IterationHistory> run_transient(const Discretization& d, const SolverControls& controls,
                                            const StepObserver& observer = {}, bool keep_iterates = false);

}  // namespace biot

#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "biot/fem.hpp"
#include "biot/linalg.hpp"
#include "biot/model.hpp"
#include "biot/solver.hpp"

namespace biot {

// One majorant with its parts. `weight` is the scalar (zeta or xi) used in
// (1 + w) dual + (1 + 1/w) * rest.
struct MajorantValue {
    double total = 0.0;
    double dual = 0.0;           // ||z - K grad p||^2 or the compliance-weighted stress mismatch
    double equilibration = 0.0;  // squared L2 norm of the equilibration residual (unweighted)
    double eta_part = 0.0;       // eta discrepancy term (pressure only)
    double boundary = 0.0;       // Neumann part; zero without Neumann boundaries
    double weight = 1.0;
    std::vector<double> per_cell;  // cell contributions to `dual`
};

// Minimiser of (1 + w) A + (1 + 1/w) B over w > 0.
double optimal_weight(double A, double B);
double weighted_total(double A, double B, double w);

// Data of the pressure majorant at one iterate:
//   R0 = g~ - gamma eta_h^{i-1} - (beta + L) p_h
//   total = (1 + zeta) ||z - K_tau grad p_h||^2_{K_tau^{-1}}
//         + (1 + 1/zeta) Cp2 (2 ||R0 + div z||^2 + D_eta)
struct FluxData {
    const Field* p_h = nullptr;
    ScalarData R0;
    std::array<double, 2> K_tau{1, 1};
    double Cp2 = 1.0;
    double D_eta = 0.0;
};

// Data of the stress majorant:
//   total = (1 + xi) ||tau - sigma_h||^2_{A^{-1}} + (1 + 1/xi) Cu2 ||f - alpha grad p_h + Div tau||^2
struct StressData {
    const Field* u_h = nullptr;
    const Field* p_h = nullptr;
    std::function<std::array<double, 2>(Point)> f;
    double alpha = 1.0;
    double mu = 1.0;
    double lambda = 0.0;
    double Cu2 = 1.0;
};

MajorantValue majorant_pressure(const FluxData& data, const Field& z, double zeta);
MajorantValue majorant_stress(const StressData& data, const Field& tau, double xi);

// Matrices of the quadratic minimisation problems on one dual space.
struct DualSystem {
    std::shared_ptr<const Space> space;
    SparseMatrix mass;    // (K_tau^{-1} z, y) or (A^{-1} tau, sigma)
    SparseMatrix divdiv;  // (div z, div y) or (Div tau, Div sigma)
};

DualSystem flux_system(std::shared_ptr<const Mesh> mesh, Family family, std::array<double, 2> K_tau);
DualSystem stress_system(std::shared_ptr<const Mesh> mesh, Family family, double mu, double lambda);

struct Minimization {
    Field dual;
    MajorantValue value;
    std::vector<double> cycle_totals;  // [0]: initial interpolant with optimal weight
};

// Alternating minimisation. With `fixed` set, the factorisation already held
// by `factor` for weight `fixed_weight` is reused for a single solve
// followed by a weight update.
struct FactorReuse {
    SpdFactorization* factor = nullptr;
    double weight = 0.0;  // weight the factorisation belongs to
    bool valid = false;
};

Minimization minimize_flux(const FluxData& data, const DualSystem& sys, int cycles, FactorReuse* reuse = nullptr,
                           bool reuse_only = false);
Minimization minimize_stress(const StressData& data, const DualSystem& sys, int cycles, FactorReuse* reuse = nullptr,
                             bool reuse_only = false);

// L2 bound from the energy bound.
double pressure_l2_bound(double Mp, double tau, double lambda_K, double C_F, double beta);

struct DisplacementBounds {
    double stress = 0.0;  // M_u~
    double energy = 0.0;  // bound of |||e_u|||^2_u
    double div = 0.0;     // bound of ||div e_u||^2
};

// chi <= 0 selects 1/lambda. Requires 2 chi lambda > 1.
DisplacementBounds majorant_displacement(double stress_total, double pressure_l2, double alpha, double mu,
                                         double lambda, int dim, double chi = 0.0);

enum class EtaMode { contraction, lemma_Mq };
enum class IterMode { consecutive, lag, tilde };
constexpr int kIterModes = 3;
const char* to_string(IterMode m);

struct IterativeOptions {
    bool stated_denominator = false;  // 1 - x^2 instead of (1 - x)^2
    bool derived_bracket = false;     // eta error terms weighted as in the expansion of eta
};

// Majorants of one iterate.
struct IterateBounds {
    int i = 0;
    MajorantValue pressure;
    double pressure_l2 = 0.0;
    MajorantValue stress;
    DisplacementBounds displacement;
    std::vector<double> flux_cycles;
    std::vector<double> stress_cycles;
};

// Inputs of the iteration-error bounds.
struct IterationBoundInputs {
    double q = 0.0;
    double L = 0.0;
    double gamma = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double mu = 1.0;
    double lambda = 0.0;
    int dim = 2;
    double tau = 1.0;
    double lambda_K = 1.0;
    double C_F = 1.0;
    double eta0_discrepancy2 = 0.0;  // ||eta^0 - eta^0_h||^2
};

struct IterateSummary {
    int i = 0;
    double pressure_l2 = 0.0;  // M_{p,L2}(i)
    double div = 0.0;          // M_{u,div}(i)
};

// Bracket of the consecutive and lag bounds for iterates (i, j).
double iteration_bracket(const IterationBoundInputs& in, double eta_distance2, const IterateSummary& a,
                         const IterateSummary& b, const IterativeOptions& opt);

double iter_majorant_pressure(const IterationBoundInputs& in, IterMode mode, int i, int m, double eta_distance2,
                              const IterateSummary& a, const IterateSummary& b, double eta10_distance2,
                              const IterateSummary& first, const IterativeOptions& opt);
double iter_majorant_displacement(const IterationBoundInputs& in, IterMode mode, int i, int m, double eta_distance2,
                                  const IterateSummary& a, const IterateSummary& b, double eta10_distance2,
                                  const IterateSummary& first, const IterativeOptions& opt);

// Lag factor x / den(x) with x = q^m.
double lag_factor(double q, int m, bool stated_denominator);

// Exact error of discrete fields against the exact solution at time t.
struct ErrorSet {
    double grad_p = 0.0;  // ||grad e_p||^2_{K_tau}
    double p_beta = 0.0;  // ||e_p||^2_beta
    double p_l2 = 0.0;    // ||e_p||^2
    double strain = 0.0;  // ||eps(e_u)||^2_{2 mu}
    double div_lambda = 0.0;
    double div_l2 = 0.0;  // ||div e_u||^2
    double e_p = 0.0;     // |||e_p|||^2_p
    double e_u = 0.0;     // |||e_u|||^2_u
    double combined = 0.0;
    std::vector<double> per_cell_p;
    std::vector<double> per_cell_u;
};

ErrorSet exact_errors(const Field& p_h, const Field& u_h, const ProblemDefinition& problem, double t, double tau);

// |||p(t)|||^2_p and |||u(t)|||^2_u of the exact solution.
std::pair<double, double> exact_norms(const Mesh& mesh, const ProblemDefinition& problem, double t, double tau);

struct MajorantOptions {
    Family flux_family = Family::RT1;
    Family stress_family = Family::P2;
    int cycles = 3;
    EtaMode eta_mode = EtaMode::contraction;
    double eta0_discrepancy2 = 0.0;
    std::array<bool, kIterModes> modes{true, true, true};
    int lag_m = 0;  // 0: ceil(I / 2)
    IterativeOptions iterative;
    double chi = 0.0;
    // Reuse the final iterate's weights and factorisations at the other
    // iterates instead of minimising from scratch.
    bool reuse_schedule = true;
    // Previous-step fields in g~ of the flow residual. `exact` takes the
    // exact solution at t - tau, so that the bound also covers error carried
    // over from earlier steps; `discrete` takes the computed fields and bounds
    // the error of the step problem alone.
    enum class PreviousData { exact, discrete } previous_data = PreviousData::exact;
};

struct StepReport {
    int n = 0;
    double t = 0.0;
    int I = 0;
    int m = 0;
    IterateBounds final_bounds;
    std::vector<IterateBounds> evaluated;  // every bounded iterate, ascending i (final one included)
    std::array<double, kIterModes> iter_p{};
    std::array<double, kIterModes> iter_u{};
    std::array<bool, kIterModes> iter_available{};
    double M_p = 0.0;
    double M_u = 0.0;
    double M = 0.0;
    double M_p_consecutive = 0.0;  // combined bounds with the consecutive mode only
    double M_u_consecutive = 0.0;
    ErrorSet errors;
    double norm_p = 0.0;
    double norm_u = 0.0;
    std::vector<double> ratios;
    std::vector<double> indicator_p;  // per-cell dual part of the pressure majorant
    std::vector<double> indicator_u;  // per-cell dual part of the stress majorant
};

// Caches dual spaces and matrices for one discretization.
class MajorantEvaluator {
public:
    MajorantEvaluator(const Discretization& d, MajorantOptions options);

    StepReport evaluate_step(const IterationHistory& h);

    // Majorants of iterate i. `first` supplies iterate-1 values for the
    // lemma_Mq eta term; `reuse` selects the cheap path.
    IterateBounds evaluate_iterate(const IterationHistory& h, int i, const IterateBounds* first, bool reuse);

    const MajorantOptions& options() const { return options_; }
    IterationBoundInputs bound_inputs() const;
    int lag_for(int I) const;

private:
    double eta_term(int i, const IterateBounds* first) const;

    const Discretization& d_;
    MajorantOptions options_;
    DualSystem flux_;
    DualSystem stress_;
    SpdFactorization flux_factor_;
    SpdFactorization stress_factor_;
    FactorReuse flux_reuse_;
    FactorReuse stress_reuse_;
};

// Running sums over time steps.
struct Accumulated {
    int steps = 0;
    double e_p = 0.0, e_u = 0.0, combined = 0.0;
    double norm_p = 0.0, norm_u = 0.0;
    double Mh_p = 0.0, Mh_u = 0.0, Mh_p_l2 = 0.0, Mh_u_div = 0.0;
    double M_p = 0.0, M_u = 0.0, M = 0.0;
    double M_consecutive = 0.0;
    double M_p_consecutive = 0.0, M_u_consecutive = 0.0;
    std::array<double, kIterModes> iter_p{}, iter_u{};
    double p_l2 = 0.0, div_l2 = 0.0;
    double max_ratio = 0.0;

    void add(const StepReport& r);
    double rel_e_p() const { return e_p / norm_p; }
    double rel_e_u() const { return e_u / norm_u; }
    double rel_combined() const { return combined / (norm_p + norm_u); }
};

// sqrt(bound / error): efficiency in the (unsquared) energy norm.
double efficiency(double bound, double error);

}  // namespace biot

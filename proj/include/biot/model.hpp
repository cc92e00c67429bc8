#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <string>

#include "biot/fem.hpp"

namespace biot {

struct BiotParameters {
    double alpha = 1.0;
    double beta = 1.0;
    double mu = 1.0;
    double lambda = 0.0;
    std::array<double, 2> K{1.0, 1.0};  // diagonal permeability over viscosity
    int dim = 2;
    double rho_f_g = 0.0;  // kept for completeness; no gravity in the manufactured cases

    // Throws std::invalid_argument unless alpha, beta, mu, K > 0 and lambda >= 0.
    void validate() const;
    double lambda_K() const { return std::min(K[0], K[1]); }
    double mu_K() const { return std::max(K[0], K[1]); }
};

enum class TuningMode { optimal, classical, user };

struct TuningConstants {
    double L = 0.0;
    double gamma = 0.0;
    double q = 0.0;
    double lambda_K = 0.0;
    double mu_K = 0.0;
    double C_F = 0.0;   // Friedrichs constant of the rectangle
    double C_K = 0.0;   // Korn constant for full Dirichlet displacement boundary
    double C_tr = 0.0;  // trace constant; zero without Neumann pressure boundary
    double Cp2 = 0.0;   // squared composite constant of the pressure majorant
    double Cu2 = 0.0;   // squared composite constant of the stress majorant
    // Set when a user L lies below alpha^2 / (2 lambda), where the
    // contraction proof no longer applies.
    bool below_guarantee = false;
};

double plane_strain_lambda(double lambda_vol, double mu);

// Lame parameters (mu, lambda) from Young's modulus and Poisson's ratio.
std::pair<double, double> lame_from_young(double E, double nu);

TuningConstants derived_constants(const BiotParameters& p, Point lo, Point hi, TuningMode mode, double user_L = 0.0);

// Sum_{k=1}^{i-1} q^k + 1.
double contraction_sum(double q, int i);

struct TimeGrid {
    double T = 1.0;
    int N = 1;

    TimeGrid() = default;
    TimeGrid(double T_, int N_);
    double tau() const { return T / N; }
    double time(int n) const { return T * n / N; }
};

// Space-time jet of an exact field: value and spatial gradient.
using SpaceTimeJet = std::function<Jet(Point, double)>;

struct ProblemDefinition {
    std::string name;
    BiotParameters params;
    double T = 10.0;
    double pressure_scale = 1.0;
    SpaceTimeJet exact_p;
    SpaceTimeJet exact_u;
    std::function<std::array<double, 2>(Point, double)> f;
    std::function<double(Point, double)> g;
};

enum class CaseName { ex1, ex2 };
enum class Variant { simplified, realistic };

CaseName parse_case(const std::string& s);
Variant parse_variant(const std::string& s);
const char* to_string(CaseName c);
const char* to_string(Variant v);

ProblemDefinition manufactured_case(CaseName name, Variant variant);

// Cellwise scalar data usable as a load.
using ScalarData = std::function<double(int cell, const Bary& b, Point x)>;

// tau * g(t) + beta * p_prev + alpha * div u_prev, with the last two taken
// cellwise from the fields. The result refers to g and both fields, which
// must outlive it.
ScalarData rhs_tilde_g(const std::function<double(Point, double)>& g, double t, double tau,
                       const BiotParameters& params, const Field& p_prev, const Field& u_prev);

}  // namespace biot

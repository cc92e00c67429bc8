#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "biot/linalg.hpp"
#include "biot/mesh.hpp"
#include "biot/quadrature.hpp"

namespace biot {

enum class Family { P1, P2, RT0, RT1 };

// Value shape of a Lagrange space. Symmetric tensors are stored by
// components (xx, yy, xy). RT spaces are vector-valued by construction.
enum class Shape { scalar, vector, sym_tensor };

using Bary = std::array<double, 3>;

constexpr int kMaxLocalDofs = 18;

// Basis functions of one cell evaluated at one point.
//   val[k][c]     component c of basis function k
//   grad[k][c][j] d/dx_j of component c (Lagrange spaces only)
//   div[k]        div for vector/RT functions, row-wise Div for tensors
struct BasisPoint {
    int n = 0;
    double val[kMaxLocalDofs][3];
    double grad[kMaxLocalDofs][3][2];
    double div[kMaxLocalDofs][2];
};

class Space {
public:
    Space(std::shared_ptr<const Mesh> mesh, Family family, Shape shape = Shape::scalar);

    const Mesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    Family family() const { return family_; }
    Shape shape() const { return shape_; }
    bool is_lagrange() const { return family_ == Family::P1 || family_ == Family::P2; }
    int degree() const { return (family_ == Family::P1 || family_ == Family::RT0) ? 1 : 2; }

    int n_dofs() const { return n_dofs_; }
    int n_local() const { return n_local_; }
    int n_components() const;            // value components (1, 2 or 3)
    int n_scalar_dofs() const { return n_scalar_; }  // Lagrange: dofs per component
    int n_local_scalar() const { return n_local_scalar_; }

    const int* cell_dofs(int c) const { return &dof_map_[static_cast<std::size_t>(c) * n_local_]; }

    void evaluate(int cell, const Bary& b, BasisPoint& out) const;

    // Location of a Lagrange scalar dof (vertex or facet midpoint).
    Point scalar_dof_point(int scalar_dof) const;

private:
    void build_lagrange();
    void build_rt();

    std::shared_ptr<const Mesh> mesh_;
    Family family_;
    Shape shape_;
    int n_dofs_ = 0;
    int n_local_ = 0;
    int n_scalar_ = 0;
    int n_local_scalar_ = 0;
    std::vector<int> dof_map_;
    // RT: per cell, coefficients of the local basis in scaled monomials
    // (column k = basis function k), plus centroid and scale.
    std::vector<double> rt_coeff_;
    std::vector<std::array<double, 3>> rt_frame_;
};

// Coefficient vector over a space.
class Field {
public:
    Field() = default;
    explicit Field(std::shared_ptr<const Space> space);
    Field(std::shared_ptr<const Space> space, Vector coeffs);

    const Space& space() const { return *space_; }
    const std::shared_ptr<const Space>& space_ptr() const { return space_; }
    Vector& coeffs() { return coeffs_; }
    const Vector& coeffs() const { return coeffs_; }

private:
    std::shared_ptr<const Space> space_;
    Vector coeffs_;
};

// Value, gradient and divergence of a field at a point.
struct FieldPoint {
    double val[3] = {0, 0, 0};
    double grad[3][2] = {{0, 0}, {0, 0}, {0, 0}};
    double div[2] = {0, 0};
};

FieldPoint evaluate(const Field& f, int cell, const Bary& b);
FieldPoint evaluate(const Field& f, int cell, const BasisPoint& basis);

// Cellwise (discontinuous) linear field, three vertex values per cell.
struct BrokenP1 {
    std::vector<double> values;  // 3 * n_cells
    double operator()(int cell, const Bary& b) const {
        const double* v = &values[3 * static_cast<std::size_t>(cell)];
        return b[0] * v[0] + b[1] * v[1] + b[2] * v[2];
    }
};

// f(cell, x) -> up to three value components.
using CellFunction = std::function<std::array<double, 3>(int cell, Point x)>;

// Nodal interpolant (Lagrange) or facet/cell moment interpolant (RT). Values
// of cell-discontinuous inputs are averaged over the cells sharing a dof.
Field interpolate(std::shared_ptr<const Space> space, const CellFunction& f);

struct FormCoefficients {
    double scale = 1.0;             // mass weight, coupling factor
    std::array<double, 2> K{1, 1};  // diagonal tensor (stiffness) or its inverse (rt_mass)
    double mu = 1.0;
    double lambda = 0.0;
    int dim = 2;
};

enum class BilinearKind {
    mass,             // scale (u, v)
    stiffness,        // (K grad u, grad v)
    elasticity,       // (2 mu eps(u), eps(v)) + (lambda div u, div v)
    grad_coupling,    // scale (grad p, v); trial scalar, test vector
    div_coupling,     // scale (div u, w); trial vector or RT, test scalar
    rt_mass,          // (K z, y) with K holding the weight (e.g. K_tau^{-1})
    rt_divdiv,        // scale (div z, div y)
    compliance_mass,  // (A^{-1} tau, sigma), A^{-1} the inverse isotropic elasticity
    tensor_divdiv,    // scale (Div tau, Div sigma)
};

SparseMatrix assemble_bilinear(BilinearKind kind, const Space& trial, const Space& test,
                               const FormCoefficients& c = {});

// Load data at one quadrature point: paired with basis values and with the
// basis divergence (vector/RT) or row-wise Div (tensors).
struct LoadPoint {
    double val[3] = {0, 0, 0};
    double div[2] = {0, 0};
};
using LoadFunction = std::function<LoadPoint(int cell, const Bary& b, Point x)>;

Vector assemble_linear(const Space& test, const LoadFunction& data, int quad_degree);

// Lagrange dofs (all components) lying on the given facets.
std::vector<int> facet_dofs(const Space& space, const std::vector<int>& facets);

// Full-length vector holding nodal values of `f` at `dofs`, zero elsewhere.
Vector boundary_values(const Space& space, const std::vector<int>& dofs,
                       const std::function<std::array<double, 3>(Point)>& f);

// Symmetric elimination in place: couplings to fixed dofs move to b, fixed
// rows and columns become identity rows with b equal to the prescribed value.
void apply_dirichlet(SparseMatrix& A, Vector& b, const std::vector<int>& dofs, const Vector& values);

// Cached elimination for repeated solves with one matrix.
class ConstrainedOperator {
public:
    ConstrainedOperator() = default;
    ConstrainedOperator(SparseMatrix A, std::vector<int> dofs);

    const SparseMatrix& matrix() const { return constrained_; }
    // Right-hand side for load b and prescribed values g (full length).
    Vector rhs(const Vector& b, const Vector& g) const;
    const std::vector<int>& dofs() const { return dofs_; }

private:
    SparseMatrix full_;
    SparseMatrix constrained_;
    std::vector<int> dofs_;
};

struct CellIntegral {
    double total = 0.0;
    std::vector<double> per_cell;
};

using PointIntegrand = std::function<double(int cell, const Bary& b, Point x)>;

CellIntegral integrate(const Mesh& mesh, const PointIntegrand& f, int quad_degree);

// Exact field value and gradient at a point (components as in FieldPoint).
struct Jet {
    double val[3] = {0, 0, 0};
    double grad[3][2] = {{0, 0}, {0, 0}, {0, 0}};
};
using ExactFunction = std::function<Jet(Point)>;

enum class NormKind {
    grad_K,      // ||grad w||^2_K
    l2_weighted, // weight * ||w||^2
    strain_2mu,  // ||eps(w)||^2_{2 mu}
    div_lambda,  // ||div w||^2_lambda
    l2,          // ||w||^2 (all components)
    flux_Kinv,   // ||y||^2_{K^{-1}} with K given directly
    energy_p,    // grad_K + l2_weighted
    energy_u,    // strain_2mu + div_lambda
};

struct NormCoefficients {
    std::array<double, 2> K{1, 1};
    double weight = 1.0;
    double mu = 1.0;
    double lambda = 0.0;
};

// Squared weighted norm of `w` (or of exact - w when `exact` is given), with
// per-cell contributions.
CellIntegral weighted_norm(NormKind kind, const Field& w, const NormCoefficients& c,
                           const ExactFunction* exact = nullptr, int quad_degree = 8);

}  // namespace biot

#include "biot/fem.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace biot {

namespace {

struct CellGeometry {
    double area;
    double grad_bary[3][2];
};

CellGeometry geometry(const Mesh& m, int c) {
    const auto& v = m.cells[c];
    const Point& a = m.vertices[v[0]];
    const Point& b = m.vertices[v[1]];
    const Point& d = m.vertices[v[2]];
    CellGeometry g;
    g.area = m.cell_area(c);
    const double s = 1.0 / (2.0 * g.area);
    g.grad_bary[0][0] = (b.y - d.y) * s;
    g.grad_bary[0][1] = (d.x - b.x) * s;
    g.grad_bary[1][0] = (d.y - a.y) * s;
    g.grad_bary[1][1] = (a.x - d.x) * s;
    g.grad_bary[2][0] = (a.y - b.y) * s;
    g.grad_bary[2][1] = (b.x - a.x) * s;
    return g;
}

// Scalar Lagrange basis (P1: 3 functions, P2: 6 with edge functions ordered
// by opposite vertex).
int lagrange_scalar(const CellGeometry& g, const Bary& b, int degree, double phi[6], double dphi[6][2]) {
    if (degree == 1) {
        for (int k = 0; k < 3; ++k) {
            phi[k] = b[k];
            dphi[k][0] = g.grad_bary[k][0];
            dphi[k][1] = g.grad_bary[k][1];
        }
        return 3;
    }
    for (int k = 0; k < 3; ++k) {
        phi[k] = b[k] * (2.0 * b[k] - 1.0);
        dphi[k][0] = (4.0 * b[k] - 1.0) * g.grad_bary[k][0];
        dphi[k][1] = (4.0 * b[k] - 1.0) * g.grad_bary[k][1];
        const int i = (k + 1) % 3, j = (k + 2) % 3;
        phi[3 + k] = 4.0 * b[i] * b[j];
        dphi[3 + k][0] = 4.0 * (b[i] * g.grad_bary[j][0] + b[j] * g.grad_bary[i][0]);
        dphi[3 + k][1] = 4.0 * (b[i] * g.grad_bary[j][1] + b[j] * g.grad_bary[i][1]);
    }
    return 6;
}

// Scaled monomial basis of RT0 (3) or RT1 (8) in xi = (x - centroid) / s.
int rt_monomials(int degree, double xi, double eta, double s, double val[8][2], double div[8]) {
    val[0][0] = 1.0, val[0][1] = 0.0, div[0] = 0.0;
    val[1][0] = 0.0, val[1][1] = 1.0, div[1] = 0.0;
    if (degree == 1) {
        val[2][0] = xi, val[2][1] = eta, div[2] = 2.0 / s;
        return 3;
    }
    val[2][0] = xi, val[2][1] = 0.0, div[2] = 1.0 / s;
    val[3][0] = eta, val[3][1] = 0.0, div[3] = 0.0;
    val[4][0] = 0.0, val[4][1] = xi, div[4] = 0.0;
    val[5][0] = 0.0, val[5][1] = eta, div[5] = 1.0 / s;
    val[6][0] = xi * xi, val[6][1] = xi * eta, div[6] = 3.0 * xi / s;
    val[7][0] = xi * eta, val[7][1] = eta * eta, div[7] = 3.0 * eta / s;
    return 8;
}

int value_components(const Space& s) {
    if (!s.is_lagrange()) return 2;
    switch (s.shape()) {
        case Shape::scalar: return 1;
        case Shape::vector: return 2;
        case Shape::sym_tensor: return 3;
    }
    return 1;
}

}  // namespace

Space::Space(std::shared_ptr<const Mesh> mesh, Family family, Shape shape)
    : mesh_(std::move(mesh)), family_(family), shape_(shape) {
    if (!mesh_) throw std::invalid_argument("space needs a mesh");
    if (is_lagrange())
        build_lagrange();
    else
        build_rt();
}

int Space::n_components() const { return value_components(*this); }

void Space::build_lagrange() {
    const Mesh& m = *mesh_;
    const int nv = m.n_vertices();
    n_local_scalar_ = (family_ == Family::P1) ? 3 : 6;
    n_scalar_ = (family_ == Family::P1) ? nv : nv + m.n_facets();
    const int nc = value_components(*this);
    n_local_ = nc * n_local_scalar_;
    n_dofs_ = nc * n_scalar_;
    dof_map_.resize(static_cast<std::size_t>(m.n_cells()) * n_local_);
    for (int c = 0; c < m.n_cells(); ++c) {
        int* d = &dof_map_[static_cast<std::size_t>(c) * n_local_];
        for (int comp = 0; comp < nc; ++comp) {
            for (int s = 0; s < n_local_scalar_; ++s) {
                int scalar = s < 3 ? m.cells[c][s] : nv + m.cell_facets[c][s - 3];
                d[comp * n_local_scalar_ + s] = comp * n_scalar_ + scalar;
            }
        }
    }
}

void Space::build_rt() {
    const Mesh& m = *mesh_;
    const int deg = degree();
    const int per_facet = deg;
    const int interior = deg == 1 ? 0 : 2;
    n_local_ = 3 * per_facet + interior;
    n_dofs_ = per_facet * m.n_facets() + interior * m.n_cells();
    dof_map_.resize(static_cast<std::size_t>(m.n_cells()) * n_local_);
    rt_coeff_.resize(static_cast<std::size_t>(m.n_cells()) * n_local_ * n_local_);
    rt_frame_.resize(m.n_cells());

    const LineRule& line = gauss_line(3);
    const QuadratureRule& tri = triangle_rule(4);
    const int n = n_local_;
    double mv[8][2], md[8];

    for (int c = 0; c < m.n_cells(); ++c) {
        int* d = &dof_map_[static_cast<std::size_t>(c) * n];
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < per_facet; ++j) d[per_facet * k + j] = per_facet * m.cell_facets[c][k] + j;
        for (int j = 0; j < interior; ++j) d[3 * per_facet + j] = per_facet * m.n_facets() + interior * c + j;

        const Point centre = m.cell_point(c, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
        double scale = 0.0;
        for (int k = 0; k < 3; ++k) scale = std::max(scale, m.facet_length(m.cell_facets[c][k]));
        rt_frame_[c] = {centre.x, centre.y, scale};

        // V(i, j) = dof_i(monomial_j)
        Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, n);
        for (int k = 0; k < 3; ++k) {
            const int f = m.cell_facets[c][k];
            const Point& a = m.vertices[m.facets[f][0]];
            const Point& b = m.vertices[m.facets[f][1]];
            const Point nrm = m.facet_normal(f);
            for (std::size_t q = 0; q < line.points.size(); ++q) {
                const double s = line.points[q];
                const double x = a.x + s * (b.x - a.x), y = a.y + s * (b.y - a.y);
                rt_monomials(deg, (x - centre.x) / scale, (y - centre.y) / scale, scale, mv, md);
                for (int j = 0; j < n; ++j) {
                    const double flux = mv[j][0] * nrm.x + mv[j][1] * nrm.y;
                    V(per_facet * k, j) += line.weights[q] * flux;
                    if (per_facet == 2) V(per_facet * k + 1, j) += line.weights[q] * flux * (2.0 * s - 1.0);
                }
            }
        }
        for (int j = 0; j < interior; ++j) {
            for (std::size_t q = 0; q < tri.points.size(); ++q) {
                const Point x = m.cell_point(c, tri.points[q]);
                rt_monomials(deg, (x.x - centre.x) / scale, (x.y - centre.y) / scale, scale, mv, md);
                for (int i = 0; i < n; ++i) V(3 * per_facet + j, i) += tri.weights[q] * mv[i][j];
            }
        }
        Eigen::MatrixXd C = V.inverse();
        std::copy(C.data(), C.data() + n * n, &rt_coeff_[static_cast<std::size_t>(c) * n * n]);
    }
}

void Space::evaluate(int cell, const Bary& b, BasisPoint& out) const {
    const Mesh& m = *mesh_;
    out.n = n_local_;
    if (is_lagrange()) {
        const CellGeometry g = geometry(m, cell);
        double phi[6], dphi[6][2];
        const int ns = lagrange_scalar(g, b, degree(), phi, dphi);
        const int nc = value_components(*this);
        for (int comp = 0; comp < nc; ++comp) {
            for (int s = 0; s < ns; ++s) {
                const int k = comp * ns + s;
                for (int cc = 0; cc < 3; ++cc) {
                    out.val[k][cc] = 0.0;
                    out.grad[k][cc][0] = out.grad[k][cc][1] = 0.0;
                }
                out.val[k][comp] = phi[s];
                out.grad[k][comp][0] = dphi[s][0];
                out.grad[k][comp][1] = dphi[s][1];
                out.div[k][0] = out.div[k][1] = 0.0;
                if (shape_ == Shape::vector) {
                    out.div[k][0] = dphi[s][comp];
                } else if (shape_ == Shape::sym_tensor) {
                    // Div of [[t0, t2], [t2, t1]]
                    if (comp == 0) out.div[k][0] = dphi[s][0];
                    if (comp == 1) out.div[k][1] = dphi[s][1];
                    if (comp == 2) {
                        out.div[k][0] = dphi[s][1];
                        out.div[k][1] = dphi[s][0];
                    }
                }
            }
        }
        return;
    }
    const Point x = m.cell_point(cell, b);
    const auto& fr = rt_frame_[cell];
    double mv[8][2], md[8];
    const int n = rt_monomials(degree(), (x.x - fr[0]) / fr[2], (x.y - fr[1]) / fr[2], fr[2], mv, md);
    const double* C = &rt_coeff_[static_cast<std::size_t>(cell) * n * n];
    for (int k = 0; k < n; ++k) {
        double vx = 0.0, vy = 0.0, dv = 0.0;
        for (int j = 0; j < n; ++j) {
            const double cjk = C[k * n + j];
            vx += cjk * mv[j][0];
            vy += cjk * mv[j][1];
            dv += cjk * md[j];
        }
        out.val[k][0] = vx;
        out.val[k][1] = vy;
        out.val[k][2] = 0.0;
        out.div[k][0] = dv;
        out.div[k][1] = 0.0;
        for (int cc = 0; cc < 3; ++cc) out.grad[k][cc][0] = out.grad[k][cc][1] = 0.0;
    }
}

Point Space::scalar_dof_point(int s) const {
    const Mesh& m = *mesh_;
    if (s < m.n_vertices()) return m.vertices[s];
    const auto& f = m.facets[s - m.n_vertices()];
    const Point& a = m.vertices[f[0]];
    const Point& b = m.vertices[f[1]];
    return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

Field::Field(std::shared_ptr<const Space> space) : space_(std::move(space)) {
    coeffs_.assign(space_->n_dofs(), 0.0);
}

Field::Field(std::shared_ptr<const Space> space, Vector coeffs) : space_(std::move(space)), coeffs_(std::move(coeffs)) {
    if (static_cast<int>(coeffs_.size()) != space_->n_dofs())
        throw std::invalid_argument("coefficient length does not match space");
}

FieldPoint evaluate(const Field& f, int cell, const BasisPoint& B) {
    FieldPoint out;
    const int* dofs = f.space().cell_dofs(cell);
    const Vector& x = f.coeffs();
    for (int k = 0; k < B.n; ++k) {
        const double a = x[dofs[k]];
        if (a == 0.0) continue;
        for (int c = 0; c < 3; ++c) {
            out.val[c] += a * B.val[k][c];
            out.grad[c][0] += a * B.grad[k][c][0];
            out.grad[c][1] += a * B.grad[k][c][1];
        }
        out.div[0] += a * B.div[k][0];
        out.div[1] += a * B.div[k][1];
    }
    return out;
}

FieldPoint evaluate(const Field& f, int cell, const Bary& b) {
    BasisPoint B;
    f.space().evaluate(cell, b, B);
    return evaluate(f, cell, B);
}

Field interpolate(std::shared_ptr<const Space> space, const CellFunction& f) {
    const Space& S = *space;
    const Mesh& m = S.mesh();
    Vector coeffs(S.n_dofs(), 0.0);
    std::vector<int> count(S.n_dofs(), 0);

    if (S.is_lagrange()) {
        const int nc = S.n_components();
        const int ns = S.n_local_scalar();
        for (int c = 0; c < m.n_cells(); ++c) {
            const int* dofs = S.cell_dofs(c);
            for (int s = 0; s < ns; ++s) {
                const Point x = S.scalar_dof_point(dofs[s]);
                const auto v = f(c, x);
                for (int comp = 0; comp < nc; ++comp) {
                    coeffs[dofs[comp * ns + s]] += v[comp];
                    ++count[dofs[comp * ns + s]];
                }
            }
        }
    } else {
        const int per_facet = S.degree();
        const LineRule& line = gauss_line(4);
        const QuadratureRule& tri = triangle_rule(6);
        for (int c = 0; c < m.n_cells(); ++c) {
            const int* dofs = S.cell_dofs(c);
            for (int k = 0; k < 3; ++k) {
                const int fct = m.cell_facets[c][k];
                const Point& a = m.vertices[m.facets[fct][0]];
                const Point& b = m.vertices[m.facets[fct][1]];
                const Point nrm = m.facet_normal(fct);
                for (std::size_t q = 0; q < line.points.size(); ++q) {
                    const double s = line.points[q];
                    const auto v = f(c, {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)});
                    const double flux = v[0] * nrm.x + v[1] * nrm.y;
                    coeffs[dofs[per_facet * k]] += line.weights[q] * flux;
                    if (per_facet == 2) coeffs[dofs[per_facet * k + 1]] += line.weights[q] * flux * (2.0 * s - 1.0);
                }
                for (int j = 0; j < per_facet; ++j) ++count[dofs[per_facet * k + j]];
            }
            if (per_facet == 2) {
                for (std::size_t q = 0; q < tri.points.size(); ++q) {
                    const auto v = f(c, m.cell_point(c, tri.points[q]));
                    coeffs[dofs[6]] += tri.weights[q] * v[0];
                    coeffs[dofs[7]] += tri.weights[q] * v[1];
                }
                ++count[dofs[6]];
                ++count[dofs[7]];
            }
        }
    }
    for (int i = 0; i < S.n_dofs(); ++i)
        if (count[i] > 1) coeffs[i] /= count[i];
    return Field(std::move(space), std::move(coeffs));
}

namespace {

void check_same_mesh(const Space& a, const Space& b) {
    if (&a.mesh() != &b.mesh()) throw std::invalid_argument("spaces live on different meshes");
}

template <class Kernel>
SparseMatrix assemble_impl(const Space& trial, const Space& test, int qdeg, Kernel kernel) {
    check_same_mesh(trial, test);
    const Mesh& m = trial.mesh();
    const QuadratureRule& rule = triangle_rule(qdeg);
    const int nt = trial.n_local(), nv = test.n_local();
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(m.n_cells()) * nt * nv);
    BasisPoint U, V;
    const bool same = &trial == &test;
    double A[kMaxLocalDofs][kMaxLocalDofs];
    for (int c = 0; c < m.n_cells(); ++c) {
        for (int i = 0; i < nv; ++i)
            for (int j = 0; j < nt; ++j) A[i][j] = 0.0;
        const double area = m.cell_area(c);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            trial.evaluate(c, rule.points[q], U);
            if (!same) test.evaluate(c, rule.points[q], V);
            const BasisPoint& W = same ? U : V;
            const double w = area * rule.weights[q];
            for (int i = 0; i < nv; ++i)
                for (int j = 0; j < nt; ++j) A[i][j] += w * kernel(U, j, W, i);
        }
        const int* rd = test.cell_dofs(c);
        const int* cd = trial.cell_dofs(c);
        for (int i = 0; i < nv; ++i)
            for (int j = 0; j < nt; ++j)
                if (A[i][j] != 0.0) t.push_back({rd[i], cd[j], A[i][j]});
    }
    return SparseMatrix(test.n_dofs(), trial.n_dofs(), std::move(t));
}

}  // namespace

SparseMatrix assemble_bilinear(BilinearKind kind, const Space& trial, const Space& test, const FormCoefficients& k) {
    const int qdeg = trial.degree() + test.degree();
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(what);
    };
    switch (kind) {
        case BilinearKind::mass: {
            const int nc = std::min(trial.n_components(), test.n_components());
            return assemble_impl(trial, test, qdeg, [&](const BasisPoint& U, int j, const BasisPoint& V, int i) {
                double s = 0.0;
                for (int c = 0; c < nc; ++c) s += U.val[j][c] * V.val[i][c];
                return k.scale * s;
            });
        }
        case BilinearKind::stiffness:
            require(trial.is_lagrange() && trial.shape() == Shape::scalar, "stiffness needs a scalar Lagrange space");
            require(k.K[0] > 0.0 && k.K[1] > 0.0, "permeability must be positive");
            return assemble_impl(trial, test, qdeg, [&](const BasisPoint& U, int j, const BasisPoint& V, int i) {
                return k.K[0] * U.grad[j][0][0] * V.grad[i][0][0] + k.K[1] * U.grad[j][0][1] * V.grad[i][0][1];
            });
        case BilinearKind::elasticity:
            require(trial.is_lagrange() && trial.shape() == Shape::vector, "elasticity needs a vector Lagrange space");
            require(k.mu > 0.0 && k.lambda >= 0.0, "invalid Lame parameters");
            return assemble_impl(trial, test, qdeg, [&](const BasisPoint& U, int j, const BasisPoint& V, int i) {
                const double eu[3] = {U.grad[j][0][0], U.grad[j][1][1], 0.5 * (U.grad[j][0][1] + U.grad[j][1][0])};
                const double ev[3] = {V.grad[i][0][0], V.grad[i][1][1], 0.5 * (V.grad[i][0][1] + V.grad[i][1][0])};
                const double ee = eu[0] * ev[0] + eu[1] * ev[1] + 2.0 * eu[2] * ev[2];
                return 2.0 * k.mu * ee + k.lambda * (eu[0] + eu[1]) * (ev[0] + ev[1]);
            });
        case BilinearKind::grad_coupling:
            require(trial.shape() == Shape::scalar && test.n_components() == 2, "grad coupling: scalar to vector");
            return assemble_impl(trial, test, qdeg, [&](const BasisPoint& U, int j, const BasisPoint& V, int i) {
                return k.scale * (U.grad[j][0][0] * V.val[i][0] + U.grad[j][0][1] * V.val[i][1]);
            });
        case BilinearKind::div_coupling:
            require(trial.n_components() == 2 && test.shape() == Shape::scalar && test.is_lagrange(),
                    "div coupling: vector to scalar");
            return assemble_impl(trial, test, qdeg, [&](const BasisPoint& U, int j, const BasisPoint& V, int i) {
                return k.scale * U.div[j][0] * V.val[i][0];
            });
        case BilinearKind::rt_mass:
            require(!trial.is_lagrange(), "rt_mass needs an RT space");
            require(k.K[0] > 0.0 && k.K[1] > 0.0, "weight must be positive");
            return assemble_impl(trial, test, qdeg, [&](const BasisPoint& U, int j, const BasisPoint& V, int i) {
                return k.K[0] * U.val[j][0] * V.val[i][0] + k.K[1] * U.val[j][1] * V.val[i][1];
            });
        case BilinearKind::rt_divdiv:
            require(!trial.is_lagrange(), "rt_divdiv needs an RT space");
            return assemble_impl(trial, test, qdeg, [&](const BasisPoint& U, int j, const BasisPoint& V, int i) {
                return k.scale * U.div[j][0] * V.div[i][0];
            });
        case BilinearKind::compliance_mass: {
            require(trial.shape() == Shape::sym_tensor, "compliance needs a symmetric tensor space");
            require(k.mu > 0.0 && k.lambda >= 0.0, "invalid Lame parameters");
            const double a = 1.0 / (2.0 * k.mu);
            const double b = k.lambda / (k.dim * k.lambda + 2.0 * k.mu);
            return assemble_impl(trial, test, qdeg, [&](const BasisPoint& U, int j, const BasisPoint& V, int i) {
                const double* t = U.val[j];
                const double* s = V.val[i];
                const double ts = t[0] * s[0] + t[1] * s[1] + 2.0 * t[2] * s[2];
                return a * (ts - b * (t[0] + t[1]) * (s[0] + s[1]));
            });
        }
        case BilinearKind::tensor_divdiv:
            require(trial.shape() == Shape::sym_tensor, "tensor_divdiv needs a symmetric tensor space");
            return assemble_impl(trial, test, qdeg, [&](const BasisPoint& U, int j, const BasisPoint& V, int i) {
                return k.scale * (U.div[j][0] * V.div[i][0] + U.div[j][1] * V.div[i][1]);
            });
    }
    throw std::invalid_argument("unknown bilinear form");
}

Vector assemble_linear(const Space& test, const LoadFunction& data, int quad_degree) {
    const Mesh& m = test.mesh();
    const QuadratureRule& rule = triangle_rule(quad_degree);
    const int nc = test.n_components();
    Vector b(test.n_dofs(), 0.0);
    BasisPoint V;
    for (int c = 0; c < m.n_cells(); ++c) {
        const double area = m.cell_area(c);
        const int* dofs = test.cell_dofs(c);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            test.evaluate(c, rule.points[q], V);
            const LoadPoint L = data(c, rule.points[q], m.cell_point(c, rule.points[q]));
            const double w = area * rule.weights[q];
            for (int i = 0; i < V.n; ++i) {
                double s = L.div[0] * V.div[i][0] + L.div[1] * V.div[i][1];
                for (int cc = 0; cc < nc; ++cc) s += L.val[cc] * V.val[i][cc];
                b[dofs[i]] += w * s;
            }
        }
    }
    return b;
}

std::vector<int> facet_dofs(const Space& space, const std::vector<int>& facets) {
    if (!space.is_lagrange()) throw std::invalid_argument("Dirichlet constraints apply to Lagrange spaces");
    const Mesh& m = space.mesh();
    std::vector<int> out;
    for (int f : facets) {
        if (f < 0 || f >= m.n_facets() || !m.on_boundary(f)) throw std::invalid_argument("facet not on boundary");
        std::vector<int> scalar = {m.facets[f][0], m.facets[f][1]};
        if (space.family() == Family::P2) scalar.push_back(m.n_vertices() + f);
        for (int comp = 0; comp < space.n_components(); ++comp)
            for (int s : scalar) out.push_back(comp * space.n_scalar_dofs() + s);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Vector boundary_values(const Space& space, const std::vector<int>& dofs,
                       const std::function<std::array<double, 3>(Point)>& f) {
    Vector g(space.n_dofs(), 0.0);
    const int ns = space.n_scalar_dofs();
    for (int d : dofs) g[d] = f(space.scalar_dof_point(d % ns))[d / ns];
    return g;
}

void apply_dirichlet(SparseMatrix& A, Vector& b, const std::vector<int>& dofs, const Vector& values) {
    std::vector<char> fixed(A.rows(), 0);
    for (int d : dofs) fixed[d] = 1;
    const auto& off = A.row_offsets();
    const auto& col = A.col_indices();
    auto& val = A.values();
    for (int r = 0; r < A.rows(); ++r) {
        for (int k = off[r]; k < off[r + 1]; ++k) {
            const int c = col[k];
            if (fixed[r]) {
                val[k] = (c == r) ? 1.0 : 0.0;
            } else if (fixed[c]) {
                b[r] -= val[k] * values[c];
                val[k] = 0.0;
            }
        }
    }
    for (int d : dofs) b[d] = values[d];
}

ConstrainedOperator::ConstrainedOperator(SparseMatrix A, std::vector<int> dofs)
    : full_(std::move(A)), dofs_(std::move(dofs)) {
    constrained_ = full_;
    Vector dummy(full_.rows(), 0.0), zero(full_.rows(), 0.0);
    apply_dirichlet(constrained_, dummy, dofs_, zero);
}

Vector ConstrainedOperator::rhs(const Vector& b, const Vector& g) const {
    Vector gm(full_.rows(), 0.0);
    for (int d : dofs_) gm[d] = g[d];
    Vector r = full_ * gm;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    for (int d : dofs_) r[d] = g[d];
    return r;
}

CellIntegral integrate(const Mesh& mesh, const PointIntegrand& f, int quad_degree) {
    const QuadratureRule& rule = triangle_rule(quad_degree);
    CellIntegral out;
    out.per_cell.assign(mesh.n_cells(), 0.0);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q)
            s += rule.weights[q] * f(c, rule.points[q], mesh.cell_point(c, rule.points[q]));
        out.per_cell[c] = mesh.cell_area(c) * s;
        out.total += out.per_cell[c];
    }
    return out;
}

CellIntegral weighted_norm(NormKind kind, const Field& w, const NormCoefficients& k, const ExactFunction* exact,
                           int quad_degree) {
    const Space& S = w.space();
    const int nc = S.n_components();
    const bool tensor = S.is_lagrange() && S.shape() == Shape::sym_tensor;
    BasisPoint B;
    return integrate(
        S.mesh(),
        [&](int c, const Bary& b, Point x) {
            S.evaluate(c, b, B);
            FieldPoint e = evaluate(w, c, B);
            if (exact) {
                const Jet J = (*exact)(x);
                for (int i = 0; i < 3; ++i) {
                    e.val[i] = J.val[i] - e.val[i];
                    e.grad[i][0] = J.grad[i][0] - e.grad[i][0];
                    e.grad[i][1] = J.grad[i][1] - e.grad[i][1];
                }
            }
            auto grad_k = [&] { return k.K[0] * e.grad[0][0] * e.grad[0][0] + k.K[1] * e.grad[0][1] * e.grad[0][1]; };
            auto l2 = [&] {
                double s = 0.0;
                for (int i = 0; i < nc; ++i) s += (tensor && i == 2 ? 2.0 : 1.0) * e.val[i] * e.val[i];
                return s;
            };
            auto strain = [&] {
                const double exy = 0.5 * (e.grad[0][1] + e.grad[1][0]);
                return 2.0 * k.mu * (e.grad[0][0] * e.grad[0][0] + e.grad[1][1] * e.grad[1][1] + 2.0 * exy * exy);
            };
            auto divl = [&] {
                const double d = e.grad[0][0] + e.grad[1][1];
                return k.lambda * d * d;
            };
            switch (kind) {
                case NormKind::grad_K: return grad_k();
                case NormKind::l2_weighted: return k.weight * l2();
                case NormKind::strain_2mu: return strain();
                case NormKind::div_lambda: return divl();
                case NormKind::l2: return l2();
                case NormKind::flux_Kinv:
                    return e.val[0] * e.val[0] / k.K[0] + e.val[1] * e.val[1] / k.K[1];
                case NormKind::energy_p: return grad_k() + k.weight * l2();
                case NormKind::energy_u: return strain() + divl();
            }
            return 0.0;
        },
        quad_degree);
}

}  // namespace biot

#include "biot/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

namespace biot {

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double dist(const Point& a, const Point& b) { return std::hypot(b.x - a.x, b.y - a.y); }

// Rebuild facets and adjacency from vertices and cells. Boundary facets get
// Dirichlet tags for both variables.
void build_topology(Mesh& m) {
    std::map<std::pair<int, int>, int> index;
    m.facets.clear();
    m.facet_cells.clear();
    m.cell_facets.assign(m.cells.size(), {-1, -1, -1});
    for (int c = 0; c < m.n_cells(); ++c) {
        const auto& v = m.cells[c];
        for (int k = 0; k < 3; ++k) {
            int a = v[(k + 1) % 3];
            int b = v[(k + 2) % 3];
            auto key = std::minmax(a, b);
            auto [it, inserted] = index.try_emplace({key.first, key.second}, m.n_facets());
            if (inserted) {
                m.facets.push_back({key.first, key.second});
                m.facet_cells.push_back({c, -1});
            } else {
                auto& fc = m.facet_cells[it->second];
                if (fc[1] >= 0) throw std::invalid_argument("non-manifold facet in mesh");
                fc[1] = c;
            }
            m.cell_facets[c][k] = it->second;
        }
    }
    m.facet_tags.assign(m.facets.size(), {BcKind::dirichlet, BcKind::dirichlet});

    m.h = 0.0;
    for (const auto& v : m.cells) {
        const auto& a = m.vertices[v[0]];
        const auto& b = m.vertices[v[1]];
        const auto& c = m.vertices[v[2]];
        m.h = std::max({m.h, dist(a, b), dist(b, c), dist(c, a)});
    }
}

}  // namespace

double Mesh::cell_area(int c) const {
    const auto& v = cells[c];
    return signed_area(vertices[v[0]], vertices[v[1]], vertices[v[2]]);
}

double Mesh::facet_length(int f) const { return dist(vertices[facets[f][0]], vertices[facets[f][1]]); }

Point Mesh::facet_normal(int f) const {
    const Point& a = vertices[facets[f][0]];
    const Point& b = vertices[facets[f][1]];
    double len = dist(a, b);
    Point n{(b.y - a.y) / len, -(b.x - a.x) / len};
    // Orient away from the owning cell's opposite vertex.
    const int c = facet_cells[f][0];
    int opposite = -1;
    for (int k = 0; k < 3; ++k)
        if (cell_facets[c][k] == f) opposite = cells[c][k];
    const Point& o = vertices[opposite];
    if (n.x * (o.x - a.x) + n.y * (o.y - a.y) > 0.0) {
        n.x = -n.x;
        n.y = -n.y;
    }
    return n;
}

Point Mesh::cell_point(int c, const std::array<double, 3>& bary) const {
    const auto& v = cells[c];
    Point p;
    for (int k = 0; k < 3; ++k) {
        p.x += bary[k] * vertices[v[k]].x;
        p.y += bary[k] * vertices[v[k]].y;
    }
    return p;
}

Mesh build_uniform_mesh(Point lo, Point hi, int nx, int ny, Pattern pattern) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("mesh cell counts must be positive");
    if (!(lo.x < hi.x) || !(lo.y < hi.y)) throw std::invalid_argument("degenerate rectangle");

    Mesh m;
    m.lo = lo;
    m.hi = hi;
    const int npx = nx + 1;
    auto vid = [npx](int i, int j) { return j * npx + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.vertices.push_back({lo.x + (hi.x - lo.x) * i / nx, lo.y + (hi.y - lo.y) * j / ny});

    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            if (pattern == Pattern::diagonal) {
                m.cells.push_back({v00, v10, v11});
                m.cells.push_back({v00, v11, v01});
            } else {
                const Point& a = m.vertices[v00];
                const Point& b = m.vertices[v11];
                int c = m.n_vertices();
                m.vertices.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
                m.cells.push_back({v00, v10, c});
                m.cells.push_back({v10, v11, c});
                m.cells.push_back({v11, v01, c});
                m.cells.push_back({v01, v00, c});
            }
        }
    }
    build_topology(m);
    return m;
}

Mesh refine_uniform(const Mesh& mesh) {
    Mesh m;
    m.lo = mesh.lo;
    m.hi = mesh.hi;
    m.vertices = mesh.vertices;
    const int nv = mesh.n_vertices();
    for (const auto& f : mesh.facets) {
        const Point& a = mesh.vertices[f[0]];
        const Point& b = mesh.vertices[f[1]];
        m.vertices.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
    }
    m.cells.reserve(4 * mesh.cells.size());
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& v = mesh.cells[c];
        const auto& f = mesh.cell_facets[c];
        // Midpoint of the facet opposite local vertex k.
        int m0 = nv + f[0], m1 = nv + f[1], m2 = nv + f[2];
        m.cells.push_back({v[0], m2, m1});
        m.cells.push_back({m2, v[1], m0});
        m.cells.push_back({m1, m0, v[2]});
        m.cells.push_back({m0, m1, m2});
    }
    build_topology(m);

    std::map<std::pair<int, int>, int> index;
    for (int f = 0; f < m.n_facets(); ++f) index[{m.facets[f][0], m.facets[f][1]}] = f;
    for (int f = 0; f < mesh.n_facets(); ++f) {
        if (!mesh.on_boundary(f)) continue;
        int mid = nv + f;
        for (int end : mesh.facets[f]) {
            auto key = std::minmax(end, mid);
            m.facet_tags[index.at({key.first, key.second})] = mesh.facet_tags[f];
        }
    }
    return m;
}

Mesh make_mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells) {
    if (vertices.empty() || cells.empty()) throw std::invalid_argument("empty mesh");
    Mesh m;
    m.vertices = std::move(vertices);
    m.cells = std::move(cells);
    m.lo = m.hi = m.vertices[0];
    for (const auto& p : m.vertices) {
        m.lo = {std::min(m.lo.x, p.x), std::min(m.lo.y, p.y)};
        m.hi = {std::max(m.hi.x, p.x), std::max(m.hi.y, p.y)};
    }
    for (const auto& c : m.cells) {
        for (int v : c)
            if (v < 0 || v >= m.n_vertices()) throw std::invalid_argument("cell references a missing vertex");
        if (!(signed_area(m.vertices[c[0]], m.vertices[c[1]], m.vertices[c[2]]) > 0.0))
            throw std::invalid_argument("cell with nonpositive area");
    }
    build_topology(m);
    return m;
}

std::vector<int> boundary_facets(const Mesh& mesh, Variable var, BcKind kind) {
    std::vector<int> out;
    const int slot = static_cast<int>(var);
    for (int f = 0; f < mesh.n_facets(); ++f)
        if (mesh.on_boundary(f) && mesh.facet_tags[f][slot] == kind) out.push_back(f);
    if (kind == BcKind::dirichlet && out.empty())
        throw std::runtime_error(std::string("Dirichlet boundary of ") + (var == Variable::p ? "p" : "u") +
                                 " has zero measure");
    return out;
}

void set_boundary_tag(Mesh& mesh, int facet, Variable var, BcKind kind) {
    if (facet < 0 || facet >= mesh.n_facets() || !mesh.on_boundary(facet))
        throw std::invalid_argument("facet is not on the boundary");
    mesh.facet_tags[facet][static_cast<int>(var)] = kind;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
    os.precision(17);
    for (const auto& p : mesh.vertices) os << p.x << ' ' << p.y << '\n';
    for (const auto& c : mesh.cells) os << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
}

}  // namespace biot

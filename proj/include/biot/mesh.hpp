#pragma once

#include <array>
#include <iosfwd>
#include <vector>

namespace biot {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

enum class Pattern { diagonal, crisscross };

// The two unknowns that carry boundary conditions.
enum class Variable { p, u };
enum class BcKind { dirichlet, neumann };

// Conforming triangulation of an axis-aligned rectangle.
//
// Facets are stored with their lower vertex index first. facet_cells[f][0] is
// the lower-index neighbour and facet_cells[f][1] is -1 on the boundary; the
// facet normal points out of facet_cells[f][0].
struct Mesh {
    std::vector<Point> vertices;
    std::vector<std::array<int, 3>> cells;
    std::vector<std::array<int, 2>> facets;
    std::vector<std::array<int, 3>> cell_facets;  // facet opposite local vertex k
    std::vector<std::array<int, 2>> facet_cells;
    std::vector<std::array<BcKind, 2>> facet_tags;  // indexed by Variable; boundary facets only
    Point lo;
    Point hi;
    double h = 0.0;

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_cells() const { return static_cast<int>(cells.size()); }
    int n_facets() const { return static_cast<int>(facets.size()); }
    bool on_boundary(int facet) const { return facet_cells[facet][1] < 0; }

    double cell_area(int c) const;
    double facet_length(int f) const;
    // Unit normal pointing out of facet_cells[f][0].
    Point facet_normal(int f) const;
    Point cell_point(int c, const std::array<double, 3>& bary) const;
};

Mesh build_uniform_mesh(Point lo, Point hi, int nx, int ny, Pattern pattern = Pattern::diagonal);

Mesh refine_uniform(const Mesh& mesh);

// Mesh from explicit vertices and positively oriented cells. lo/hi are set to
// the bounding box; all boundary facets get Dirichlet tags.
Mesh make_mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells);

// Facets tagged with the given kind for the given variable. Requesting the
// Dirichlet set of a variable whose Dirichlet set is empty is a configuration
// error.
std::vector<int> boundary_facets(const Mesh& mesh, Variable var, BcKind kind);

void set_boundary_tag(Mesh& mesh, int facet, Variable var, BcKind kind);

// Plain-text dump: "x y" per vertex, then "i j k" per cell.
void write_mesh(std::ostream& os, const Mesh& mesh);

}  // namespace biot

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "biot/mesh.hpp"

using namespace biot;

namespace {

double total_area(const Mesh& m) {
    double a = 0.0;
    for (int c = 0; c < m.n_cells(); ++c) a += m.cell_area(c);
    return a;
}

void expect_valid(const Mesh& m, double domain_area) {
    for (int c = 0; c < m.n_cells(); ++c) EXPECT_GT(m.cell_area(c), 0.0);
    EXPECT_NEAR(total_area(m), domain_area, 1e-12 * domain_area);
    std::vector<int> count(m.n_facets(), 0);
    for (const auto& cf : m.cell_facets)
        for (int f : cf) ++count[f];
    for (int f = 0; f < m.n_facets(); ++f) EXPECT_EQ(count[f], m.on_boundary(f) ? 1 : 2);
    EXPECT_EQ(m.n_vertices() - m.n_facets() + m.n_cells(), 1);
}

}  // namespace

TEST(Mesh, SingleQuadDiagonal) {
    Mesh m = build_uniform_mesh({0, 0}, {1, 1}, 1, 1);
    EXPECT_EQ(m.n_cells(), 2);
    EXPECT_EQ(m.n_vertices(), 4);
    EXPECT_EQ(m.n_facets(), 5);
    EXPECT_DOUBLE_EQ(total_area(m), 1.0);
    expect_valid(m, 1.0);
}

TEST(Mesh, FineDiagonalCountsAndSize) {
    Mesh m = build_uniform_mesh({0, 0}, {1, 1}, 64, 64);
    EXPECT_EQ(m.n_cells(), 8192);
    EXPECT_NEAR(m.h, std::sqrt(2.0) / 64.0, 1e-15);
    expect_valid(m, 1.0);
}

TEST(Mesh, Crisscross) {
    Mesh m = build_uniform_mesh({0, 0}, {1, 1}, 2, 2, Pattern::crisscross);
    EXPECT_EQ(m.n_cells(), 16);
    EXPECT_EQ(m.n_vertices(), 13);
    expect_valid(m, 1.0);
}

TEST(Mesh, RectangleAndErrors) {
    Mesh m = build_uniform_mesh({-1, 0}, {2, 0.5}, 6, 3, Pattern::crisscross);
    expect_valid(m, 1.5);
    EXPECT_THROW(build_uniform_mesh({0, 0}, {1, 1}, 0, 1), std::invalid_argument);
    EXPECT_THROW(build_uniform_mesh({0, 0}, {0, 1}, 1, 1), std::invalid_argument);
}

TEST(Mesh, RefineCountsAndSize) {
    Mesh m = build_uniform_mesh({0, 0}, {1, 1}, 1, 1);
    Mesh r = refine_uniform(m);
    EXPECT_EQ(r.n_cells(), 8);
    EXPECT_NEAR(r.h, m.h / 2, 1e-15);
    expect_valid(r, 1.0);
    Mesh rr = refine_uniform(build_uniform_mesh({0, 0}, {2, 1}, 3, 2, Pattern::crisscross));
    EXPECT_NEAR(rr.h, build_uniform_mesh({0, 0}, {2, 1}, 3, 2, Pattern::crisscross).h / 2, 1e-14);
    expect_valid(rr, 2.0);
}

TEST(Mesh, RefineMatchesDirectBuild) {
    Mesh a = refine_uniform(build_uniform_mesh({0, 0}, {1, 1}, 4, 4));
    Mesh b = build_uniform_mesh({0, 0}, {1, 1}, 8, 8);
    auto key = [](const Point& p) { return std::make_pair(std::llround(p.x * 1e9), std::llround(p.y * 1e9)); };
    std::set<std::pair<long long, long long>> sa, sb;
    for (const auto& p : a.vertices) sa.insert(key(p));
    for (const auto& p : b.vertices) sb.insert(key(p));
    EXPECT_EQ(sa, sb);
    EXPECT_EQ(a.n_cells(), b.n_cells());
}

TEST(Mesh, BoundaryFacetsDefaultTags) {
    Mesh m = build_uniform_mesh({0, 0}, {1, 1}, 3, 3);
    auto d = boundary_facets(m, Variable::p, BcKind::dirichlet);
    EXPECT_EQ(d.size(), 12u);
    EXPECT_TRUE(boundary_facets(m, Variable::p, BcKind::neumann).empty());
    EXPECT_EQ(boundary_facets(m, Variable::u, BcKind::dirichlet), d);
}

TEST(Mesh, RetagBottomEdge) {
    Mesh m = build_uniform_mesh({0, 0}, {1, 1}, 1, 1);
    int bottom = -1;
    for (int f = 0; f < m.n_facets(); ++f) {
        const auto& a = m.vertices[m.facets[f][0]];
        const auto& b = m.vertices[m.facets[f][1]];
        if (a.y == 0.0 && b.y == 0.0) bottom = f;
    }
    ASSERT_GE(bottom, 0);
    set_boundary_tag(m, bottom, Variable::p, BcKind::neumann);
    auto n = boundary_facets(m, Variable::p, BcKind::neumann);
    ASSERT_EQ(n.size(), 1u);
    EXPECT_EQ(n[0], bottom);
    EXPECT_EQ(boundary_facets(m, Variable::p, BcKind::dirichlet).size(), 3u);
}

TEST(Mesh, EmptyDirichletIsConfigurationError) {
    Mesh m = build_uniform_mesh({0, 0}, {1, 1}, 1, 1);
    for (int f = 0; f < m.n_facets(); ++f)
        if (m.on_boundary(f)) set_boundary_tag(m, f, Variable::u, BcKind::neumann);
    EXPECT_THROW(boundary_facets(m, Variable::u, BcKind::dirichlet), std::runtime_error);
    EXPECT_NO_THROW(boundary_facets(m, Variable::p, BcKind::dirichlet));
}

TEST(Mesh, RefinementInheritsTags) {
    Mesh m = build_uniform_mesh({0, 0}, {1, 1}, 2, 2);
    for (int f = 0; f < m.n_facets(); ++f) {
        if (!m.on_boundary(f)) continue;
        const auto& a = m.vertices[m.facets[f][0]];
        const auto& b = m.vertices[m.facets[f][1]];
        if (a.x == 1.0 && b.x == 1.0) set_boundary_tag(m, f, Variable::u, BcKind::neumann);
    }
    Mesh r = refine_uniform(m);
    for (int f = 0; f < r.n_facets(); ++f) {
        if (!r.on_boundary(f)) continue;
        const auto& a = r.vertices[r.facets[f][0]];
        const auto& b = r.vertices[r.facets[f][1]];
        const bool right = a.x == 1.0 && b.x == 1.0;
        EXPECT_EQ(r.facet_tags[f][1], right ? BcKind::neumann : BcKind::dirichlet);
        EXPECT_EQ(r.facet_tags[f][0], BcKind::dirichlet);
    }
}

TEST(Mesh, BoundaryNormalsPointOutward) {
    Mesh m = build_uniform_mesh({0, 0}, {1, 1}, 3, 2, Pattern::crisscross);
    for (int f = 0; f < m.n_facets(); ++f) {
        if (!m.on_boundary(f)) continue;
        const auto& a = m.vertices[m.facets[f][0]];
        const auto& b = m.vertices[m.facets[f][1]];
        Point mid{0.5 * (a.x + b.x) - 0.5, 0.5 * (a.y + b.y) - 0.5};
        Point n = m.facet_normal(f);
        EXPECT_GT(n.x * mid.x + n.y * mid.y, 0.0);
    }
}

TEST(Mesh, WriteMesh) {
    Mesh m = build_uniform_mesh({0, 0}, {1, 1}, 1, 1);
    std::ostringstream os;
    write_mesh(os, m);
    const std::string text = os.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
}

TEST(Mesh, MakeMeshRejectsInverted) {
    EXPECT_THROW(make_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 2, 1}}), std::invalid_argument);
    Mesh t = make_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
    EXPECT_EQ(t.n_facets(), 3);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "hermite/mesh.hpp"

using namespace hermite;

namespace {

void expect_conforming(const Mesh& m)
{
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : m.triangles())
        for (int i = 0; i < 3; ++i) {
            int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
            if (a > b)
                std::swap(a, b);
            ++count[{ a, b }];
        }
    int boundary = 0;
    for (const auto& [e, c] : count) {
        EXPECT_TRUE(c == 1 || c == 2);
        boundary += c == 1;
    }
    EXPECT_EQ(static_cast<int>(count.size()), m.num_edges());
    int stored_boundary = 0;
    for (const auto& e : m.edges())
        stored_boundary += e.boundary();
    EXPECT_EQ(boundary, stored_boundary);

    // No hanging vertices: no vertex lies strictly inside an edge.
    for (const auto& e : m.edges()) {
        const Point& a = m.vertex(e.v[0]);
        const Point& b = m.vertex(e.v[1]);
        for (int v = 0; v < m.num_vertices(); ++v) {
            if (v == e.v[0] || v == e.v[1])
                continue;
            const Point p = m.vertex(v);
            const double cross = (b - a).x() * (p - a).y() - (b - a).y() * (p - a).x();
            const double s = (p - a).dot(b - a) / (b - a).squaredNorm();
            EXPECT_FALSE(std::abs(cross) < 1e-13 && s > 1e-12 && s < 1 - 1e-12);
        }
    }
}

int count_corners(const Mesh& m)
{
    int c = 0;
    for (int v = 0; v < m.num_vertices(); ++v)
        c += m.vertex_kind(v) == VertexKind::boundary_corner;
    return c;
}

} // namespace

TEST(UniformMesh, SmallestMesh)
{
    const Mesh m = uniform_rect_mesh(Box{}, 1);
    EXPECT_EQ(m.num_triangles(), 2);
    EXPECT_EQ(m.num_vertices(), 4);
    EXPECT_EQ(m.num_edges(), 5);
    EXPECT_EQ(count_corners(m), 4);
    m.validate();
}

TEST(UniformMesh, QuadrantsOnSymmetricSquare)
{
    const Mesh m = uniform_rect_mesh(Box{ -1, 1, -1, 1 }, 4);
    EXPECT_EQ(m.num_triangles(), 32);
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangle(t);
        for (int d = 0; d < 2; ++d) {
            double lo = 1e9, hi = -1e9;
            for (int v : tri) {
                lo = std::min(lo, m.vertex(v)[d]);
                hi = std::max(hi, m.vertex(v)[d]);
            }
            EXPECT_TRUE(lo >= 0.0 || hi <= 0.0) << "triangle " << t << " crosses an axis";
        }
    }
}

TEST(UniformMesh, FlatBoundaryTangent)
{
    const Mesh m = uniform_rect_mesh(Box{}, 2);
    int found = -1;
    for (int v = 0; v < m.num_vertices(); ++v)
        if ((m.vertex(v) - Point(0.5, 0.0)).norm() < 1e-14)
            found = v;
    ASSERT_GE(found, 0);
    EXPECT_EQ(m.vertex_kind(found), VertexKind::boundary_flat);
    EXPECT_NEAR(m.boundary_tangent(found).x(), 1.0, 1e-15);
    EXPECT_NEAR(m.boundary_tangent(found).y(), 0.0, 1e-15);
}

TEST(UniformMesh, RejectsZeroSubdivisions)
{
    EXPECT_THROW(uniform_rect_mesh(Box{}, 0), std::invalid_argument);
    EXPECT_THROW(uniform_rect_mesh(Box{ 1, 0, 0, 1 }, 2), std::invalid_argument);
}

TEST(UniformMesh, MeshSizeIsMaxDiameter)
{
    const Mesh m = uniform_rect_mesh(Box{ -1, 1, -1, 1 }, 8);
    EXPECT_NEAR(m.h(), std::sqrt(2.0) * 0.25, 1e-15);
    EXPECT_NEAR(m.total_area(), 4.0, 1e-13);
}

TEST(Bisection, EmptyMarkingIsIdentity)
{
    const Mesh m = uniform_rect_mesh(Box{}, 2);
    const Mesh r = newest_vertex_bisect(m, {});
    EXPECT_EQ(r.vertices(), m.vertices());
    EXPECT_EQ(r.triangles(), m.triangles());
}

TEST(Bisection, SingleMarkedTriangleClosure)
{
    const Mesh m = uniform_rect_mesh(Box{}, 1);
    for (int t = 0; t < 2; ++t) {
        const int marked[] = { t };
        const Mesh r = newest_vertex_bisect(m, marked);
        EXPECT_TRUE(r.num_triangles() == 3 || r.num_triangles() == 4);
        expect_conforming(r);
        r.validate();
        EXPECT_NEAR(r.total_area(), 1.0, 1e-12);
    }
}

TEST(Bisection, MarkAllDoublesCount)
{
    const Mesh m = uniform_rect_mesh(Box{}, 3);
    std::vector<int> all(m.num_triangles());
    for (int i = 0; i < m.num_triangles(); ++i)
        all[i] = i;
    const Mesh r = newest_vertex_bisect(m, all);
    EXPECT_EQ(r.num_triangles(), 2 * m.num_triangles());
    for (int t = 0; t < r.num_triangles(); ++t)
        EXPECT_EQ(r.generation(t), 1);
    expect_conforming(r);
}

TEST(Bisection, RandomMarkingsStayConforming)
{
    std::mt19937 rng(7);
    Mesh m = uniform_rect_mesh(Box{ -1, 1, -1, 1 }, 2);
    for (int round = 0; round < 8; ++round) {
        std::vector<int> marked;
        std::uniform_int_distribution<int> pick(0, m.num_triangles() - 1);
        for (int i = 0; i < 3; ++i)
            marked.push_back(pick(rng));
        m = newest_vertex_bisect(m, marked);
        m.validate();
        expect_conforming(m);
        EXPECT_NEAR(m.total_area(), 4.0, 4e-12);
        EXPECT_EQ(count_corners(m), 4);
    }
}

TEST(GradedMesh, HugeConstantMarksNothing)
{
    const auto seq = graded_mesh_sequence(1, 1e6);
    ASSERT_EQ(seq.size(), 1u);
    EXPECT_EQ(seq[0].num_triangles(), uniform_rect_mesh(Box{}, 4).num_triangles());
}

TEST(GradedMesh, ConcentratesTowardTopEdge)
{
    const auto seq = graded_mesh_sequence(8, 120.0);
    ASSERT_GE(seq.size(), 2u);
    for (std::size_t l = 1; l < seq.size(); ++l) {
        const Mesh& m = seq[l];
        m.validate();
        EXPECT_NEAR(m.total_area(), 1.0, 1e-12);
        EXPECT_EQ(count_corners(m), 4);
        double top_min = 1e9, bottom_max = 0.0;
        for (int t = 0; t < m.num_triangles(); ++t) {
            const double y = m.barycenter(t).y();
            if (y > 0.9)
                top_min = std::min(top_min, m.area(t));
            if (y < 0.1)
                bottom_max = std::max(bottom_max, m.area(t));
        }
        EXPECT_LT(top_min, bottom_max) << "level " << l;
    }
}

TEST(MeshIo, RoundTrip)
{
    const Mesh m = graded_mesh_sequence(4, 120.0).back();
    std::stringstream ss;
    write_mesh(ss, m);
    const Mesh r = read_mesh(ss);
    EXPECT_EQ(r.triangles(), m.triangles());
    ASSERT_EQ(r.num_vertices(), m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v)
        EXPECT_EQ(r.vertex(v), m.vertex(v));
    EXPECT_EQ(r.num_edges(), m.num_edges());
}

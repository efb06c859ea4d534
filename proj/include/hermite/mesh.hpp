#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hermite {

using Point = Eigen::Vector2d;

enum class VertexKind
{
    interior,
    boundary_flat,
    boundary_corner
};

/// Mesh edge. `tri[1] == -1` on the boundary.
struct Edge
{
    std::array<int, 2> v;
    std::array<int, 2> tri;

    bool boundary() const { return tri[1] < 0; }
};

/// Axis-aligned rectangle, the only domain shape the built-in problems use.
struct Box
{
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;

    double area() const { return (xmax - xmin) * (ymax - ymin); }
};

/**
 * Conforming triangulation of a convex polygon.
 *
 * Triangles are stored counter-clockwise. Local edge `i` of a triangle is the
 * edge opposite its local vertex `i`. The refinement edge of a triangle is the
 * local edge bisected by newest-vertex bisection; its opposite vertex is the
 * "newest vertex".
 *
 * Immutable after construction; refinement returns a new mesh.
 */
class Mesh
{
  public:
    Mesh() = default;

    /// Builds topology from vertex coordinates and CCW triangles. When
    /// `refinement_edge` is empty, each triangle's longest edge is used.
    Mesh(std::vector<Point> vertices,
         std::vector<std::array<int, 3>> triangles,
         std::vector<int> refinement_edge = {},
         std::vector<int> generation = {});

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    const Point& vertex(int i) const { return vertices_[i]; }
    const std::vector<Point>& vertices() const { return vertices_; }
    const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const Edge& edge(int e) const { return edges_[e]; }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Global edge index of local edge `i` (opposite local vertex `i`).
    int triangle_edge(int t, int i) const { return tri_edges_[t][i]; }
    const std::array<int, 3>& triangle_edges(int t) const { return tri_edges_[t]; }

    VertexKind vertex_kind(int v) const { return vertex_kind_[v]; }
    /// Unit tangent along the boundary (counter-clockwise traversal) at a
    /// boundary-flat vertex; zero for other vertices.
    const Point& boundary_tangent(int v) const { return boundary_tangent_[v]; }

    double area(int t) const { return area_[t]; }
    double diameter(int t) const { return diameter_[t]; }
    Point barycenter(int t) const;
    /// Max element diameter.
    double h() const { return h_; }
    double total_area() const;

    int refinement_edge(int t) const { return refinement_edge_[t]; }
    int generation(int t) const { return generation_[t]; }

    /// Checks the structural invariants (positive areas, edge multiplicity,
    /// closed boundary loops). Throws std::logic_error on failure.
    void validate() const;

    /// Corners of the polygonal domain, in index order.
    std::vector<int> corner_vertices() const;

  private:
    void build_topology();
    void classify_vertices();

    std::vector<Point> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<std::array<int, 3>> tri_edges_;
    std::vector<Edge> edges_;
    std::vector<VertexKind> vertex_kind_;
    std::vector<Point> boundary_tangent_;
    std::vector<double> area_;
    std::vector<double> diameter_;
    std::vector<int> refinement_edge_;
    std::vector<int> generation_;
    double h_ = 0.0;
};

/// n x n squares, each split by its lower-left to upper-right diagonal.
Mesh uniform_rect_mesh(const Box& box, int n);

/// Newest-vertex bisection of the marked triangles plus conforming closure.
Mesh newest_vertex_bisect(const Mesh& mesh, std::span<const int> marked);

/// Boundary-layer grading toward y = 1 on the unit square: at each level mark
/// every triangle with |T| > C (y_T - 1)^2 / #T and bisect. Stops early when
/// nothing is marked. `coarse_n` is the subdivision count of the initial mesh.
std::vector<Mesh> graded_mesh_sequence(int levels, double grading, int coarse_n = 4);

/// Plain-text mesh format: vertex count, one "x y" line per vertex, triangle
/// count, one "i j k" line per triangle (0-based, CCW).
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

} // namespace hermite

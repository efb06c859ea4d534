#include "hermite/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace hermite {

namespace {

std::uint64_t
pair_key(int a, int b)
{
    if (a > b)
        std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double
cross(const Point& a, const Point& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

} // namespace

Mesh::Mesh(std::vector<Point> vertices,
           std::vector<std::array<int, 3>> triangles,
           std::vector<int> refinement_edge,
           std::vector<int> generation)
  : vertices_(std::move(vertices))
  , triangles_(std::move(triangles))
  , refinement_edge_(std::move(refinement_edge))
  , generation_(std::move(generation))
{
    const int nt = num_triangles();
    const int nv = num_vertices();
    for (const auto& tri : triangles_)
        for (int v : tri)
            if (v < 0 || v >= nv)
                throw std::invalid_argument("Mesh: triangle references a missing vertex");

    area_.resize(nt);
    diameter_.resize(nt);
    h_ = 0.0;
    for (int t = 0; t < nt; ++t) {
        const auto& [a, b, c] = triangles_[t];
        const Point& pa = vertices_[a];
        const Point& pb = vertices_[b];
        const Point& pc = vertices_[c];
        area_[t] = 0.5 * cross(pb - pa, pc - pa);
        diameter_[t] = std::max({ (pb - pa).norm(), (pc - pb).norm(), (pa - pc).norm() });
        h_ = std::max(h_, diameter_[t]);
    }

    if (refinement_edge_.empty()) {
        refinement_edge_.resize(nt);
        for (int t = 0; t < nt; ++t) {
            const auto& tri = triangles_[t];
            int best = 0;
            double best_len = -1.0;
            for (int i = 0; i < 3; ++i) {
                const double len = (vertices_[tri[(i + 2) % 3]] - vertices_[tri[(i + 1) % 3]]).norm();
                // strict comparison with a relative margin keeps ties on the lowest index
                if (len > best_len * (1.0 + 1e-12)) {
                    best_len = len;
                    best = i;
                }
            }
            refinement_edge_[t] = best;
        }
    }
    if (generation_.empty())
        generation_.assign(nt, 0);
    if (static_cast<int>(refinement_edge_.size()) != nt || static_cast<int>(generation_.size()) != nt)
        throw std::invalid_argument("Mesh: per-triangle metadata has the wrong length");

    build_topology();
    classify_vertices();
}

void
Mesh::build_topology()
{
    const int nt = num_triangles();
    tri_edges_.assign(nt, { -1, -1, -1 });
    edges_.clear();
    edges_.reserve(static_cast<std::size_t>(nt) * 3 / 2 + 8);
    std::unordered_map<std::uint64_t, int> lookup;
    lookup.reserve(static_cast<std::size_t>(nt) * 2);

    for (int t = 0; t < nt; ++t) {
        const auto& tri = triangles_[t];
        for (int i = 0; i < 3; ++i) {
            const int a = tri[(i + 1) % 3];
            const int b = tri[(i + 2) % 3];
            const auto key = pair_key(a, b);
            auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(edges_.size()));
            if (inserted) {
                edges_.push_back(Edge{ { std::min(a, b), std::max(a, b) }, { t, -1 } });
            } else {
                Edge& e = edges_[it->second];
                if (e.tri[1] >= 0)
                    throw std::invalid_argument("Mesh: edge shared by more than two triangles");
                e.tri[1] = t;
            }
            tri_edges_[t][i] = it->second;
        }
    }
}

void
Mesh::classify_vertices()
{
    const int nv = num_vertices();
    vertex_kind_.assign(nv, VertexKind::interior);
    boundary_tangent_.assign(nv, Point::Zero());

    // CCW traversal: incoming and outgoing boundary edge per vertex
    std::vector<int> next(nv, -1), prev(nv, -1);
    for (int t = 0; t < num_triangles(); ++t) {
        const auto& tri = triangles_[t];
        for (int i = 0; i < 3; ++i) {
            if (!edges_[tri_edges_[t][i]].boundary())
                continue;
            const int a = tri[(i + 1) % 3];
            const int b = tri[(i + 2) % 3];
            if (next[a] >= 0 || prev[b] >= 0)
                throw std::invalid_argument("Mesh: boundary is not a simple closed curve");
            next[a] = b;
            prev[b] = a;
        }
    }

    for (int v = 0; v < nv; ++v) {
        if (next[v] < 0 && prev[v] < 0)
            continue;
        if (next[v] < 0 || prev[v] < 0)
            throw std::invalid_argument("Mesh: open boundary loop");
        const Point in = vertices_[v] - vertices_[prev[v]];
        const Point out = vertices_[next[v]] - vertices_[v];
        if (std::abs(cross(in, out)) <= 1e-12 * in.norm() * out.norm() && in.dot(out) > 0.0) {
            vertex_kind_[v] = VertexKind::boundary_flat;
            boundary_tangent_[v] = out.normalized();
        } else {
            vertex_kind_[v] = VertexKind::boundary_corner;
        }
    }
}

Point
Mesh::barycenter(int t) const
{
    const auto& [a, b, c] = triangles_[t];
    return (vertices_[a] + vertices_[b] + vertices_[c]) / 3.0;
}

double
Mesh::total_area() const
{
    double sum = 0.0;
    for (double a : area_)
        sum += a;
    return sum;
}

void
Mesh::validate() const
{
    for (int t = 0; t < num_triangles(); ++t)
        if (!(area_[t] > 0.0))
            throw std::logic_error("Mesh: triangle " + std::to_string(t) + " has nonpositive area");

    // Rebuilding from the triangle list must reproduce the stored edge set.
    const Mesh rebuilt(vertices_, triangles_, refinement_edge_, generation_);
    if (rebuilt.edges_.size() != edges_.size())
        throw std::logic_error("Mesh: edge table out of sync with triangles");
    for (std::size_t e = 0; e < edges_.size(); ++e)
        if (rebuilt.edges_[e].v != edges_[e].v || rebuilt.edges_[e].tri != edges_[e].tri)
            throw std::logic_error("Mesh: edge table out of sync with triangles");

    // Every vertex on an edge's interior would be a hanging node.
    std::vector<int> used(num_vertices(), 0);
    for (const auto& tri : triangles_)
        for (int v : tri)
            used[v] = 1;
    for (int v = 0; v < num_vertices(); ++v)
        if (!used[v])
            throw std::logic_error("Mesh: vertex " + std::to_string(v) + " belongs to no triangle");

    // Interior vertices: the incident angles must sum to 2*pi; boundary ones to at most pi.
    std::vector<double> angle(num_vertices(), 0.0);
    for (const auto& tri : triangles_) {
        for (int i = 0; i < 3; ++i) {
            const Point a = vertices_[tri[(i + 1) % 3]] - vertices_[tri[i]];
            const Point b = vertices_[tri[(i + 2) % 3]] - vertices_[tri[i]];
            angle[tri[i]] += std::atan2(cross(a, b), a.dot(b));
        }
    }
    for (int v = 0; v < num_vertices(); ++v) {
        if (vertex_kind_[v] == VertexKind::interior && std::abs(angle[v] - 2.0 * M_PI) > 1e-9)
            throw std::logic_error("Mesh: hanging or overlapping vertex " + std::to_string(v));
        if (vertex_kind_[v] == VertexKind::boundary_flat && std::abs(angle[v] - M_PI) > 1e-9)
            throw std::logic_error("Mesh: hanging boundary vertex " + std::to_string(v));
    }
}

std::vector<int>
Mesh::corner_vertices() const
{
    std::vector<int> out;
    for (int v = 0; v < num_vertices(); ++v)
        if (vertex_kind_[v] == VertexKind::boundary_corner)
            out.push_back(v);
    return out;
}

Mesh
uniform_rect_mesh(const Box& box, int n)
{
    if (n < 1)
        throw std::invalid_argument("uniform_rect_mesh: need at least one subdivision");
    if (!(box.xmax > box.xmin) || !(box.ymax > box.ymin))
        throw std::invalid_argument("uniform_rect_mesh: empty box");

    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j) {
        // exact endpoints and exact midlines for even n
        const double y = (j == n) ? box.ymax : box.ymin + (box.ymax - box.ymin) * j / n;
        for (int i = 0; i <= n; ++i) {
            const double x = (i == n) ? box.xmax : box.xmin + (box.xmax - box.xmin) * i / n;
            vertices.emplace_back(x, y);
        }
    }
    auto id = [n](int i, int j) { return j * (n + 1) + i; };

    std::vector<std::array<int, 3>> triangles;
    triangles.reserve(2 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int ll = id(i, j), lr = id(i + 1, j), ur = id(i + 1, j + 1), ul = id(i, j + 1);
            triangles.push_back({ lr, ur, ll });
            triangles.push_back({ ul, ll, ur });
        }
    }
    return Mesh(std::move(vertices), std::move(triangles));
}

Mesh
newest_vertex_bisect(const Mesh& mesh, std::span<const int> marked)
{
    if (marked.empty())
        return mesh;

    const int nt = mesh.num_triangles();
    std::vector<char> edge_marked(mesh.num_edges(), 0);
    for (int t : marked) {
        if (t < 0 || t >= nt)
            throw std::invalid_argument("newest_vertex_bisect: marked index out of range");
        edge_marked[mesh.triangle_edge(t, mesh.refinement_edge(t))] = 1;
    }

    // Closure: a triangle with any marked edge must bisect its refinement edge.
    bool changed = true;
    while (changed) {
        changed = false;
        for (int t = 0; t < nt; ++t) {
            const auto& te = mesh.triangle_edges(t);
            const int ref = te[mesh.refinement_edge(t)];
            if (edge_marked[ref])
                continue;
            if (edge_marked[te[0]] || edge_marked[te[1]] || edge_marked[te[2]]) {
                edge_marked[ref] = 1;
                changed = true;
            }
        }
    }

    std::vector<Point> vertices = mesh.vertices();
    std::unordered_map<std::uint64_t, int> midpoint;
    for (int e = 0; e < mesh.num_edges(); ++e) {
        if (!edge_marked[e])
            continue;
        const auto& ed = mesh.edge(e);
        midpoint.emplace(pair_key(ed.v[0], ed.v[1]), static_cast<int>(vertices.size()));
        vertices.push_back(0.5 * (mesh.vertex(ed.v[0]) + mesh.vertex(ed.v[1])));
    }

    std::vector<std::array<int, 3>> triangles;
    std::vector<int> generation;
    triangles.reserve(static_cast<std::size_t>(nt) + 2 * midpoint.size());
    generation.reserve(triangles.capacity());

    // (a0; a1, a2): a0 is the newest vertex, (a1, a2) the refinement edge.
    auto refine = [&](auto&& self, int a0, int a1, int a2, int gen) -> void {
        auto it = midpoint.find(pair_key(a1, a2));
        if (it == midpoint.end()) {
            triangles.push_back({ a0, a1, a2 });
            generation.push_back(gen);
            return;
        }
        const int m = it->second;
        self(self, m, a0, a1, gen + 1);
        self(self, m, a2, a0, gen + 1);
    };

    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangle(t);
        const int r = mesh.refinement_edge(t);
        refine(refine, tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3], mesh.generation(t));
    }

    std::vector<int> refinement_edge(triangles.size(), 0);
    return Mesh(std::move(vertices), std::move(triangles), std::move(refinement_edge), std::move(generation));
}

std::vector<Mesh>
graded_mesh_sequence(int levels, double grading, int coarse_n)
{
    if (levels < 1)
        throw std::invalid_argument("graded_mesh_sequence: need at least one level");
    if (!(grading > 0.0))
        throw std::invalid_argument("graded_mesh_sequence: grading constant must be positive");

    std::vector<Mesh> out;
    out.push_back(uniform_rect_mesh(Box{}, coarse_n));
    while (static_cast<int>(out.size()) < levels) {
        const Mesh& cur = out.back();
        const double count = cur.num_triangles();
        std::vector<int> marked;
        for (int t = 0; t < cur.num_triangles(); ++t) {
            const double d = cur.barycenter(t).y() - 1.0;
            if (cur.area(t) > grading * d * d / count)
                marked.push_back(t);
        }
        if (marked.empty())
            break;
        out.push_back(newest_vertex_bisect(cur, marked));
    }
    return out;
}

void
write_mesh(std::ostream& os, const Mesh& mesh)
{
    const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
    os << mesh.num_vertices() << '\n';
    for (const auto& p : mesh.vertices())
        os << p.x() << ' ' << p.y() << '\n';
    os << mesh.num_triangles() << '\n';
    for (const auto& t : mesh.triangles())
        os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os.precision(old_precision);
}

Mesh
read_mesh(std::istream& is)
{
    int nv = 0;
    if (!(is >> nv) || nv < 3)
        throw std::invalid_argument("read_mesh: bad vertex count");
    std::vector<Point> vertices(nv);
    for (auto& p : vertices)
        if (!(is >> p.x() >> p.y()))
            throw std::invalid_argument("read_mesh: truncated vertex list");
    int nt = 0;
    if (!(is >> nt) || nt < 1)
        throw std::invalid_argument("read_mesh: bad triangle count");
    std::vector<std::array<int, 3>> triangles(nt);
    for (auto& t : triangles)
        if (!(is >> t[0] >> t[1] >> t[2]))
            throw std::invalid_argument("read_mesh: truncated triangle list");
    return Mesh(std::move(vertices), std::move(triangles));
}

} // namespace hermite

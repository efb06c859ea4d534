#include "hermite/forms.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hermite/errors.hpp"
#include "hermite/io.hpp"

namespace hermite {

namespace {

Point map_point(const Mesh& m, int t, const std::array<double, 2>& r)
{
    const auto& tri = m.triangle(t);
    const Point& p0 = m.vertex(tri[0]);
    return p0 + r[0] * (m.vertex(tri[1]) - p0) + r[1] * (m.vertex(tri[2]) - p0);
}

// Outward unit normal of triangle t on the edge (a, b).
Eigen::Vector2d outward_normal(const Mesh& m, int t, const Point& a, const Point& b)
{
    const Eigen::Vector2d d = (b - a).normalized();
    Eigen::Vector2d n(d.y(), -d.x());
    if (n.dot(m.barycenter(t) - a) > 0.0)
        n = -n;
    return n;
}

struct LocalScatter
{
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd rhs;
};

// Jump of the normal derivative of each DOF in the union of both elements'
// DOFs, at one face point.
struct FaceJump
{
    std::vector<int> dofs;      // union of global DOFs
    std::vector<int> plus_pos;  // position in `dofs` of each local DOF of plus
    std::vector<int> minus_pos; // same for minus
    std::vector<int> shared;    // local indices (in plus) of DOFs shared with minus
};

FaceJump face_layout(const HermiteSpace& space, const FaceData& f)
{
    FaceJump j;
    const auto pd = space.element_dofs(f.plus);
    const auto md = space.element_dofs(f.minus);
    for (int d : pd) {
        j.plus_pos.push_back(static_cast<int>(j.dofs.size()));
        j.dofs.push_back(d);
    }
    for (int d : md) {
        const auto it = std::find(j.dofs.begin(), j.dofs.begin() + pd.size(), d);
        if (it != j.dofs.begin() + pd.size()) {
            j.minus_pos.push_back(static_cast<int>(it - j.dofs.begin()));
        } else {
            j.minus_pos.push_back(static_cast<int>(j.dofs.size()));
            j.dofs.push_back(d);
        }
    }
    for (int i = 0; i < static_cast<int>(pd.size()); ++i)
        if (std::find(md.begin(), md.end(), pd[i]) != md.end())
            j.shared.push_back(i);
    return j;
}

double eps_or_default(std::optional<double> eps_used, double eps)
{
    const double e = eps_used.value_or(eps);
    if (!(e >= 0.0 && e <= 1.0))
        throw std::invalid_argument("epsilon for the jump weight must lie in [0, 1]");
    return e;
}

} // namespace

QuadRule volume_rule(int degree)
{
    return triangle_rule(2 * degree + 2);
}

QuadRule face_rule(int degree)
{
    return edge_rule(2 * degree);
}

double face_coefficient(double eps)
{
    return 2.0 - std::sqrt(1.0 - eps);
}

FaceTermCache::FaceTermCache(const Mesh& mesh)
{
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Edge& ed = mesh.edge(e);
        if (ed.boundary())
            continue;
        FaceData f;
        f.edge = e;
        f.plus = ed.tri[0];
        f.minus = ed.tri[1];
        f.a = mesh.vertex(ed.v[0]);
        f.b = mesh.vertex(ed.v[1]);
        f.length = (f.b - f.a).norm();
        f.tangent = (f.b - f.a) / f.length;
        f.normal = outward_normal(mesh, f.plus, f.a, f.b);
        faces_.push_back(f);
    }
}

VolumeCache::VolumeCache(const HermiteSpace& space, const HjbProblem& problem)
    : rule_(volume_rule(space.degree()))
{
    const Mesh& m = space.mesh();
    const std::size_t n = static_cast<std::size_t>(m.num_triangles()) * rule_.size();
    points_.reserve(n);
    weights_.reserve(n);
    families_.reserve(n);
    for (int t = 0; t < m.num_triangles(); ++t) {
        for (int q = 0; q < rule_.size(); ++q) {
            points_.push_back(map_point(m, t, rule_.points[q]));
            weights_.push_back(2.0 * m.area(t) * rule_.weights[q]);
            families_.push_back(problem.family_at(points_.back()));
        }
    }
}

ControlField uniform_control_field(const HermiteSpace& space, const Control& alpha)
{
    ControlField cf;
    cf.points_per_element = volume_rule(space.degree()).size();
    cf.alpha.assign(static_cast<std::size_t>(space.mesh().num_triangles()) * cf.points_per_element, alpha);
    return cf;
}

std::vector<double> normal_jump(const HermiteSpace& space, const Eigen::VectorXd& coeffs, int edge, std::span<const double> params)
{
    const Mesh& m = space.mesh();
    const Edge& ed = m.edge(edge);
    if (ed.boundary())
        throw std::invalid_argument("normal_jump needs an interior edge");
    const Point& a = m.vertex(ed.v[0]);
    const Point& b = m.vertex(ed.v[1]);
    const Eigen::Vector2d np = outward_normal(m, ed.tri[0], a, b);
    std::vector<double> out;
    out.reserve(params.size());
    for (double s : params) {
        const Point x = a + s * (b - a);
        const Jet plus = space.evaluate(coeffs, ed.tri[0], x);
        const Jet minus = space.evaluate(coeffs, ed.tri[1], x);
        out.push_back(plus.grad.dot(np) - minus.grad.dot(np));
    }
    return out;
}

namespace {

// Shared assembly: volume part with frozen coefficients per quadrature point,
// jump part with weight `coef`.
SparseSystem assemble_frozen(const HermiteSpace& space,
                             const HjbProblem& problem,
                             const ControlField& controls,
                             const VolumeCache& cache,
                             double coef)
{
    const Mesh& m = space.mesh();
    const int n = space.local_size();
    const int nq = cache.points_per_element();
    if (controls.points_per_element != nq
        || controls.alpha.size() != static_cast<std::size_t>(m.num_triangles()) * nq)
        throw std::invalid_argument("control field does not cover every volume quadrature point");
    const double lambda = problem.lambda;

    SparseSystem sys;
    sys.free_dofs = space.free_dofs();
    sys.rhs = Eigen::VectorXd::Zero(space.num_free());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m.num_triangles()) * n * n * 2);

    BasisEval be;
    Eigen::MatrixXd Ke(n, n);
    Eigen::VectorXd Fe(n), Lphi(n), test(n);
    for (int t = 0; t < m.num_triangles(); ++t) {
        Ke.setZero();
        Fe.setZero();
        const ElementBasis& basis = space.basis(t);
        for (int q = 0; q < nq; ++q) {
            const Coefficients k = cache.family(t, q)(controls.at(t, q));
            const double gamma = problem_gamma(problem, k);
            if (!(gamma > 0.0))
                throw cordes_error("nonpositive gamma at a quadrature point");
            basis.eval(cache.point(t, q), 2, be);
            Lphi = k.A(0, 0) * be.hess.col(0) + (k.A(0, 1) + k.A(1, 0)) * be.hess.col(1) + k.A(1, 1) * be.hess.col(2)
                   + be.grad * k.b - k.c * be.value;
            test = be.hess.col(0) + be.hess.col(2) - lambda * be.value;
            const double w = cache.weight(t, q) * gamma;
            Ke.noalias() += (w * test) * Lphi.transpose();
            Fe += (w * k.f) * test;
        }
        const auto dofs = space.element_dofs(t);
        for (int i = 0; i < n; ++i) {
            const int fi = space.free_index(dofs[i]);
            if (fi < 0)
                continue;
            sys.rhs[fi] += Fe[i];
            for (int j = 0; j < n; ++j) {
                const int fj = space.free_index(dofs[j]);
                if (fj >= 0)
                    trip.emplace_back(fi, fj, Ke(i, j));
            }
        }
    }

    const QuadRule fr = face_rule(space.degree());
    const FaceTermCache faces(m);
    BasisEval bp, bm;
    for (const FaceData& f : faces.faces()) {
        const FaceJump layout = face_layout(space, f);
        const int nu = static_cast<int>(layout.dofs.size());
        const int ns = static_cast<int>(layout.shared.size());
        Eigen::MatrixXd Kf = Eigen::MatrixXd::Zero(ns, nu);
        Eigen::VectorXd jump(nu);
        Eigen::VectorXd tst(ns);
        const Eigen::Vector2d tt = f.tangent;
        for (int q = 0; q < fr.size(); ++q) {
            const Point x = f.a + fr.points[q][0] * (f.b - f.a);
            space.basis(f.plus).eval(x, 2, bp);
            space.basis(f.minus).eval(x, 1, bm);
            jump.setZero();
            const Eigen::VectorXd gp = bp.grad * f.normal;
            const Eigen::VectorXd gm = bm.grad * f.normal;
            for (int j = 0; j < n; ++j) {
                jump[layout.plus_pos[j]] += gp[j];
                jump[layout.minus_pos[j]] -= gm[j];
            }
            for (int s = 0; s < ns; ++s) {
                const int i = layout.shared[s];
                const double dtt = tt.x() * tt.x() * bp.hess(i, 0) + 2.0 * tt.x() * tt.y() * bp.hess(i, 1)
                                   + tt.y() * tt.y() * bp.hess(i, 2);
                tst[s] = dtt - lambda * bp.value[i];
            }
            Kf.noalias() -= (coef * f.length * fr.weights[q]) * tst * jump.transpose();
        }
        const auto pd = space.element_dofs(f.plus);
        for (int s = 0; s < ns; ++s) {
            const int fi = space.free_index(pd[layout.shared[s]]);
            if (fi < 0)
                continue;
            for (int j = 0; j < nu; ++j) {
                const int fj = space.free_index(layout.dofs[j]);
                if (fj >= 0)
                    trip.emplace_back(fi, fj, Kf(s, j));
            }
        }
    }

    sys.matrix.resize(space.num_free(), space.num_free());
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.matrix.makeCompressed();
    return sys;
}

} // namespace

SparseSystem assemble_nondiv_system(const HermiteSpace& space, const NondivProblem& problem, double eps_used)
{
    const HjbProblem h = as_hjb(problem);
    const VolumeCache cache(space, h);
    const ControlField cf = uniform_control_field(space, h.controls.grid_point(0));
    return assemble_frozen(space, h, cf, cache, face_coefficient(eps_or_default(eps_used, problem.epsilon)));
}

SparseSystem assemble_hjb_linearization(const HermiteSpace& space,
                                        const HjbProblem& problem,
                                        const ControlField& controls,
                                        const VolumeCache& cache,
                                        std::optional<double> eps_used)
{
    return assemble_frozen(space, problem, controls, cache, face_coefficient(eps_or_default(eps_used, problem.epsilon)));
}

SparseSystem assemble_hjb_linearization(const HermiteSpace& space,
                                        const HjbProblem& problem,
                                        const ControlField& controls,
                                        std::optional<double> eps_used)
{
    const VolumeCache cache(space, problem);
    return assemble_hjb_linearization(space, problem, controls, cache, eps_used);
}

Eigen::VectorXd hjb_residual(const HermiteSpace& space,
                             const HjbProblem& problem,
                             const Eigen::VectorXd& u,
                             const VolumeCache& cache,
                             std::optional<double> eps_used)
{
    const Mesh& m = space.mesh();
    const int n = space.local_size();
    const double lambda = problem.lambda;
    const double coef = face_coefficient(eps_or_default(eps_used, problem.epsilon));
    Eigen::VectorXd r = Eigen::VectorXd::Zero(space.num_free());

    BasisEval be;
    Eigen::VectorXd Fe(n);
    for (int t = 0; t < m.num_triangles(); ++t) {
        Fe.setZero();
        const Eigen::VectorXd loc = space.gather(u, t);
        for (int q = 0; q < cache.points_per_element(); ++q) {
            space.basis(t).eval(cache.point(t, q), 2, be);
            const double val = be.value.dot(loc);
            const Eigen::Vector2d grad = be.grad.transpose() * loc;
            const Eigen::Vector3d h = be.hess.transpose() * loc;
            Eigen::Matrix2d hess;
            hess << h[0], h[1], h[1], h[2];
            const ArgmaxResult sup = hamiltonian_argmax(problem, cache.family(t, q), val, grad, hess, Weighting::gamma_weighted);
            Fe += (cache.weight(t, q) * sup.value) * (be.hess.col(0) + be.hess.col(2) - lambda * be.value);
        }
        const auto dofs = space.element_dofs(t);
        for (int i = 0; i < n; ++i) {
            const int fi = space.free_index(dofs[i]);
            if (fi >= 0)
                r[fi] += Fe[i];
        }
    }

    const QuadRule fr = face_rule(space.degree());
    const FaceTermCache faces(m);
    BasisEval bp, bm;
    for (const FaceData& f : faces.faces()) {
        const Eigen::VectorXd lp = space.gather(u, f.plus);
        const Eigen::VectorXd lm = space.gather(u, f.minus);
        const auto pd = space.element_dofs(f.plus);
        const auto md = space.element_dofs(f.minus);
        const Eigen::Vector2d tt = f.tangent;
        for (int q = 0; q < fr.size(); ++q) {
            const Point x = f.a + fr.points[q][0] * (f.b - f.a);
            space.basis(f.plus).eval(x, 2, bp);
            space.basis(f.minus).eval(x, 1, bm);
            const double jump = (bp.grad.transpose() * lp).dot(f.normal) - (bm.grad.transpose() * lm).dot(f.normal);
            const double w = coef * f.length * fr.weights[q] * jump;
            for (int i = 0; i < n; ++i) {
                if (std::find(md.begin(), md.end(), pd[i]) == md.end())
                    continue;
                const int fi = space.free_index(pd[i]);
                if (fi < 0)
                    continue;
                const double dtt = tt.x() * tt.x() * bp.hess(i, 0) + 2.0 * tt.x() * tt.y() * bp.hess(i, 1)
                                   + tt.y() * tt.y() * bp.hess(i, 2);
                r[fi] -= w * (dtt - lambda * bp.value[i]);
            }
        }
    }
    return r;
}

Eigen::VectorXd hjb_residual(const HermiteSpace& space, const HjbProblem& problem, const Eigen::VectorXd& u)
{
    const VolumeCache cache(space, problem);
    return hjb_residual(space, problem, u, cache);
}

ControlField argmax_control_field(const HermiteSpace& space,
                                  const HjbProblem& problem,
                                  const Eigen::VectorXd& u,
                                  const VolumeCache& cache)
{
    const Mesh& m = space.mesh();
    ControlField cf;
    cf.points_per_element = cache.points_per_element();
    cf.alpha.resize(static_cast<std::size_t>(m.num_triangles()) * cf.points_per_element);
    BasisEval be;
    for (int t = 0; t < m.num_triangles(); ++t) {
        const Eigen::VectorXd loc = space.gather(u, t);
        for (int q = 0; q < cf.points_per_element; ++q) {
            space.basis(t).eval(cache.point(t, q), 2, be);
            const Eigen::Vector3d h = be.hess.transpose() * loc;
            Eigen::Matrix2d hess;
            hess << h[0], h[1], h[1], h[2];
            cf.alpha[static_cast<std::size_t>(t) * cf.points_per_element + q]
                = hamiltonian_argmax(problem, cache.family(t, q), be.value.dot(loc), be.grad.transpose() * loc, hess,
                                     Weighting::unweighted)
                      .alpha;
        }
    }
    return cf;
}

void write_matrix_coo(std::ostream& os, const SparseSystem& system)
{
    for (int r = 0; r < system.matrix.outerSize(); ++r)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(system.matrix, r); it; ++it)
            os << it.row() << ' ' << it.col() << ' ' << format_number(it.value()) << '\n';
}

} // namespace hermite

#include "hermite/fespace.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "hermite/errors.hpp"
#include "hermite/io.hpp"
#include "hermite/quadrature.hpp"

namespace hermite {

namespace {

void scaled_monomials(int degree, const Point& c, double h, const Point& x, int order, MonomialEval& out)
{
    const int n = polynomial_dimension(degree);
    const double xi = (x.x() - c.x()) / h;
    const double eta = (x.y() - c.y()) / h;
    std::array<double, 8> px{}, py{};
    px[0] = py[0] = 1.0;
    for (int i = 1; i <= degree; ++i) {
        px[i] = px[i - 1] * xi;
        py[i] = py[i - 1] * eta;
    }
    out.value.resize(n);
    if (order >= 1) {
        out.dx.resize(n);
        out.dy.resize(n);
    }
    if (order >= 2) {
        out.dxx.resize(n);
        out.dxy.resize(n);
        out.dyy.resize(n);
    }
    const double ih = 1.0 / h, ih2 = ih * ih;
    int idx = 0;
    for (int d = 0; d <= degree; ++d) {
        for (int a = d; a >= 0; --a, ++idx) {
            const int b = d - a;
            out.value[idx] = px[a] * py[b];
            if (order >= 1) {
                out.dx[idx] = a > 0 ? a * px[a - 1] * py[b] * ih : 0.0;
                out.dy[idx] = b > 0 ? b * px[a] * py[b - 1] * ih : 0.0;
            }
            if (order >= 2) {
                out.dxx[idx] = a > 1 ? a * (a - 1) * px[a - 2] * py[b] * ih2 : 0.0;
                out.dxy[idx] = (a > 0 && b > 0) ? a * b * px[a - 1] * py[b - 1] * ih2 : 0.0;
                out.dyy[idx] = b > 1 ? b * (b - 1) * px[a] * py[b - 2] * ih2 : 0.0;
            }
        }
    }
}

Point reference_to_physical(const Mesh& mesh, int t, const std::array<double, 2>& ref)
{
    const auto& tri = mesh.triangle(t);
    const Point& a = mesh.vertex(tri[0]);
    return a + ref[0] * (mesh.vertex(tri[1]) - a) + ref[1] * (mesh.vertex(tri[2]) - a);
}

} // namespace

int polynomial_dimension(int degree)
{
    return degree < 0 ? 0 : (degree + 1) * (degree + 2) / 2;
}

ElementBasis::ElementBasis(int degree, Point center, double scale, Eigen::MatrixXd dof_matrix, Eigen::MatrixXd frame_map)
    : degree_(degree)
    , center_(std::move(center))
    , scale_(scale)
    , dof_matrix_(std::move(dof_matrix))
{
    Eigen::FullPivLU<Eigen::MatrixXd> lu(dof_matrix_);
    if (!lu.isInvertible() || lu.rcond() < 1e-13)
        throw degenerate_element_error("element DOF matrix is singular");
    nodal_ = lu.inverse();
    coefficients_ = nodal_ * frame_map;
}

void ElementBasis::monomials(const Point& x, int order, MonomialEval& out) const
{
    scaled_monomials(degree_, center_, scale_, x, order, out);
}

void ElementBasis::eval(const Point& x, int order, BasisEval& out) const
{
    MonomialEval m;
    monomials(x, order, m);
    const auto psi_t = coefficients_.transpose();
    out.value.noalias() = psi_t * m.value;
    if (order >= 1) {
        out.grad.resize(size(), 2);
        out.grad.col(0).noalias() = psi_t * m.dx;
        out.grad.col(1).noalias() = psi_t * m.dy;
    }
    if (order >= 2) {
        out.hess.resize(size(), 3);
        out.hess.col(0).noalias() = psi_t * m.dxx;
        out.hess.col(1).noalias() = psi_t * m.dxy;
        out.hess.col(2).noalias() = psi_t * m.dyy;
    }
}

HermiteSpace::HermiteSpace(const Mesh& mesh, int degree)
    : HermiteSpace(std::make_shared<const Mesh>(mesh), degree)
{
}

HermiteSpace::HermiteSpace(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh))
    , degree_(degree)
{
    if (degree != 3 && degree != 4)
        throw unsupported_error("Hermite degree must be 3 or 4, got " + std::to_string(degree));
    edge_dofs_ = degree_ - 3;
    interior_dofs_ = polynomial_dimension(degree_ - 3);
    local_size_ = 9 + 3 * edge_dofs_ + interior_dofs_;
    number_dofs();
    build_bases();
}

void HermiteSpace::number_dofs()
{
    const Mesh& m = *mesh_;
    const int nv = m.num_vertices(), ne = m.num_edges(), nt = m.num_triangles();
    const int edge_base = 3 * nv;
    const int interior_base = edge_base + edge_dofs_ * ne;
    num_dofs_ = interior_base + interior_dofs_ * nt;

    element_dofs_.resize(static_cast<std::size_t>(nt) * local_size_);
    for (int t = 0; t < nt; ++t) {
        int* d = element_dofs_.data() + static_cast<std::size_t>(t) * local_size_;
        int k = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                d[k++] = 3 * m.triangle(t)[i] + j;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < edge_dofs_; ++j)
                d[k++] = edge_base + edge_dofs_ * m.triangle_edge(t, i) + j;
        for (int j = 0; j < interior_dofs_; ++j)
            d[k++] = interior_base + interior_dofs_ * t + j;
    }

    frames_.assign(nv, Eigen::Matrix2d::Identity());
    std::vector<char> constrained(num_dofs_, 0);
    for (int v = 0; v < nv; ++v) {
        switch (m.vertex_kind(v)) {
        case VertexKind::interior:
            break;
        case VertexKind::boundary_flat: {
            const Point& tng = m.boundary_tangent(v);
            frames_[v].col(0) = tng;
            frames_[v].col(1) = Point(tng.y(), -tng.x());
            constrained[3 * v] = constrained[3 * v + 1] = 1;
            break;
        }
        case VertexKind::boundary_corner:
            constrained[3 * v] = constrained[3 * v + 1] = constrained[3 * v + 2] = 1;
            break;
        }
    }
    for (int e = 0; e < ne; ++e)
        if (m.edge(e).boundary())
            for (int j = 0; j < edge_dofs_; ++j)
                constrained[edge_base + edge_dofs_ * e + j] = 1;

    free_index_.assign(num_dofs_, -1);
    free_dofs_.clear();
    for (int i = 0; i < num_dofs_; ++i) {
        if (!constrained[i]) {
            free_index_[i] = static_cast<int>(free_dofs_.size());
            free_dofs_.push_back(i);
        }
    }
}

void HermiteSpace::build_bases()
{
    const Mesh& m = *mesh_;
    const int n = local_size_;
    const QuadRule erule = edge_rule(2 * degree_ + 2);
    const QuadRule trule = triangle_rule(2 * degree_ + 2);
    bases_.resize(m.num_triangles());
    MonomialEval mono;
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangle(t);
        const Point c = m.barycenter(t);
        const double h = m.diameter(t);
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
        Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n, n);
        int row = 0;
        for (int i = 0; i < 3; ++i) {
            scaled_monomials(degree_, c, h, m.vertex(tri[i]), 1, mono);
            D.row(row) = mono.value.transpose();
            D.row(row + 1) = h * mono.dx.transpose();
            D.row(row + 2) = h * mono.dy.transpose();
            T.block<2, 2>(row + 1, row + 1) = h * frames_[tri[i]];
            row += 3;
        }
        for (int i = 0; i < 3 && edge_dofs_ > 0; ++i) {
            const Point& a = m.vertex(tri[(i + 1) % 3]);
            const Point& b = m.vertex(tri[(i + 2) % 3]);
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
            for (int q = 0; q < erule.size(); ++q) {
                const double s = erule.points[q][0];
                scaled_monomials(degree_, c, h, Point(a + s * (b - a)), 0, mono);
                acc += erule.weights[q] * mono.value;
            }
            D.row(row++) = acc.transpose();
        }
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(interior_dofs_, n);
        for (int q = 0; q < trule.size(); ++q) {
            const auto& r = trule.points[q];
            scaled_monomials(degree_, c, h, reference_to_physical(m, t, r), 0, mono);
            const double w = 2.0 * trule.weights[q];
            if (interior_dofs_ == 1) {
                acc.row(0) += w * mono.value.transpose();
            } else {
                const double lam[3] = { 1.0 - r[0] - r[1], r[0], r[1] };
                for (int j = 0; j < 3; ++j)
                    acc.row(j) += w * lam[j] * mono.value.transpose();
            }
        }
        D.bottomRows(interior_dofs_) = acc;
        bases_[t] = ElementBasis(degree_, c, h, std::move(D), std::move(T));
    }
}

DofKind HermiteSpace::dof_kind(int dof) const
{
    const int nv = mesh_->num_vertices();
    if (dof < 3 * nv) {
        switch (dof % 3) {
        case 0:
            return DofKind::vertex_value;
        case 1:
            return DofKind::vertex_deriv1;
        default:
            return DofKind::vertex_deriv2;
        }
    }
    if (dof < 3 * nv + edge_dofs_ * mesh_->num_edges())
        return DofKind::edge_moment;
    return DofKind::interior_moment;
}

std::vector<int> HermiteSpace::constrained_dofs() const
{
    std::vector<int> out;
    for (int i = 0; i < num_dofs_; ++i)
        if (free_index_[i] < 0)
            out.push_back(i);
    return out;
}

Eigen::VectorXd HermiteSpace::gather(const Eigen::VectorXd& coeffs, int t) const
{
    const auto dofs = element_dofs(t);
    Eigen::VectorXd loc(local_size_);
    for (int i = 0; i < local_size_; ++i)
        loc[i] = coeffs[dofs[i]];
    return loc;
}

Jet HermiteSpace::evaluate(const Eigen::VectorXd& coeffs, int t, const Point& x) const
{
    BasisEval be;
    bases_[t].eval(x, 2, be);
    const Eigen::VectorXd loc = gather(coeffs, t);
    Jet j;
    j.value = be.value.dot(loc);
    j.grad = be.grad.transpose() * loc;
    const Eigen::Vector3d h = be.hess.transpose() * loc;
    j.hess << h[0], h[1], h[1], h[2];
    return j;
}

Eigen::VectorXd HermiteSpace::interpolate(const ScalarField& f) const
{
    const Mesh& m = *mesh_;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(num_dofs_);
    for (int v = 0; v < m.num_vertices(); ++v) {
        const Jet j = f(m.vertex(v));
        out[3 * v] = j.value;
        out.segment<2>(3 * v + 1) = frames_[v].transpose() * j.grad;
    }
    const int edge_base = 3 * m.num_vertices();
    if (edge_dofs_ > 0) {
        const QuadRule erule = edge_rule(2 * degree_ + 2);
        for (int e = 0; e < m.num_edges(); ++e) {
            const Point& a = m.vertex(m.edge(e).v[0]);
            const Point& b = m.vertex(m.edge(e).v[1]);
            double acc = 0.0;
            for (int q = 0; q < erule.size(); ++q)
                acc += erule.weights[q] * f(Point(a + erule.points[q][0] * (b - a))).value;
            out[edge_base + edge_dofs_ * e] = acc;
        }
    }
    const int interior_base = edge_base + edge_dofs_ * m.num_edges();
    const QuadRule trule = triangle_rule(2 * degree_ + 2);
    for (int t = 0; t < m.num_triangles(); ++t) {
        for (int q = 0; q < trule.size(); ++q) {
            const auto& r = trule.points[q];
            const double fv = f(reference_to_physical(m, t, r)).value;
            const double w = 2.0 * trule.weights[q];
            if (interior_dofs_ == 1) {
                out[interior_base + t] += w * fv;
            } else {
                const double lam[3] = { 1.0 - r[0] - r[1], r[0], r[1] };
                for (int j = 0; j < 3; ++j)
                    out[interior_base + interior_dofs_ * t + j] += w * lam[j] * fv;
            }
        }
    }
    return out;
}

Eigen::VectorXd HermiteSpace::expand(const Eigen::VectorXd& free_values) const
{
    Eigen::VectorXd full = Eigen::VectorXd::Zero(num_dofs_);
    for (std::size_t i = 0; i < free_dofs_.size(); ++i)
        full[free_dofs_[i]] = free_values[static_cast<Eigen::Index>(i)];
    return full;
}

Eigen::VectorXd HermiteSpace::restrict_to_free(const Eigen::VectorXd& full) const
{
    Eigen::VectorXd r(num_free());
    for (std::size_t i = 0; i < free_dofs_.size(); ++i)
        r[static_cast<Eigen::Index>(i)] = full[free_dofs_[i]];
    return r;
}

const ElementBasis& local_basis(const HermiteSpace& space, int t)
{
    return space.basis(t);
}

void write_dof_csv(std::ostream& os, const Eigen::VectorXd& coeffs)
{
    os << "dof,value\n";
    for (Eigen::Index i = 0; i < coeffs.size(); ++i)
        os << i << ',' << format_number(coeffs[i]) << '\n';
}

Eigen::VectorXd read_dof_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("empty DOF file");
    std::vector<double> values;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("malformed DOF line: " + line);
        const long idx = std::stol(line.substr(0, comma));
        if (idx != static_cast<long>(values.size()))
            throw std::runtime_error("DOF indices must be consecutive");
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

} // namespace hermite

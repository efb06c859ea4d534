#include "hermite/analysis.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "hermite/forms.hpp"
#include "hermite/io.hpp"
#include "hermite/quadrature.hpp"

namespace hermite {

namespace {

Point map_point(const Mesh& m, int t, const std::array<double, 2>& r)
{
    const auto& tri = m.triangle(t);
    const Point& p0 = m.vertex(tri[0]);
    return p0 + r[0] * (m.vertex(tri[1]) - p0) + r[1] * (m.vertex(tri[2]) - p0);
}

// Squared L2 norms of value, gradient and Hessian of (exact - u_h).
std::array<double, 3> squared_norms(const HermiteSpace& space,
                                    const Eigen::VectorXd& coeffs,
                                    const ScalarField* exact,
                                    const QuadRule& rule)
{
    const Mesh& m = space.mesh();
    std::array<double, 3> acc{ 0.0, 0.0, 0.0 };
    BasisEval be;
    for (int t = 0; t < m.num_triangles(); ++t) {
        const Eigen::VectorXd loc = space.gather(coeffs, t);
        const ElementBasis& basis = space.basis(t);
        for (int q = 0; q < rule.size(); ++q) {
            const Point x = map_point(m, t, rule.points[q]);
            basis.eval(x, 2, be);
            double v = be.value.dot(loc);
            Eigen::Vector2d g = be.grad.transpose() * loc;
            Eigen::Vector3d h = be.hess.transpose() * loc;
            if (exact) {
                const Jet u = (*exact)(x);
                v = u.value - v;
                g = u.grad - g;
                h = Eigen::Vector3d(u.hess(0, 0), u.hess(0, 1), u.hess(1, 1)) - h;
            }
            const double w = 2.0 * m.area(t) * rule.weights[q];
            acc[0] += w * v * v;
            acc[1] += w * g.squaredNorm();
            acc[2] += w * (h[0] * h[0] + 2.0 * h[1] * h[1] + h[2] * h[2]);
        }
    }
    return acc;
}

} // namespace

ErrorRow error_norms(const HermiteSpace& space, const Eigen::VectorXd& coeffs, const ScalarField& exact, double lambda)
{
    const auto s = squared_norms(space, coeffs, &exact, triangle_rule(2 * space.degree() + 4));
    ErrorRow row;
    row.h = space.mesh().h();
    row.ndof = space.num_dofs();
    row.l2 = std::sqrt(s[0]);
    row.h1 = std::sqrt(s[1]);
    row.h2_broken = std::sqrt(s[2]);
    row.lambda_norm = std::sqrt(s[2] + 2.0 * lambda * s[1] + lambda * lambda * s[0]);
    return row;
}

double lambda_norm(const HermiteSpace& space, const Eigen::VectorXd& coeffs, double lambda)
{
    if (lambda < 0.0)
        throw std::invalid_argument("lambda must be nonnegative");
    const auto s = squared_norms(space, coeffs, nullptr, volume_rule(space.degree()));
    return std::sqrt(s[2] + 2.0 * lambda * s[1] + lambda * lambda * s[0]);
}

MtTerms mt_identity_terms(const HermiteSpace& space, const Eigen::VectorXd& coeffs)
{
    const Mesh& m = space.mesh();
    MtTerms out;
    const QuadRule rule = volume_rule(space.degree());
    BasisEval be;
    for (int t = 0; t < m.num_triangles(); ++t) {
        const Eigen::VectorXd loc = space.gather(coeffs, t);
        for (int q = 0; q < rule.size(); ++q) {
            space.basis(t).eval(map_point(m, t, rule.points[q]), 2, be);
            const Eigen::Vector3d h = be.hess.transpose() * loc;
            const double w = 2.0 * m.area(t) * rule.weights[q];
            out.laplacian += w * (h[0] + h[2]) * (h[0] + h[2]);
            out.hessian += w * (h[0] * h[0] + 2.0 * h[1] * h[1] + h[2] * h[2]);
        }
    }
    const QuadRule fr = face_rule(space.degree());
    const FaceTermCache faces(m);
    for (const FaceData& f : faces.faces()) {
        const Eigen::VectorXd lp = space.gather(coeffs, f.plus);
        const Eigen::VectorXd lm = space.gather(coeffs, f.minus);
        BasisEval bp, bm;
        for (int q = 0; q < fr.size(); ++q) {
            const Point x = f.a + fr.points[q][0] * (f.b - f.a);
            space.basis(f.plus).eval(x, 2, bp);
            space.basis(f.minus).eval(x, 1, bm);
            const double jump = (bp.grad.transpose() * lp).dot(f.normal) - (bm.grad.transpose() * lm).dot(f.normal);
            const Eigen::Vector3d h = bp.hess.transpose() * lp;
            const Eigen::Vector2d& t = f.tangent;
            const double dtt = t.x() * t.x() * h[0] + 2.0 * t.x() * t.y() * h[1] + t.y() * t.y() * h[2];
            out.jump += 2.0 * f.length * fr.weights[q] * jump * dtt;
        }
    }
    return out;
}

double mt_identity_gap(const HermiteSpace& space, const Eigen::VectorXd& coeffs)
{
    return mt_identity_terms(space, coeffs).gap();
}

std::optional<double> observed_order(double e0, double e1, double s0, double s1)
{
    if (!(e0 > 0.0) || !(e1 > 0.0) || s0 == s1)
        return std::nullopt;
    return std::log(e0 / e1) / std::log(s0 / s1);
}

void convergence_orders(ErrorReport& report)
{
    if (report.rows.size() < 2)
        throw std::invalid_argument("convergence orders need at least two rows");
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        const ErrorRow& a = report.rows[i - 1];
        ErrorRow& b = report.rows[i];
        double s0 = a.h, s1 = b.h;
        if (report.graded) {
            s0 = 1.0 / std::sqrt(static_cast<double>(a.ndof));
            s1 = 1.0 / std::sqrt(static_cast<double>(b.ndof));
        }
        b.order_l2 = observed_order(a.l2, b.l2, s0, s1);
        b.order_h1 = observed_order(a.h1, b.h1, s0, s1);
        b.order_h2 = observed_order(a.h2_broken, b.h2_broken, s0, s1);
        b.order_lambda = observed_order(a.lambda_norm, b.lambda_norm, s0, s1);
    }
}

double loglog_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("slope needs two or more matching samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_error_csv(std::ostream& os, const ErrorReport& report)
{
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    os << "h,ndof,l2,h1,h2_broken,lambda_norm,order_l2,order_h1,order_h2,order_lambda\n";
    for (const ErrorRow& r : report.rows)
        os << format_number(r.h) << ',' << r.ndof << ',' << format_number(r.l2) << ',' << format_number(r.h1) << ','
           << format_number(r.h2_broken) << ',' << format_number(r.lambda_norm) << ',' << opt(r.order_l2) << ','
           << opt(r.order_h1) << ',' << opt(r.order_h2) << ',' << opt(r.order_lambda) << '\n';
}

} // namespace hermite

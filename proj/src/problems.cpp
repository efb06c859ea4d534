#include "hermite/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hermite/errors.hpp"

namespace hermite {

namespace {

constexpr double pi = std::numbers::pi;

// g(t) = t e^(1-|t|) - t and its first two derivatives.
std::array<double, 3> kinked_profile(double t)
{
    if (t >= 0.0) {
        const double e = std::exp(1.0 - t);
        return { t * e - t, e * (1.0 - t) - 1.0, e * (t - 2.0) };
    }
    const double e = std::exp(1.0 + t);
    return { t * e - t, e * (1.0 + t) - 1.0, e * (2.0 + t) };
}

Eigen::Matrix2d rotation(double phi)
{
    Eigen::Matrix2d r;
    r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    return r;
}

Eigen::Matrix2d exp1_matrix(const Point& x)
{
    const double p = x.x() * x.y();
    const double s = p > 0.0 ? 1.0 : (p < 0.0 ? -1.0 : 0.0);
    Eigen::Matrix2d A;
    A << 2.0, s, s, 2.0;
    return A;
}

Eigen::Matrix2d exp3_matrix(double theta, double phi)
{
    const double st = std::sin(theta), ct = std::cos(theta);
    Eigen::Matrix2d sst;
    sst << 1.0 + st * st, st * ct, st * ct, ct * ct;
    const Eigen::Matrix2d r = rotation(phi);
    return 0.5 * r.transpose() * sst * r;
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi, double& best_value)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    double best_t = fc >= fd ? c : d;
    best_value = std::max(fc, fd);
    for (int it = 0; it < 60; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
            if (fc > best_value) {
                best_value = fc;
                best_t = c;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
            if (fd > best_value) {
                best_value = fd;
                best_t = d;
            }
        }
    }
    return best_t;
}

} // namespace

double gamma_nondiv(const Eigen::Matrix2d& A)
{
    const double tr = A.trace();
    if (!(tr > 0.0))
        throw ellipticity_error("tr A must be positive");
    return tr / A.squaredNorm();
}

double gamma_hjb(const Eigen::Matrix2d& A, const Eigen::Vector2d& b, double c, double lambda)
{
    if (lambda <= 0.0) {
        if (b.squaredNorm() != 0.0 || c != 0.0)
            throw std::invalid_argument("lower-order terms need lambda > 0");
        return gamma_nondiv(A);
    }
    const double cl = c / lambda;
    const double den = A.squaredNorm() + b.squaredNorm() / (2.0 * lambda) + cl * cl;
    if (!(den > 0.0))
        throw std::invalid_argument("nonpositive gamma denominator");
    return (A.trace() + cl) / den;
}

double cordes_epsilon_nondiv(const std::function<Eigen::Matrix2d(const Point&)>& A, std::span<const Point> samples)
{
    if (samples.empty())
        throw std::invalid_argument("no sample points");
    double eps = 1.0;
    for (const Point& x : samples) {
        const Eigen::Matrix2d a = A(x);
        const double tr = a.trace();
        eps = std::min(eps, tr * tr / a.squaredNorm() - 1.0);
    }
    if (!(eps > 0.0))
        throw cordes_error("Cordes condition violated");
    return eps;
}

double cordes_epsilon_hjb(std::span<const Coefficients> samples, double lambda)
{
    if (samples.empty())
        throw std::invalid_argument("no samples");
    if (!(lambda > 0.0))
        throw std::invalid_argument("lambda must be positive");
    double eps = 1.0;
    for (const Coefficients& k : samples) {
        const double cl = k.c / lambda;
        const double num = k.A.trace() + cl;
        const double den = k.A.squaredNorm() + k.b.squaredNorm() / (2.0 * lambda) + cl * cl;
        eps = std::min(eps, num * num / den - 2.0);
    }
    if (!(eps > 0.0))
        throw cordes_error("Cordes condition violated");
    return eps;
}

Control ControlSet::grid_point(int index) const
{
    Control a{ lower[0], lower[1] };
    const int i0 = index % grid[0];
    const int i1 = index / grid[0];
    const int idx[2] = { i0, i1 };
    for (int d = 0; d < dims; ++d)
        a[d] = lower[d] + idx[d] * spacing(d);
    return a;
}

double ControlSet::spacing(int axis) const
{
    const double len = upper[axis] - lower[axis];
    if (periodic[axis])
        return len / grid[axis];
    return grid[axis] > 1 ? len / (grid[axis] - 1) : len;
}

ControlSet ControlSet::single()
{
    ControlSet s;
    s.dims = 1;
    s.grid = { 1, 1 };
    s.max_polish_sweeps = 0;
    return s;
}

ArgmaxResult maximize_over_controls(const ControlSet& cs, const std::function<double(const Control&)>& objective)
{
    // Gains below this are round-off, so controls that tie in exact
    // arithmetic keep the earlier candidate.
    auto improves = [](double v, double ref) { return v > ref + 1e-13 * std::max(1.0, std::abs(ref)); };
    ArgmaxResult best;
    best.alpha = cs.grid_point(0);
    best.value = objective(best.alpha);
    const int n = cs.grid_size();
    for (int i = 1; i < n; ++i) {
        const Control a = cs.grid_point(i);
        const double v = objective(a);
        if (improves(v, best.value)) {
            best.value = v;
            best.alpha = a;
        }
    }
    for (int sweep = 0; sweep < cs.max_polish_sweeps; ++sweep) {
        const double before = best.value;
        for (int d = 0; d < cs.dims; ++d) {
            if (cs.upper[d] <= cs.lower[d])
                continue;
            const double h = cs.spacing(d);
            double lo = best.alpha[d] - h, hi = best.alpha[d] + h;
            if (!cs.periodic[d]) {
                lo = std::max(lo, cs.lower[d]);
                hi = std::min(hi, cs.upper[d]);
            }
            Control trial = best.alpha;
            double value = 0.0;
            const double t = golden_section_max(
                [&](double s) {
                    trial[d] = s;
                    return objective(trial);
                },
                lo,
                hi,
                value);
            if (improves(value, best.value)) {
                best.value = value;
                best.alpha[d] = t;
            }
        }
        if (best.value == before)
            break;
    }
    for (int d = 0; d < cs.dims; ++d) {
        if (cs.periodic[d]) {
            const double period = cs.upper[d] - cs.lower[d];
            double r = std::fmod(best.alpha[d] - cs.lower[d], period);
            if (r < 0.0)
                r += period;
            best.alpha[d] = cs.lower[d] + r;
        }
    }
    return best;
}

double apply_operator(const Coefficients& k, double u, const Eigen::Vector2d& grad, const Eigen::Matrix2d& hess)
{
    return k.A.cwiseProduct(hess).sum() + k.b.dot(grad) - k.c * u - k.f;
}

double problem_gamma(const HjbProblem& problem, const Coefficients& k)
{
    return problem.lower_order ? gamma_hjb(k.A, k.b, k.c, problem.lambda) : gamma_nondiv(k.A);
}

ArgmaxResult hamiltonian_argmax(const HjbProblem& problem,
                                const ControlFamily& family,
                                double u,
                                const Eigen::Vector2d& grad,
                                const Eigen::Matrix2d& hess,
                                Weighting weighting)
{
    if (weighting == Weighting::unweighted)
        return maximize_over_controls(problem.controls,
                                      [&](const Control& a) { return apply_operator(family(a), u, grad, hess); });
    return maximize_over_controls(problem.controls, [&](const Control& a) {
        const Coefficients k = family(a);
        return problem_gamma(problem, k) * apply_operator(k, u, grad, hess);
    });
}

ArgmaxResult hamiltonian_argmax(const HjbProblem& problem,
                                const Point& x,
                                double u,
                                const Eigen::Vector2d& grad,
                                const Eigen::Matrix2d& hess,
                                Weighting weighting)
{
    return hamiltonian_argmax(problem, problem.family_at(x), u, grad, hess, weighting);
}

HjbProblem as_hjb(const NondivProblem& p)
{
    HjbProblem h;
    h.name = p.name;
    h.domain = p.domain;
    h.controls = ControlSet::single();
    auto coefficients = p.coefficients;
    h.family_at = [coefficients](const Point& x) -> ControlFamily {
        const Coefficients k = coefficients(x);
        return [k](const Control&) { return k; };
    };
    h.lower_order = p.lower_order;
    h.epsilon = p.epsilon;
    h.lambda = p.lambda;
    h.exact = p.exact;
    h.kink_x = p.kink_x;
    h.kink_y = p.kink_y;
    return h;
}

bool resolves_kinks(const Mesh& mesh, const std::vector<double>& kink_x, const std::vector<double>& kink_y)
{
    const double tol = 1e-12;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        for (int d = 0; d < 2; ++d) {
            double lo = 1e300, hi = -1e300;
            for (int v : mesh.triangle(t)) {
                lo = std::min(lo, mesh.vertex(v)[d]);
                hi = std::max(hi, mesh.vertex(v)[d]);
            }
            for (double k : d == 0 ? kink_x : kink_y)
                if (lo < k - tol && hi > k + tol)
                    return false;
        }
    }
    return true;
}

Jet exp1_solution(const Point& x)
{
    const auto gx = kinked_profile(x.x());
    const auto gy = kinked_profile(x.y());
    Jet j;
    j.value = gx[0] * gy[0];
    j.grad = Eigen::Vector2d(gx[1] * gy[0], gx[0] * gy[1]);
    j.hess << gx[2] * gy[0], gx[1] * gy[1], gx[1] * gy[1], gx[0] * gy[2];
    return j;
}

Jet exp3_solution(const Point& x)
{
    const double e = std::exp(x.x() * x.y());
    const double sx = std::sin(pi * x.x()), cx = std::cos(pi * x.x());
    const double sy = std::sin(pi * x.y()), cy = std::cos(pi * x.y());
    // u = e * S with S = sin(pi x) sin(pi y); e_x = y e, e_y = x e.
    const double S = sx * sy;
    const double Sx = pi * cx * sy, Sy = pi * sx * cy;
    const double Sxx = -pi * pi * S, Syy = -pi * pi * S, Sxy = pi * pi * cx * cy;
    const double ex = x.y() * e, ey = x.x() * e;
    const double exx = x.y() * x.y() * e, eyy = x.x() * x.x() * e, exy = (1.0 + x.x() * x.y()) * e;
    Jet j;
    j.value = e * S;
    j.grad = Eigen::Vector2d(ex * S + e * Sx, ey * S + e * Sy);
    j.hess(0, 0) = exx * S + 2.0 * ex * Sx + e * Sxx;
    j.hess(1, 1) = eyy * S + 2.0 * ey * Sy + e * Syy;
    j.hess(0, 1) = j.hess(1, 0) = exy * S + ex * Sy + ey * Sx + e * Sxy;
    return j;
}

Jet exp4_solution(const Point& x)
{
    constexpr double delta = 0.01;
    const auto g = kinked_profile(2.0 * x.x() - 1.0);
    const double p = g[0], dp = 2.0 * g[1], ddp = 4.0 * g[2];
    // x2 + (1 - e^(x2/delta)) / (e^(1/delta) - 1), rewritten without overflow.
    const double tail = std::exp(-1.0 / delta);
    const double layer = std::exp((x.y() - 1.0) / delta) / (1.0 - tail);
    const double q = x.y() + tail / (1.0 - tail) - layer;
    const double dq = 1.0 - layer / delta;
    const double ddq = -layer / (delta * delta);
    Jet j;
    j.value = p * q;
    j.grad = Eigen::Vector2d(dp * q, p * dq);
    j.hess << ddp * q, dp * dq, dp * dq, p * ddq;
    return j;
}

NondivProblem exp1()
{
    NondivProblem p;
    p.name = "exp1";
    p.domain = Box{ -1.0, 1.0, -1.0, 1.0 };
    p.coefficients = [](const Point& x) {
        Coefficients k;
        k.A = exp1_matrix(x);
        k.f = k.A.cwiseProduct(exp1_solution(x).hess).sum();
        return k;
    };
    p.epsilon = 3.0 / 5.0;
    p.lambda = 0.0;
    p.exact = exp1_solution;
    p.kink_x = { 0.0 };
    p.kink_y = { 0.0 };
    return p;
}

NondivProblem exp2()
{
    NondivProblem p = exp1();
    p.name = "exp2";
    p.coefficients = [](const Point& x) {
        Coefficients k;
        k.A = exp1_matrix(x);
        k.b = x;
        k.c = 3.0;
        const Jet u = exp1_solution(x);
        k.f = k.A.cwiseProduct(u.hess).sum() + k.b.dot(u.grad) - k.c * u.value;
        return k;
    };
    p.lower_order = true;
    p.epsilon = 9.0 / 20.0;
    p.lambda = 1.0;
    return p;
}

HjbProblem exp3(int theta_grid, int phi_grid)
{
    HjbProblem p;
    p.name = "exp3";
    p.domain = Box{};
    p.controls.dims = 2;
    p.controls.lower = { 0.0, 0.0 };
    p.controls.upper = { pi / 3.0, 2.0 * pi };
    p.controls.grid = { theta_grid, phi_grid };
    p.controls.periodic = { false, true };
    p.lower_order = true;
    p.epsilon = 1.0 / 7.0;
    p.lambda = 8.0 * pi * pi / 7.0;
    p.exact = exp3_solution;
    const ControlSet controls = p.controls;
    p.family_at = [controls](const Point& x) -> ControlFamily {
        const Jet u = exp3_solution(x);
        const double shift = std::sqrt(3.0) / (pi * pi);
        const ArgmaxResult sup = maximize_over_controls(controls, [&](const Control& a) {
            const double s = std::sin(a[0]);
            return exp3_matrix(a[0], a[1]).cwiseProduct(u.hess).sum() - shift * s * s;
        });
        const double g = sup.value - pi * pi * u.value;
        return [g, shift](const Control& a) {
            Coefficients k;
            k.A = exp3_matrix(a[0], a[1]);
            k.c = pi * pi;
            const double s = std::sin(a[0]);
            k.f = shift * s * s + g;
            return k;
        };
    };
    return p;
}

HjbProblem exp4(int phi_grid)
{
    HjbProblem p;
    p.name = "exp4";
    p.domain = Box{};
    p.controls.dims = 1;
    p.controls.lower = { 0.0, 0.0 };
    p.controls.upper = { 2.0 * pi, 0.0 };
    p.controls.grid = { phi_grid, 1 };
    p.controls.periodic = { true, false };
    p.lower_order = true;
    p.epsilon = 0.0024;
    p.lambda = 0.5;
    p.exact = exp4_solution;
    p.kink_x = { 0.5 };
    p.family_at = [](const Point& x) -> ControlFamily {
        const Jet u = exp4_solution(x);
        return [u](const Control& a) {
            Eigen::Matrix2d m;
            m << 20.0, 1.0, 1.0, 0.1;
            const Eigen::Matrix2d r = rotation(a[0]);
            Coefficients k;
            k.A = r.transpose() * m * r;
            k.b = Eigen::Vector2d(0.0, 1.0);
            k.c = 10.0;
            k.f = k.A.cwiseProduct(u.hess).sum() + k.b.dot(u.grad) - k.c * u.value;
            return k;
        };
    };
    return p;
}

NondivProblem constant_coefficient_problem(const Box& domain,
                                           const Eigen::Matrix2d& A,
                                           const Eigen::Vector2d& b,
                                           double c,
                                           double epsilon,
                                           double lambda)
{
    if (!(domain.xmax > domain.xmin && domain.ymax > domain.ymin))
        throw std::invalid_argument("empty domain");
    NondivProblem p;
    p.name = "custom";
    p.domain = domain;
    const double kx = pi / (domain.xmax - domain.xmin), ky = pi / (domain.ymax - domain.ymin);
    p.exact = [domain, kx, ky](const Point& x) {
        const double sx = std::sin(kx * (x.x() - domain.xmin)), cx = std::cos(kx * (x.x() - domain.xmin));
        const double sy = std::sin(ky * (x.y() - domain.ymin)), cy = std::cos(ky * (x.y() - domain.ymin));
        Jet j;
        j.value = sx * sy;
        j.grad = Eigen::Vector2d(kx * cx * sy, ky * sx * cy);
        j.hess << -kx * kx * sx * sy, kx * ky * cx * cy, kx * ky * cx * cy, -ky * ky * sx * sy;
        return j;
    };
    auto exact = p.exact;
    p.coefficients = [A, b, c, exact](const Point& x) {
        Coefficients k;
        k.A = A;
        k.b = b;
        k.c = c;
        const Jet u = exact(x);
        k.f = A.cwiseProduct(u.hess).sum() + b.dot(u.grad) - c * u.value;
        return k;
    };
    p.lower_order = b.squaredNorm() != 0.0 || c != 0.0;
    p.epsilon = epsilon;
    p.lambda = lambda;
    if (p.lower_order && !(lambda > 0.0))
        throw std::invalid_argument("lower-order terms need lambda > 0");
    return p;
}

} // namespace hermite

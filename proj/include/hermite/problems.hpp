#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hermite/fespace.hpp"
#include "hermite/mesh.hpp"

namespace hermite {

/// Coefficients of L v = A:D^2 v + b.grad v - c v and the data f at one point.
struct Coefficients
{
    Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    double c = 0.0;
    double f = 0.0;
};

/// tr A / |A|^2 (Frobenius). Throws ellipticity_error when tr A <= 0.
double gamma_nondiv(const Eigen::Matrix2d& A);

/// (tr A + c/lambda) / (|A|^2 + |b|^2/(2 lambda) + (c/lambda)^2) for lambda > 0;
/// gamma_nondiv(A) for lambda == 0 (then b and c must vanish).
double gamma_hjb(const Eigen::Matrix2d& A, const Eigen::Vector2d& b, double c, double lambda);

/// Largest epsilon with |A|^2/(tr A)^2 <= 1/(1 + epsilon) at every sample,
/// clamped to 1. Throws cordes_error if it is not positive.
double cordes_epsilon_nondiv(const std::function<Eigen::Matrix2d(const Point&)>& A, std::span<const Point> samples);

/// Largest epsilon with (|A|^2 + |b|^2/(2 lambda) + (c/lambda)^2)/(tr A + c/lambda)^2
/// <= 1/(2 + epsilon) over the sampled coefficients. Throws cordes_error if not positive.
double cordes_epsilon_hjb(std::span<const Coefficients> samples, double lambda);

/// Up to two control parameters.
using Control = std::array<double, 2>;
using ControlFamily = std::function<Coefficients(const Control&)>;

/**
 * Box of control parameters sampled on a tensor grid. A periodic axis
 * covers [lower, upper) with `grid` equispaced points; a closed axis covers
 * [lower, upper] including both ends.
 */
struct ControlSet
{
    int dims = 1;
    Control lower{ 0.0, 0.0 };
    Control upper{ 0.0, 0.0 };
    std::array<int, 2> grid{ 1, 1 };
    std::array<bool, 2> periodic{ false, false };
    /// Alternating golden-section sweeps after the grid search; 0 disables polishing.
    int max_polish_sweeps = 30;

    int grid_size() const { return dims == 1 ? grid[0] : grid[0] * grid[1]; }
    Control grid_point(int index) const;
    double spacing(int axis) const;
    /// The single-point set used to run linear problems through the HJB machinery.
    static ControlSet single();
};

/// Linear problem A:D^2u + b.grad u - c u = f with u = 0 on the boundary.
struct NondivProblem
{
    std::string name;
    Box domain;
    std::function<Coefficients(const Point&)> coefficients;
    /// Whether b or c is present; selects the lambda-weighted gamma and L_lambda test action.
    bool lower_order = false;
    double epsilon = 1.0;
    double lambda = 0.0;
    ScalarField exact; ///< may be empty
    /// Lines x = const / y = const across which the data or exact solution is not smooth.
    std::vector<double> kink_x, kink_y;
};

/// sup over the control set of (L^alpha u - f^alpha) = 0 with u = 0 on the boundary.
struct HjbProblem
{
    std::string name;
    Box domain;
    ControlSet controls;
    /// Coefficient family at a point; may cache point-dependent work.
    std::function<ControlFamily(const Point&)> family_at;
    bool lower_order = true;
    double epsilon = 1.0;
    double lambda = 0.0;
    ScalarField exact;
    std::vector<double> kink_x, kink_y;
};

/// The linear problem as an HJB problem over a single control.
HjbProblem as_hjb(const NondivProblem& problem);

/// gamma^alpha for the problem's branch.
double problem_gamma(const HjbProblem& problem, const Coefficients& coeffs);

/// True when no triangle's interior crosses a kink line of the problem.
bool resolves_kinks(const Mesh& mesh, const std::vector<double>& kink_x, const std::vector<double>& kink_y);

struct ArgmaxResult
{
    Control alpha{ 0.0, 0.0 };
    double value = 0.0;
};

/// Maximizes `objective` over the control set: grid search, then alternating
/// golden-section sweeps per axis around the best grid point. A candidate
/// replaces the incumbent only if it is larger by more than 1e-13 relative, so
/// the first grid point wins ties (including ties blurred by round-off).
ArgmaxResult maximize_over_controls(const ControlSet& controls, const std::function<double(const Control&)>& objective);

enum class Weighting
{
    unweighted,    ///< A:H + b.g - c u - f, selects the Newton control field
    gamma_weighted ///< gamma^alpha (A:H + b.g - c u - f), evaluates F_gamma
};

/// Pointwise sup and maximizer of the Hamiltonian for a value/gradient/Hessian triple.
ArgmaxResult hamiltonian_argmax(const HjbProblem& problem,
                                const ControlFamily& family,
                                double u,
                                const Eigen::Vector2d& grad,
                                const Eigen::Matrix2d& hess,
                                Weighting weighting = Weighting::unweighted);

ArgmaxResult hamiltonian_argmax(const HjbProblem& problem,
                                const Point& x,
                                double u,
                                const Eigen::Vector2d& grad,
                                const Eigen::Matrix2d& hess,
                                Weighting weighting = Weighting::unweighted);

/// A:H + b.g - c u - f.
double apply_operator(const Coefficients& k, double u, const Eigen::Vector2d& grad, const Eigen::Matrix2d& hess);

/// Linear problem on (-1,1)^2 with A = [[2, s], [s, 2]], s = sign(x1 x2).
NondivProblem exp1();
/// exp1 with b = (x1, x2), c = 3, lambda = 1.
NondivProblem exp2();
/// HJB problem on (0,1)^2 with controls (theta, phi) in [0, pi/3] x [0, 2 pi).
HjbProblem exp3(int theta_grid = 16, int phi_grid = 64);
/// HJB problem on (0,1)^2 with rotation controls and a boundary layer at x2 = 1.
HjbProblem exp4(int phi_grid = 256);

/// Constant-coefficient problem on `domain` with manufactured solution
/// sin(pi (x - xmin)/Lx) sin(pi (y - ymin)/Ly). epsilon and lambda are taken
/// as given; lower-order terms are active when b or c is nonzero.
NondivProblem constant_coefficient_problem(const Box& domain,
                                           const Eigen::Matrix2d& A,
                                           const Eigen::Vector2d& b,
                                           double c,
                                           double epsilon,
                                           double lambda);

/// The exact solution of exp1/exp2: g(x1) g(x2), g(t) = t e^(1-|t|) - t.
Jet exp1_solution(const Point& x);
Jet exp3_solution(const Point& x);
Jet exp4_solution(const Point& x);

} // namespace hermite

#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hermite/fespace.hpp"
#include "hermite/forms.hpp"
#include "hermite/problems.hpp"

namespace hermite {

/// Solves the system with UMFPACK (fill-reducing ordering). Returns the
/// free-DOF solution. Throws singular_matrix_error when factorization fails.
Eigen::VectorXd sparse_lu_solve(const SparseSystem& system);

/// Discrete solution of the linear scheme, as a full DOF vector.
Eigen::VectorXd solve_nondiv(const HermiteSpace& space, const NondivProblem& problem, std::optional<double> eps_used = std::nullopt);

struct NewtonStep
{
    int iteration = 0;
    double increment_norm = 0.0; ///< lambda-norm of u^j - u^(j-1)
    double residual_norm = 0.0;  ///< Euclidean norm of the residual at u^j
    long controls_changed = 0;   ///< control entries that differ from the previous iteration
};

struct NewtonHistory
{
    std::vector<NewtonStep> steps;
};

struct NewtonResult
{
    Eigen::VectorXd u;
    NewtonHistory history;
    bool converged = false;
};

struct NewtonOptions
{
    double tol = 1e-8;
    int max_iter = 50;
    std::optional<double> eps_used;
    /// Evaluate the residual after each step (costs one extra sup per quadrature point).
    bool record_residual = true;
};

/**
 * Semismooth Newton: freeze the unweighted pointwise maximizer at u^j, solve
 * the linearized scheme for u^(j+1); stop when the lambda-norm increment drops
 * below `tol`. Non-convergence is reported through `converged`.
 */
NewtonResult semismooth_newton(const HermiteSpace& space,
                               const HjbProblem& problem,
                               const Eigen::VectorXd& u0,
                               const NewtonOptions& options = {});

void write_newton_csv(std::ostream& os, const NewtonHistory& history);

} // namespace hermite

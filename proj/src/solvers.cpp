#include "hermite/solvers.hpp"

#include <ostream>

#include <Eigen/UmfPackSupport>

#include "hermite/analysis.hpp"
#include "hermite/errors.hpp"
#include "hermite/io.hpp"

namespace hermite {

Eigen::VectorXd sparse_lu_solve(const SparseSystem& system)
{
    const auto& A = system.matrix;
    if (A.rows() != A.cols() || A.rows() != system.rhs.size())
        throw std::invalid_argument("system dimensions do not match");
    if (A.rows() == 0)
        return Eigen::VectorXd();
    const Eigen::SparseMatrix<double> Ac(A);
    Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(Ac);
    if (lu.info() != Eigen::Success)
        throw singular_matrix_error("sparse LU factorization failed");
    Eigen::VectorXd x = lu.solve(system.rhs);
    if (lu.info() != Eigen::Success || !x.allFinite())
        throw singular_matrix_error("sparse LU solve failed");

    auto residual_ok = [&](const Eigen::VectorXd& y) {
        const double norm_a = Eigen::VectorXd(Ac.cwiseAbs() * Eigen::VectorXd::Ones(Ac.cols())).maxCoeff();
        const double r = (system.rhs - A * y).cwiseAbs().maxCoeff();
        return r <= 1e-10 * (norm_a * y.cwiseAbs().maxCoeff() + system.rhs.cwiseAbs().maxCoeff());
    };
    if (!residual_ok(x)) {
        x += lu.solve(Eigen::VectorXd(system.rhs - A * x));
        if (!residual_ok(x))
            throw singular_matrix_error("sparse LU residual too large; matrix numerically singular");
    }
    return x;
}

Eigen::VectorXd solve_nondiv(const HermiteSpace& space, const NondivProblem& problem, std::optional<double> eps_used)
{
    const SparseSystem sys = assemble_nondiv_system(space, problem, eps_used.value_or(problem.epsilon));
    return space.expand(sparse_lu_solve(sys));
}

NewtonResult semismooth_newton(const HermiteSpace& space,
                               const HjbProblem& problem,
                               const Eigen::VectorXd& u0,
                               const NewtonOptions& options)
{
    if (!(options.tol > 0.0))
        throw std::invalid_argument("Newton tolerance must be positive");
    if (u0.size() != space.num_dofs())
        throw std::invalid_argument("initial guess has the wrong size");
    const VolumeCache cache(space, problem);
    NewtonResult res;
    res.u = space.expand(space.restrict_to_free(u0));
    ControlField previous;
    for (int j = 1; j <= options.max_iter; ++j) {
        const ControlField cf = argmax_control_field(space, problem, res.u, cache);
        NewtonStep step;
        step.iteration = j;
        if (previous.alpha.empty()) {
            step.controls_changed = static_cast<long>(cf.alpha.size());
        } else {
            for (std::size_t i = 0; i < cf.alpha.size(); ++i)
                step.controls_changed += cf.alpha[i] != previous.alpha[i];
        }
        const SparseSystem sys = assemble_hjb_linearization(space, problem, cf, cache, options.eps_used);
        const Eigen::VectorXd next = space.expand(sparse_lu_solve(sys));
        step.increment_norm = lambda_norm(space, next - res.u, problem.lambda);
        res.u = next;
        if (options.record_residual)
            step.residual_norm = hjb_residual(space, problem, res.u, cache, options.eps_used).norm();
        res.history.steps.push_back(step);
        previous = cf;
        if (step.increment_norm < options.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

void write_newton_csv(std::ostream& os, const NewtonHistory& history)
{
    os << "iteration,increment_norm,residual_norm,controls_changed\n";
    for (const NewtonStep& s : history.steps)
        os << s.iteration << ',' << format_number(s.increment_norm) << ',' << format_number(s.residual_norm) << ','
           << s.controls_changed << '\n';
}

} // namespace hermite

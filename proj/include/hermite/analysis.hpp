#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hermite/fespace.hpp"

namespace hermite {

struct ErrorRow
{
    double h = 0.0;
    long ndof = 0;
    double l2 = 0.0;
    double h1 = 0.0;        ///< H1 seminorm
    double h2_broken = 0.0; ///< (sum_K |D^2 e|_K^2)^(1/2)
    double lambda_norm = 0.0;
    std::optional<double> order_l2, order_h1, order_h2, order_lambda;
};

/// Rows in refinement order. `graded` selects orders against ndof^(-1/2)
/// instead of h.
struct ErrorReport
{
    std::vector<ErrorRow> rows;
    bool graded = false;
};

/// Errors of the finite element function against `exact`, by element
/// quadrature of degree 2k + 4. Fills h (max diameter) and ndof (total DOFs).
ErrorRow error_norms(const HermiteSpace& space, const Eigen::VectorXd& coeffs, const ScalarField& exact, double lambda);

/// (sum_K |D^2 v|^2 + 2 lambda |grad v|^2 + lambda^2 |v|^2)^(1/2).
double lambda_norm(const HermiteSpace& space, const Eigen::VectorXd& coeffs, double lambda);

/// The three terms of the discrete Miranda-Talenti identity.
struct MtTerms
{
    double laplacian = 0.0; ///< sum_K |Lap v|_K^2
    double hessian = 0.0;   ///< sum_K |D^2 v|_K^2
    double jump = 0.0;      ///< 2 sum_F <[grad v], Lap_T v>_F

    double gap() const { return laplacian - hessian - jump; }
};

MtTerms mt_identity_terms(const HermiteSpace& space, const Eigen::VectorXd& coeffs);
double mt_identity_gap(const HermiteSpace& space, const Eigen::VectorXd& coeffs);

/// Fills the order columns from consecutive rows; an order is absent when
/// either error is zero. Throws std::invalid_argument for fewer than 2 rows.
void convergence_orders(ErrorReport& report);

/// log(e0/e1) / log(s0/s1).
std::optional<double> observed_order(double e0, double e1, double s0, double s1);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// CSV with header h,ndof,l2,h1,h2_broken,lambda_norm,order_l2,order_h1,order_h2,order_lambda.
void write_error_csv(std::ostream& os, const ErrorReport& report);

} // namespace hermite

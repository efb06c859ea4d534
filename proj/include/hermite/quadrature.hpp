#pragma once

#include <array>
#include <vector>

namespace hermite {

/**
 * Quadrature rule on a reference cell.
 *
 * Triangle rules live on the reference triangle (0,0), (1,0), (0,1); a point
 * (xi, eta) has barycentric coordinates (1 - xi - eta, xi, eta) and the
 * weights sum to 1/2. Edge rules live on [0, 1] (second coordinate unused)
 * and their weights sum to 1.
 */
struct QuadRule
{
    std::vector<std::array<double, 2>> points;
    std::vector<double> weights;
    int exact_degree = 0;

    int size() const { return static_cast<int>(weights.size()); }
};

/// Cheapest implemented positive-weight rule exact for total degree `degree`
/// (1 <= degree <= 20). Throws unsupported_error above 20.
QuadRule triangle_rule(int degree);

/// Gauss-Legendre rule on [0, 1] with ceil((degree + 1) / 2) points.
QuadRule edge_rule(int degree);

/// Collapsed (Duffy) tensor Gauss rule on the reference triangle; exact for
/// any requested degree, not symmetric.
QuadRule conical_product_rule(int degree);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace hermite

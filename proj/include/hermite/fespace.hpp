#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hermite/mesh.hpp"

namespace hermite {

/// Value, gradient and Hessian of a scalar function at a point.
struct Jet
{
    double value = 0.0;
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
};

using ScalarField = std::function<Jet(const Point&)>;

enum class DofKind
{
    vertex_value,
    vertex_deriv1, ///< first frame direction: d/dx, or d/dt at a flat boundary vertex
    vertex_deriv2, ///< second frame direction: d/dy, or d/dn at a flat boundary vertex
    edge_moment,
    interior_moment
};

/// Basis values at one point: rows are local basis functions, Hessian columns
/// are (xx, xy, yy).
struct BasisEval
{
    Eigen::VectorXd value;
    Eigen::MatrixX2d grad;
    Eigen::MatrixX3d hess;
};

/// Monomials (x - c)^a (y - c)^b / h^(a+b) up to degree k and derivatives.
struct MonomialEval
{
    Eigen::VectorXd value, dx, dy, dxx, dxy, dyy;
};

/**
 * Local basis of one element, expressed in scaled monomials about the
 * centroid. `coefficients` columns are the basis functions dual to the
 * element's global DOFs (global derivative frames applied); `nodal` columns
 * are dual to the raw local functionals (Cartesian derivatives scaled by h_K).
 */
class ElementBasis
{
  public:
    ElementBasis() = default;
    ElementBasis(int degree, Point center, double scale, Eigen::MatrixXd dof_matrix, Eigen::MatrixXd frame_map);

    int degree() const { return degree_; }
    int size() const { return static_cast<int>(coefficients_.cols()); }
    const Point& center() const { return center_; }
    double scale() const { return scale_; }

    /// Local DOF functionals applied to each monomial (rows: DOFs).
    const Eigen::MatrixXd& dof_matrix() const { return dof_matrix_; }
    const Eigen::MatrixXd& nodal() const { return nodal_; }
    const Eigen::MatrixXd& coefficients() const { return coefficients_; }

    void monomials(const Point& x, int order, MonomialEval& out) const;
    /// `order` 0: values only; 1: plus gradients; 2: plus Hessians.
    void eval(const Point& x, int order, BasisEval& out) const;

  private:
    int degree_ = 0;
    Point center_ = Point::Zero();
    double scale_ = 1.0;
    Eigen::MatrixXd dof_matrix_;
    Eigen::MatrixXd nodal_;
    Eigen::MatrixXd coefficients_;
};

int polynomial_dimension(int degree);

/**
 * C0 Hermite space of degree k in {3, 4} with C1 continuity at vertices and
 * homogeneous Dirichlet constraints.
 *
 * Global numbering: vertex v owns 3v (value), 3v+1, 3v+2 (derivatives in the
 * vertex frame); then (k - 3) moments per edge; then dim P_{k-3} moments per
 * triangle. Local order per element: three vertex triples, edge moments of
 * local edges 0..2, interior moments.
 */
class HermiteSpace
{
  public:
    HermiteSpace(std::shared_ptr<const Mesh> mesh, int degree);
    HermiteSpace(const Mesh& mesh, int degree);

    int degree() const { return degree_; }
    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }

    int num_dofs() const { return num_dofs_; }
    int num_free() const { return static_cast<int>(free_dofs_.size()); }
    int local_size() const { return local_size_; }

    std::span<const int> element_dofs(int t) const
    {
        return { element_dofs_.data() + static_cast<std::size_t>(t) * local_size_,
                 static_cast<std::size_t>(local_size_) };
    }
    DofKind dof_kind(int dof) const;

    bool is_constrained(int dof) const { return free_index_[dof] < 0; }
    /// Position among the free DOFs, or -1 for a constrained DOF.
    int free_index(int dof) const { return free_index_[dof]; }
    const std::vector<int>& free_dofs() const { return free_dofs_; }
    std::vector<int> constrained_dofs() const;

    /// Columns are the directions of the two derivative DOFs at vertex v.
    const Eigen::Matrix2d& vertex_frame(int v) const { return frames_[v]; }

    const ElementBasis& basis(int t) const { return bases_[t]; }

    /// Jet of the finite element function with global coefficients `coeffs`.
    Jet evaluate(const Eigen::VectorXd& coeffs, int t, const Point& x) const;

    /// Gathers the element's coefficients from a global vector.
    Eigen::VectorXd gather(const Eigen::VectorXd& coeffs, int t) const;

    /// Hermite interpolant: nodal values and gradients, moments by quadrature.
    Eigen::VectorXd interpolate(const ScalarField& f) const;

    /// Expands a free-DOF vector to a full vector with zero constrained DOFs.
    Eigen::VectorXd expand(const Eigen::VectorXd& free_values) const;
    /// Restricts a full vector to its free DOFs.
    Eigen::VectorXd restrict_to_free(const Eigen::VectorXd& full) const;

  private:
    void number_dofs();
    void build_bases();

    std::shared_ptr<const Mesh> mesh_;
    int degree_ = 3;
    int local_size_ = 0;
    int num_dofs_ = 0;
    int edge_dofs_ = 0;
    int interior_dofs_ = 0;
    std::vector<int> element_dofs_;
    std::vector<Eigen::Matrix2d> frames_;
    std::vector<int> free_index_;
    std::vector<int> free_dofs_;
    std::vector<ElementBasis> bases_;
};

/// Local basis of element `t` (precomputed by the space).
const ElementBasis& local_basis(const HermiteSpace& space, int t);

/// Writes "index,value" lines with a header.
void write_dof_csv(std::ostream& os, const Eigen::VectorXd& coeffs);
Eigen::VectorXd read_dof_csv(std::istream& is);

} // namespace hermite

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "hermite/fespace.hpp"
#include "hermite/problems.hpp"
#include "hermite/quadrature.hpp"

namespace hermite {

/// Linear system over the free DOFs; constrained DOFs are eliminated.
struct SparseSystem
{
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
    Eigen::VectorXd rhs;
    /// free index -> space DOF index
    std::vector<int> free_dofs;
};

/// Volume rule used by assembly, residuals and the control field (degree 2k + 2).
QuadRule volume_rule(int degree);
/// Edge rule used for the jump terms (degree 2k).
QuadRule face_rule(int degree);

/// 2 - sqrt(1 - eps), the weight of the jump term.
double face_coefficient(double eps);

/// Geometry of one interior edge: `plus` = edge.tri[0], `minus` = edge.tri[1].
struct FaceData
{
    int edge = -1;
    int plus = -1, minus = -1;
    Point a, b;                        ///< endpoints, lower vertex index first
    Eigen::Vector2d normal, tangent;   ///< normal points out of `plus`
    double length = 0.0;
};

/// Interior-edge geometry, built once per space.
class FaceTermCache
{
  public:
    explicit FaceTermCache(const Mesh& mesh);
    const std::vector<FaceData>& faces() const { return faces_; }

  private:
    std::vector<FaceData> faces_;
};

/// Quadrature points of every element and the problem's coefficient family at
/// each of them (so point-dependent setup work runs once per mesh).
class VolumeCache
{
  public:
    VolumeCache(const HermiteSpace& space, const HjbProblem& problem);

    int points_per_element() const { return rule_.size(); }
    const QuadRule& rule() const { return rule_; }
    const Point& point(int t, int q) const { return points_[index(t, q)]; }
    double weight(int t, int q) const { return weights_[index(t, q)]; }
    const ControlFamily& family(int t, int q) const { return families_[index(t, q)]; }

  private:
    std::size_t index(int t, int q) const { return static_cast<std::size_t>(t) * rule_.size() + q; }

    QuadRule rule_;
    std::vector<Point> points_;
    std::vector<double> weights_;
    std::vector<ControlFamily> families_;
};

/// One control per volume quadrature point, indexed element-major.
struct ControlField
{
    int points_per_element = 0;
    std::vector<Control> alpha;

    const Control& at(int t, int q) const { return alpha[static_cast<std::size_t>(t) * points_per_element + q]; }
};

/// Constant control field.
ControlField uniform_control_field(const HermiteSpace& space, const Control& alpha);

/// grad w+ . n+ + grad w- . n- at edge parameters s in [0, 1] measured from
/// the lower-indexed vertex. Throws std::invalid_argument on a boundary edge.
std::vector<double> normal_jump(const HermiteSpace& space, const Eigen::VectorXd& coeffs, int edge, std::span<const double> params);

/**
 * Linear scheme for a non-divergence problem. Pure second order:
 *   sum_K (gamma L w, Lap v)_K - (2 - sqrt(1 - eps_used)) sum_F <[grad w], Lap_T v>_F;
 * with lower-order terms the test action is Lap v - lambda v on both parts.
 * Throws cordes_error if gamma is not positive at a quadrature point.
 */
SparseSystem assemble_nondiv_system(const HermiteSpace& space, const NondivProblem& problem, double eps_used);

/// Newton linearization with the control field frozen pointwise. The jump
/// weight uses `eps_used` if given, else the problem's epsilon.
SparseSystem assemble_hjb_linearization(const HermiteSpace& space,
                                        const HjbProblem& problem,
                                        const ControlField& controls,
                                        const VolumeCache& cache,
                                        std::optional<double> eps_used = std::nullopt);
SparseSystem assemble_hjb_linearization(const HermiteSpace& space,
                                        const HjbProblem& problem,
                                        const ControlField& controls,
                                        std::optional<double> eps_used = std::nullopt);

/// <M_h[u], phi_i> for every free DOF i, with F_gamma from the gamma-weighted sup.
Eigen::VectorXd hjb_residual(const HermiteSpace& space,
                             const HjbProblem& problem,
                             const Eigen::VectorXd& u,
                             const VolumeCache& cache,
                             std::optional<double> eps_used = std::nullopt);
Eigen::VectorXd hjb_residual(const HermiteSpace& space, const HjbProblem& problem, const Eigen::VectorXd& u);

/// Unweighted pointwise maximizer of the Hamiltonian at u's broken derivatives.
ControlField argmax_control_field(const HermiteSpace& space,
                                  const HjbProblem& problem,
                                  const Eigen::VectorXd& u,
                                  const VolumeCache& cache);

/// "row col value" lines (0-based free indices), one per stored entry.
void write_matrix_coo(std::ostream& os, const SparseSystem& system);

} // namespace hermite

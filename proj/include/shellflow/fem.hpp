#pragma once

#include "shellflow/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>

namespace shellflow {

using SpMat = Eigen::SparseMatrix<double>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Dirichlet bookkeeping and the standard sparse operators of the P2/P1
/// pairing on one mesh. Velocity dofs are indexed (2*node + comp); the
/// interior (zero-trace) subspace enumerates non-boundary P2 nodes.
class FemSystem {
  public:
    explicit FemSystem(const Mesh& mesh);

    const Mesh& mesh() const { return *mesh_; }

    int n_scalar() const { return mesh_->n_p2(); }
    int n_velocity() const { return 2 * mesh_->n_p2(); }
    int n_pressure() const { return mesh_->n_vertices(); }
    int n_interior_nodes() const { return static_cast<int>(interior_nodes_.size()); }
    int n_interior_vel() const { return 2 * n_interior_nodes(); }

    const std::vector<int>& interior_nodes() const { return interior_nodes_; }
    /// -1 for boundary nodes.
    int interior_index(int p2_node) const { return interior_of_node_[static_cast<size_t>(p2_node)]; }

    /// Vector P2 mass and stiffness on all dofs.
    const SpMat& vector_mass() const { return vmass_; }
    const SpMat& vector_stiffness() const { return vstiff_; }
    /// Divergence coupling: (n_pressure) x (n_velocity), entries
    /// int q div(w) dx for P1 test q and P2 vector shape w.
    const SpMat& divergence() const { return div_; }
    const SpMat& pressure_mass() const { return pmass_; }

    /// Restriction of a velocity-space operator to interior dofs.
    MatrixXd interior_dense(const SpMat& op) const;
    /// Divergence restricted to interior velocity dofs (dense, desk scale).
    MatrixXd divergence_interior_dense() const;

    VectorXd restrict_interior(const VectorXd& full) const;
    VectorXd prolongate_interior(const VectorXd& interior) const; // zero trace

  private:
    const Mesh* mesh_;
    std::vector<int> interior_nodes_;
    std::vector<int> interior_of_node_;
    SpMat vmass_, vstiff_, div_, pmass_;
};

/// Nodal interpolation of a callable.
FEField interpolate_scalar(const Mesh& m, const std::function<double(Vec2)>& f, int degree = 2);
FEField interpolate_vector(const Mesh& m, const std::function<Vec2(Vec2)>& f);

/// Field and gradient at one quadrature point.
double scalar_at_quad(const FEField& f, const Mesh::QuadPoint& qp);
Vec2 vector_at_quad(const FEField& f, const Mesh::QuadPoint& qp);
Mat2 vector_grad_at_quad(const FEField& f, const Mesh::QuadPoint& qp); // (i,j) = d_j f_i
Vec2 scalar_grad_at_quad(const FEField& f, const Mesh::QuadPoint& qp);

double l2_norm(const FEField& f);
double h1_seminorm(const FEField& f);
/// L2 norm of the pointwise divergence of a vector P2 field.
double divergence_l2(const FEField& f);

/// Net outflow of a vector P2 field through the polygonal boundary,
/// 4-point Gauss per boundary edge.
double boundary_flux(const FEField& f);

/// Weak row-divergence residual of the pointwise matrix field M(x) whose rows
/// should be divergence free: max over P2 test functions phi and rows r of
///   | int_Omega M_r . grad(phi) dx  -  oint_bdry (M_r . nu) phi ds |
/// with both integrals taken by the mesh rules. For the cofactor matrix of
/// the coordinate transform this is pure quadrature error and vanishes under
/// refinement at the rule's order.
double weak_row_divergence_residual(const Mesh& m, const std::function<Mat2(Vec2)>& M);

} // namespace shellflow

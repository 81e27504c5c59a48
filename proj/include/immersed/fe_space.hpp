#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "immersed/active_mesh.hpp"

namespace immersed {

/// Reference derivatives d^dx/dxi1^dx d^dy/dxi2^dy of the (p+1)^2 tensor
/// Lagrange functions with equispaced nodes on [0,1]^2, local index
/// a + (p+1) b for the node (a/p, b/p). xi may lie outside the unit square.
/// Throws when dx + dy > 2.
std::vector<double> shape_eval(int p, Point xi, int dx, int dy);

/// Values, gradients and second derivatives at one physical point.
struct ShapeData {
  int n = 0;
  double v[9];
  double dx[9];
  double dy[9];
  double dxx[9];
  double dxy[9];
  double dyy[9];
};

/// Continuous Q_p Lagrange space on the active elements.
class FeSpace {
 public:
  int p() const { return p_; }
  const BackgroundMesh& mesh() const { return mesh_; }
  int num_dofs() const { return static_cast<int>(dof_to_node_.size()); }
  int nloc() const { return (p_ + 1) * (p_ + 1); }
  int nodes_x() const { return p_ * mesh_.nx() + 1; }

  /// Global dofs of element e in local order; empty for exterior elements.
  std::span<const int> element_dofs(int e) const;
  Point dof_coord(int dof) const;
  /// -1 when the node is not touched by an active element.
  int node_dof(int node_i, int node_j) const { return node_to_dof_[node_j * nodes_x() + node_i]; }

  Point to_reference(int e, Point x) const;
  /// Physical values and derivatives of element e's polynomials at x; x
  /// may lie outside the element (canonical extension).
  void eval(int e, Point x, ShapeData& out) const;
  /// Physical derivative of the given multi-order.
  std::vector<double> shape(int e, Point x, int dx, int dy) const;

  /// Active elements containing each dof, in increasing element order.
  const std::vector<std::vector<int>>& dof_elements() const { return dof_elements_; }

 private:
  friend FeSpace build_space(const ActiveMesh& active, int p);
  FeSpace(BackgroundMesh mesh, int p) : mesh_(std::move(mesh)), p_(p) {}

  BackgroundMesh mesh_;
  int p_;
  std::vector<int> node_to_dof_;
  std::vector<int> dof_to_node_;
  std::vector<int> element_dofs_;  // num_elements * nloc, -1 for exterior
  std::vector<std::vector<int>> dof_elements_;
};

/// Dofs are numbered lexicographically by node (x fastest). Throws for
/// p outside {1, 2}.
FeSpace build_space(const ActiveMesh& active, int p);

using ScalarField = std::function<double(Point)>;

/// Nodal interpolant.
Eigen::VectorXd interpolate(const FeSpace& space, const ScalarField& u);

}  // namespace immersed

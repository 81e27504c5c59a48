#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "immersed/aggregation.hpp"
#include "immersed/problem.hpp"

namespace immersed {

using SpMat = Eigen::SparseMatrix<double>;

/// Everything geometric and discrete that a solve needs.
struct Discretization {
  ActiveMesh active;
  QuadConfig quad;
  std::vector<CutQuadrature> quads;
  FeSpace space;
  std::optional<AggregateMap> agg;
  std::optional<ConstraintSet> constraints;

  const BackgroundMesh& mesh() const { return active.mesh; }
  double h() const { return active.mesh.h(); }
};

/// Classification, cut rules, space and (for agfem) constraints.
Discretization discretize(const BackgroundMesh& mesh, const LevelSet& geo, int p, const QuadConfig& quad,
                          const StabilizationSpec& stab, Execution exec = Execution::Parallel);

/// Linear system after constraints and strong boundary elimination.
///
/// Three index spaces appear: dofs of the full space, coefficients (equal to
/// the dofs, or the well-posed dofs under agfem) and unknowns (coefficients
/// without strong Dirichlet ones).
struct SparseSystem {
  SpMat A;
  Eigen::VectorXd b;
  std::vector<int> unknowns;          // coefficient index per unknown
  std::vector<int> coeff_to_unknown;  // -1 for strongly imposed coefficients
  Eigen::VectorXd fixed;              // strong values in coefficient space
  SpMat full;                         // dof-space operator including s_h
  SpMat stab;                         // dof-space s_h alone
  Eigen::VectorXd full_rhs;
  std::optional<SpMat> C;
  std::vector<double> beta;  // Nitsche parameter per element, 0 off the Dirichlet cut

  int size() const { return static_cast<int>(unknowns.size()); }
  /// Unknown vector to dof coefficients, strong values included.
  Eigen::VectorXd expand(const Eigen::VectorXd& x) const;
  /// Unknown vector to dof coefficients with zero strong values.
  Eigen::VectorXd expand_homogeneous(const Eigen::VectorXd& x) const;
};

/// 2 lambda_max of E v = lambda G v on element e, with G's near-nullspace
/// (eigenvalues below 1e-12 lambda_max) projected out. Throws "degenerate cut"
/// when G vanishes.
double nitsche_parameter_local(const Discretization& d, int e);

/// Local Nitsche parameter on every element carrying cut boundary points.
std::vector<double> nitsche_parameters(const Discretization& d, const ProblemSpec& prob,
                                       const StabilizationSpec& stab);

SparseSystem assemble(const Discretization& d, const ProblemSpec& prob, const StabilizationSpec& stab,
                      Execution exec = Execution::Parallel);

/// Face-based ghost penalty in dof space.
SpMat ghost_penalty_face(const FeSpace& space, const std::vector<int>& faces, const std::vector<double>& tau,
                         bool neumann_scaling, Execution exec = Execution::Parallel);

enum class ElementGhost { S0, S1 };

/// Element-based ghost penalty over the full background element pairs.
SpMat ghost_penalty_element(const FeSpace& space, const std::vector<int>& faces, double tau, ElementGhost variant,
                            Execution exec = Execution::Parallel);

/// s_h for the given mode, zero matrix for none and agfem.
SpMat stabilization_matrix(const Discretization& d, const StabilizationSpec& stab,
                           Execution exec = Execution::Parallel);

/// Dofs on the ambient box boundary (the strongly imposed set before
/// constraints).
std::vector<int> box_dofs(const FeSpace& space);

/// Dense factor G with A = G^T G for the unknowns of a Neumann-cut system,
/// built from eigen-decomposed element contributions so that small cut
/// elements keep their relative accuracy. Columns follow `sys.unknowns`.
Eigen::MatrixXd gram_factor(const Discretization& d, const SparseSystem& sys, const StabilizationSpec& stab);

}  // namespace immersed

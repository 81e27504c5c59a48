#pragma once

#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "immersed/fe_space.hpp"

namespace immersed {

/// Element aggregates. Every active element belongs to exactly one
/// aggregate; aggregates are numbered by increasing root element id.
struct AggregateMap {
  std::vector<char> seed;         // well-posed seed elements
  std::vector<int> aggregate_of;  // -1 on exterior elements
  std::vector<int> parent;        // neighbour attached to, self for seeds
  std::vector<int> chain;         // steps to the root, 0 for seeds
  std::vector<int> roots;         // per aggregate
  std::vector<std::vector<int>> members;

  int num_aggregates() const { return static_cast<int>(roots.size()); }
  int root_of(int e) const { return roots[aggregate_of[e]]; }
  /// Elements from e up to and including its root.
  std::vector<int> path(int e) const;
};

/// Front-marching aggregation. Seeds are interior elements and cut elements
/// with eta > eta_star. Throws when a cut element cannot reach a seed through
/// face neighbours.
AggregateMap aggregate(const ActiveMesh& active, double eta_star);

struct DofClassification {
  std::vector<char> well_posed;
  std::vector<int> owner;     // owning aggregate for ill-posed dofs, -1 otherwise
  std::vector<int> wp_index;  // position among well-posed dofs, -1 otherwise
  std::vector<int> wp_dofs;
  std::vector<int> ip_dofs;

  int num_well_posed() const { return static_cast<int>(wp_dofs.size()); }
};

/// Well-posed dofs are supported on at least one seed; each ill-posed dof is
/// owned by the lowest-id aggregate containing one of its elements.
DofClassification classify_dofs(const FeSpace& space, const AggregateMap& agg);

struct ConstraintSet {
  DofClassification dofs;
  /// Per dof: (well-posed dof, coefficient); identity for well-posed dofs.
  std::vector<std::vector<std::pair<int, double>>> rows;
  /// Extension matrix, num_dofs x num_well_posed.
  Eigen::SparseMatrix<double> C;
};

/// c_ij = phi_j(alpha_i) with phi_j the root basis of the owner aggregate.
/// Throws when the owner's root lies more than `max_chain` steps from the
/// dof's elements.
ConstraintSet build_constraints(const FeSpace& space, const AggregateMap& agg, const DofClassification& dofs,
                                int max_chain = 10);

/// Nodal values at well-posed dofs, extended to the ill-posed ones.
Eigen::VectorXd interpolate(const FeSpace& space, const ConstraintSet& cs, const ScalarField& u);

}  // namespace immersed

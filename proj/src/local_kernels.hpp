#pragma once

// Element and face kernels shared by assembly, the Gram factor and norms.

#include <vector>

#include <Eigen/Dense>

#include "immersed/assembly.hpp"

namespace immersed::detail {

struct LocalMatrix {
  std::vector<int> dofs;
  Eigen::MatrixXd K;
};

/// Bulk stiffness on T n Omega.
LocalMatrix element_stiffness(const Discretization& d, int e);

LocalMatrix face_ghost_local(const FeSpace& space, int face, const std::vector<double>& tau, bool neumann_scaling);
LocalMatrix element_ghost_local(const FeSpace& space, int face, double tau, ElementGhost variant);

/// Ghost local matrices of the configured mode, one per ghost face.
std::vector<LocalMatrix> ghost_locals(const Discretization& d, const StabilizationSpec& stab, Execution exec);

/// Sums local matrices in the given order; the result does not depend on
/// how the locals were computed.
SpMat merge(const std::vector<LocalMatrix>& locals, int n);

template <class F>
void for_each_index(int n, Execution exec, F&& f) {
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (int k = 0; k < n; ++k) f(k);
  } else {
    for (int k = 0; k < n; ++k) f(k);
  }
}

}  // namespace immersed::detail

#pragma once

#include <Eigen/Dense>

#include "immersed/assembly.hpp"

namespace immersed {

/// Extreme generalized Rayleigh quotients v^T N v / v^T D v over vectors
/// orthogonal to the all-ones vector. D must be positive definite there.
struct RayleighRange {
  double min = 0.0;
  double max = 0.0;
};
RayleighRange rayleigh_modulo_constants(const Eigen::MatrixXd& N, const Eigen::MatrixXd& D);

/// min over v (modulo constants) of (||grad v||^2_Omega + s_h(v,v)) /
/// ||grad v||^2_{Omega_h}, over V_h or, for agfem, the aggregated space.
double extended_control(const Discretization& d, const StabilizationSpec& stab);

/// max over v (modulo constants) of s_h(v,v) / ||grad v||^2_{Omega_h}.
double ghost_inverse_constant(const Discretization& d, const StabilizationSpec& stab);

}  // namespace immersed

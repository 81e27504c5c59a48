#pragma once

#include <Eigen/Dense>

#include "immersed/assembly.hpp"

namespace immersed {

/// Norms of e = u - v_h, or of v_h itself when no exact solution is given.
/// Boundary terms run over the Dirichlet cut boundary only.
struct FieldNorms {
  double l2 = 0.0;       // ||e||_Omega
  double h1_semi = 0.0;  // ||grad e||_Omega
  double energy = 0.0;   // ||grad e||^2 + h^-1 ||e||^2_G + h ||d_n e||^2_G
  double beta = 0.0;     // ||grad e||^2 + ||beta^1/2 e||^2_G + ||beta^-1/2 d_n e||^2_G
  double energy_star = 0.0;  // energy^2 + s_h, with s_h taken of the discrete part
  double s_h = 0.0;
};

/// `coeffs` are dof coefficients. For an exact solution the stabilization
/// term uses s_h(I_h u - v_h).
FieldNorms field_norms(const Discretization& d, const SparseSystem& sys, const StabilizationSpec& stab,
                       const ProblemSpec& prob, const Eigen::VectorXd& coeffs,
                       const ManufacturedSolution* exact = nullptr);

/// s_h(v, v) evaluated from jumps at quadrature points rather than through
/// the matrix, so round-off stays relative to the jumps themselves.
double ghost_penalty_value(const Discretization& d, const StabilizationSpec& stab, const Eigen::VectorXd& coeffs);

/// Bulk gradient matrices in dof space: over Omega and over the full active
/// elements.
SpMat stiffness_physical(const Discretization& d);
SpMat stiffness_active(const Discretization& d);
/// Mass matrix over Omega in dof space.
SpMat mass_physical(const Discretization& d);

}  // namespace immersed

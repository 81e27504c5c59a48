#include "immersed/stability.hpp"

#include <Eigen/Eigenvalues>

#include "immersed/norms.hpp"

namespace immersed {

RayleighRange rayleigh_modulo_constants(const Eigen::MatrixXd& N, const Eigen::MatrixXd& D) {
  const int n = static_cast<int>(N.rows());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd::Ones(n, 1));
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd B = Q.rightCols(n - 1);
  Eigen::MatrixXd Nq = B.transpose() * N * B, Dq = B.transpose() * D * B;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Nq, Dq, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

namespace {

// Restricts a dof-space form to the coefficients of the working space.
Eigen::MatrixXd in_space(const Discretization& d, const SpMat& M) {
  if (!d.constraints) return Eigen::MatrixXd(M);
  const SpMat& C = d.constraints->C;
  return Eigen::MatrixXd(SpMat(C.transpose() * M * C));
}

}  // namespace

double extended_control(const Discretization& d, const StabilizationSpec& stab) {
  SpMat num = stiffness_physical(d);
  if (stab.is_ghost()) num += stabilization_matrix(d, stab);
  return rayleigh_modulo_constants(in_space(d, num), in_space(d, stiffness_active(d))).min;
}

double ghost_inverse_constant(const Discretization& d, const StabilizationSpec& stab) {
  return rayleigh_modulo_constants(in_space(d, stabilization_matrix(d, stab)), in_space(d, stiffness_active(d))).max;
}

}  // namespace immersed

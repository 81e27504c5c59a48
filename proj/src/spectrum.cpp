#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "immersed/solvers.hpp"

namespace immersed {

CondMethod parse_cond_method(std::string_view s) {
  if (s == "dense") return CondMethod::Dense;
  if (s == "lanczos") return CondMethod::Lanczos;
  throw std::invalid_argument("unknown condition-number method '" + std::string(s) + "'");
}

namespace {

Spectrum finish(double lmin, double lmax) {
  if (!(lmin > 0.0)) throw std::runtime_error("indefinite/singular matrix (lambda_min = " + std::to_string(lmin) + ")");
  return {lmax / lmin, lmin, lmax};
}

// Largest eigenvalue by Lanczos with full reorthogonalization.
double lanczos_max(const SpMat& A, int steps) {
  const int n = static_cast<int>(A.rows());
  steps = std::min(steps, n);
  std::mt19937_64 rng(42);
  std::normal_distribution<double> N01;
  Eigen::MatrixXd Q(n, steps);
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) q[i] = N01(rng);
  q.normalize();
  std::vector<double> alpha, beta;
  for (int k = 0; k < steps; ++k) {
    Q.col(k) = q;
    Eigen::VectorXd w = A * q;
    double a = q.dot(w);
    alpha.push_back(a);
    w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
    w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
    double b = w.norm();
    if (k + 1 == steps || b < 1e-14 * std::abs(a)) break;
    beta.push_back(b);
    q = w / b;
  }
  const int m = static_cast<int>(alpha.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

// Smallest eigenvalue by inverse iteration, CG for the inner solves.
double inverse_iteration_min(const SpMat& A) {
  const int n = static_cast<int>(A.rows());
  std::mt19937_64 rng(43);
  std::normal_distribution<double> N01;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = N01(rng);
  v.normalize();
  JacobiPreconditioner jac(A);
  double rq = v.dot(A * v);
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd y;
    SolveReport rep;
    try {
      rep = pcg(A, v, y, &jac, {.tol = 1e-13, .maxit = 20 * n});
    } catch (const std::runtime_error&) {
      throw std::runtime_error("indefinite/singular matrix (CG breakdown in inverse iteration)");
    }
    v = y.normalized();
    double next = v.dot(A * v);
    bool done = std::abs(next - rq) <= 1e-12 * std::abs(next);
    rq = next;
    if (done) break;
  }
  return rq;
}

}  // namespace

Spectrum condition_number_dense(const Eigen::MatrixXd& A) {
  if (A.rows() > kDenseLimit) throw std::invalid_argument("dense eigensolve limited to N <= 4000");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return finish(es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff());
}

Spectrum condition_number(const SpMat& A, CondMethod method) {
  if (method == CondMethod::Dense) return condition_number_dense(Eigen::MatrixXd(A));
  for (int i = 0; i < A.rows(); ++i)
    if (!(A.coeff(i, i) > 0.0)) throw std::runtime_error("indefinite/singular matrix (non-positive diagonal)");
  double lmax = lanczos_max(A, 200);
  return finish(inverse_iteration_min(A), lmax);
}

Spectrum condition_number_from_factor(const Eigen::MatrixXd& G) {
  if (G.cols() > kDenseLimit) throw std::invalid_argument("dense factorization limited to N <= 4000");
  if (G.rows() < G.cols()) throw std::runtime_error("indefinite/singular matrix (rank-deficient factor)");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(G);
  const auto& s = svd.singularValues();
  double smax = s.maxCoeff(), smin = s.minCoeff();
  return finish(smin * smin, smax * smax);
}

SpMat jacobi_scale(const SpMat& A) {
  Eigen::VectorXd d = A.diagonal();
  Eigen::VectorXd s(d.size());
  for (int i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0)) throw std::invalid_argument("jacobi scaling needs a positive diagonal");
    s[i] = 1.0 / std::sqrt(d[i]);
  }
  return SpMat(s.asDiagonal() * A * s.asDiagonal());
}

Eigen::MatrixXd jacobi_scale_factor(const Eigen::MatrixXd& G) {
  Eigen::VectorXd s = G.colwise().norm().transpose();
  for (int i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0)) throw std::invalid_argument("jacobi scaling needs a positive diagonal");
    s[i] = 1.0 / s[i];
  }
  return G * s.asDiagonal();
}

}  // namespace immersed

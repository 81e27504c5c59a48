#include <chrono>
#include <stdexcept>

#include "immersed/solvers.hpp"

namespace immersed {

ResidualNorm parse_residual_norm(std::string_view s) {
  if (s == "precond") return ResidualNorm::Preconditioned;
  if (s == "plain") return ResidualNorm::Plain;
  throw std::invalid_argument("unknown residual norm '" + std::string(s) + "'");
}

std::string to_string(ResidualNorm n) { return n == ResidualNorm::Plain ? "plain" : "precond"; }

SolveReport pcg(const SpMat& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, const Preconditioner* M,
                SolveOptions opts) {
  auto t0 = std::chrono::steady_clock::now();
  const int n = static_cast<int>(b.size());
  const int maxit = opts.maxit < 0 ? 10 * n : opts.maxit;
  auto precondition = [&](const Eigen::VectorXd& r) { return M ? M->apply(r) : r; };

  SolveReport rep;
  x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = precondition(r);
  auto measure = [&] { return opts.norm == ResidualNorm::Plain ? r.norm() : z.norm(); };
  const double z0 = measure();
  auto finish = [&] {
    rep.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  };
  if (z0 == 0.0) {
    rep.converged = true;
    rep.history.push_back(0.0);
    return finish();
  }
  rep.history.push_back(1.0);
  rep.residual = 1.0;

  Eigen::VectorXd p = z, Ap(n), r_old;
  double rz = r.dot(z);
  for (int k = 0; k < maxit; ++k) {
    Ap.noalias() = A * p;
    double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) throw std::runtime_error("matrix not SPD");
    double alpha = rz / pAp;
    x.noalias() += alpha * p;
    if (opts.flexible) r_old = r;
    r.noalias() -= alpha * Ap;
    z = precondition(r);
    rep.iterations = k + 1;
    rep.residual = measure() / z0;
    rep.history.push_back(rep.residual);
    if (rep.residual <= opts.tol) {
      rep.converged = true;
      break;
    }
    double rz_new = r.dot(z);
    double beta = opts.flexible ? z.dot(r - r_old) / rz : rz_new / rz;
    rz = rz_new;
    p = z + beta * p;
  }
  return finish();
}

}  // namespace immersed

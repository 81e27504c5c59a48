#include "immersed/assembly.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "local_kernels.hpp"

namespace immersed {

Discretization discretize(const BackgroundMesh& mesh, const LevelSet& geo, int p, const QuadConfig& quad,
                          const StabilizationSpec& stab, Execution exec) {
  ActiveMesh active = classify_elements(mesh, geo, quad, exec);
  auto quads = build_cut_quadratures(active, quad, exec);
  FeSpace space = build_space(active, p);
  Discretization d{std::move(active), quad, std::move(quads), std::move(space), std::nullopt, std::nullopt};
  if (stab.mode == StabMode::AgFem) {
    d.agg = aggregate(d.active, stab.eta_star);
    d.constraints = build_constraints(d.space, *d.agg, classify_dofs(d.space, *d.agg), stab.max_chain);
  }
  return d;
}

namespace detail {

SpMat merge(const std::vector<LocalMatrix>& locals, int n) {
  std::size_t nnz = 0;
  for (const auto& l : locals) nnz += l.K.size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nnz);
  for (const auto& l : locals)
    for (int c = 0; c < l.K.cols(); ++c)
      for (int r = 0; r < l.K.rows(); ++r)
        if (l.K(r, c) != 0.0) trip.emplace_back(l.dofs[r], l.dofs[c], l.K(r, c));
  SpMat A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

LocalMatrix element_stiffness(const Discretization& d, int e) {
  auto dofs = d.space.element_dofs(e);
  const int nl = d.space.nloc();
  LocalMatrix lm{{dofs.begin(), dofs.end()}, Eigen::MatrixXd::Zero(nl, nl)};
  ShapeData s;
  Eigen::Map<const Eigen::VectorXd> gx(s.dx, nl), gy(s.dy, nl);
  for (const auto& q : d.quads[e].bulk) {
    d.space.eval(e, q.x, s);
    lm.K.noalias() += q.w * (gx * gx.transpose() + gy * gy.transpose());
  }
  return lm;
}

}  // namespace detail

double nitsche_parameter_local(const Discretization& d, int e) {
  const int nl = d.space.nloc();
  Eigen::MatrixXd G = detail::element_stiffness(d, e).K;
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(nl, nl);
  ShapeData s;
  Eigen::VectorXd dn(nl);
  for (const auto& b : d.quads[e].boundary) {
    d.space.eval(e, b.x, s);
    for (int k = 0; k < nl; ++k) dn[k] = b.normal.x * s.dx[k] + b.normal.y * s.dy[k];
    E.noalias() += b.w * dn * dn.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eg(G);
  double gmax = eg.eigenvalues().maxCoeff();
  if (!(gmax > 0.0)) throw std::runtime_error("degenerate cut in element " + std::to_string(e));
  std::vector<int> keep;
  for (int k = 0; k < nl; ++k)
    if (eg.eigenvalues()[k] > 1e-12 * gmax) keep.push_back(k);
  Eigen::MatrixXd W(nl, keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k)
    W.col(k) = eg.eigenvectors().col(keep[k]) / std::sqrt(eg.eigenvalues()[keep[k]]);
  Eigen::MatrixXd M = W.transpose() * E * W;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(M, Eigen::EigenvaluesOnly);
  return 2.0 * std::max(em.eigenvalues().maxCoeff(), 0.0);
}

std::vector<double> nitsche_parameters(const Discretization& d, const ProblemSpec& prob,
                                       const StabilizationSpec& stab) {
  std::vector<double> beta(d.mesh().num_elements(), 0.0);
  if (prob.cut_bc != CutBoundary::Dirichlet) return beta;
  bool local = stab.effective_beta_mode() == BetaMode::Local;
  for (int e : d.active.active) {
    if (d.quads[e].boundary.empty()) continue;
    beta[e] = local ? nitsche_parameter_local(d, e) : stab.beta_c / d.h();
  }
  return beta;
}

std::vector<int> box_dofs(const FeSpace& space) {
  std::vector<int> out;
  double tol = 1e-12 * space.mesh().h();
  for (int i = 0; i < space.num_dofs(); ++i)
    if (space.mesh().on_box_boundary(space.dof_coord(i), tol)) out.push_back(i);
  return out;
}

Eigen::VectorXd SparseSystem::expand(const Eigen::VectorXd& x) const {
  Eigen::VectorXd c = fixed;
  for (std::size_t k = 0; k < unknowns.size(); ++k) c[unknowns[k]] = x[k];
  return C ? Eigen::VectorXd(*C * c) : c;
}

Eigen::VectorXd SparseSystem::expand_homogeneous(const Eigen::VectorXd& x) const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(fixed.size());
  for (std::size_t k = 0; k < unknowns.size(); ++k) c[unknowns[k]] = x[k];
  return C ? Eigen::VectorXd(*C * c) : c;
}

SparseSystem assemble(const Discretization& d, const ProblemSpec& prob, const StabilizationSpec& stab,
                      Execution exec) {
  if (stab.mode == StabMode::AgFem && !d.constraints)
    throw std::invalid_argument("agfem assembly needs aggregation constraints");
  if (stab.is_ghost())
    for (double t : stab.tau)
      if (!(t > 0.0)) throw std::invalid_argument("ghost penalty needs tau > 0");

  const auto& sol = prob.solution;
  const int n = d.space.num_dofs(), nl = d.space.nloc();
  SparseSystem sys;
  sys.beta = nitsche_parameters(d, prob, stab);

  const auto& act = d.active.active;
  std::vector<detail::LocalMatrix> locals(act.size());
  std::vector<Eigen::VectorXd> rhs(act.size());
  for (int e : d.active.cut)
    if (d.quads[e].bulk.empty()) throw std::runtime_error("missing cut quadrature for element " + std::to_string(e));

  detail::for_each_index(static_cast<int>(act.size()), exec, [&](int k) {
    int e = act[k];
    locals[k] = detail::element_stiffness(d, e);
    Eigen::MatrixXd& K = locals[k].K;
    Eigen::VectorXd F = Eigen::VectorXd::Zero(nl);
    ShapeData s;
    Eigen::Map<const Eigen::VectorXd> v(s.v, nl);
    for (const auto& q : d.quads[e].bulk) {
      d.space.eval(e, q.x, s);
      F.noalias() += (q.w * sol.f(q.x)) * v;
    }
    Eigen::VectorXd dn(nl);
    for (const auto& b : d.quads[e].boundary) {
      d.space.eval(e, b.x, s);
      if (prob.cut_bc == CutBoundary::Neumann) {
        F.noalias() += (b.w * dot(sol.grad(b.x), b.normal)) * v;
        continue;
      }
      for (int i = 0; i < nl; ++i) dn[i] = b.normal.x * s.dx[i] + b.normal.y * s.dy[i];
      double beta = sys.beta[e], g = sol.u(b.x);
      K.noalias() += b.w * (beta * v * v.transpose() - dn * v.transpose() - v * dn.transpose());
      F.noalias() += (b.w * g) * (beta * v - dn);
    }
    rhs[k] = F;
  });

  sys.stab = stabilization_matrix(d, stab, exec);
  sys.full = detail::merge(locals, n) + sys.stab;
  sys.full_rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < act.size(); ++k) {
    const auto& dofs = locals[k].dofs;
    for (int i = 0; i < nl; ++i) sys.full_rhs[dofs[i]] += rhs[k][i];
  }

  // coefficient space
  SpMat K;
  Eigen::VectorXd r;
  std::vector<int> coeff_dof;
  if (stab.mode == StabMode::AgFem) {
    sys.C = d.constraints->C;
    K = SpMat(sys.C->transpose() * sys.full * *sys.C);
    r = sys.C->transpose() * sys.full_rhs;
    coeff_dof = d.constraints->dofs.wp_dofs;
  } else {
    K = sys.full;
    r = sys.full_rhs;
    coeff_dof.resize(n);
    for (int i = 0; i < n; ++i) coeff_dof[i] = i;
  }
  const int nc = static_cast<int>(coeff_dof.size());

  std::vector<char> strong(nc, 0);
  sys.fixed = Eigen::VectorXd::Zero(nc);
  double tol = 1e-12 * d.h();
  for (int c = 0; c < nc; ++c) {
    Point x = d.space.dof_coord(coeff_dof[c]);
    if (d.mesh().on_box_boundary(x, tol)) {
      strong[c] = 1;
      sys.fixed[c] = sol.u(x);
    }
  }
  sys.coeff_to_unknown.assign(nc, -1);
  std::vector<Eigen::Triplet<double>> pt;
  for (int c = 0; c < nc; ++c)
    if (!strong[c]) {
      sys.coeff_to_unknown[c] = static_cast<int>(sys.unknowns.size());
      pt.emplace_back(c, static_cast<int>(sys.unknowns.size()), 1.0);
      sys.unknowns.push_back(c);
    }
  SpMat P(nc, static_cast<int>(sys.unknowns.size()));
  P.setFromTriplets(pt.begin(), pt.end());
  sys.A = SpMat(P.transpose() * K * P);
  sys.b = P.transpose() * (r - K * sys.fixed);
  return sys;
}

Eigen::MatrixXd gram_factor(const Discretization& d, const SparseSystem& sys, const StabilizationSpec& stab) {
  for (double b : sys.beta)
    if (b != 0.0) throw std::invalid_argument("gram factor requires a Neumann cut boundary");
  std::vector<detail::LocalMatrix> locals;
  for (int e : d.active.active) locals.push_back(detail::element_stiffness(d, e));
  for (auto& l : detail::ghost_locals(d, stab, Execution::Serial)) locals.push_back(std::move(l));

  // dof -> (unknown, weight) after constraints and strong elimination
  const int n = d.space.num_dofs();
  std::vector<std::vector<std::pair<int, double>>> map(n);
  for (int i = 0; i < n; ++i) {
    if (sys.C) {
      for (const auto& [dof, c] : d.constraints->rows[i]) {
        int u = sys.coeff_to_unknown[d.constraints->dofs.wp_index[dof]];
        if (u >= 0) map[i].push_back({u, c});
      }
    } else if (sys.coeff_to_unknown[i] >= 0) {
      map[i].push_back({sys.coeff_to_unknown[i], 1.0});
    }
  }

  std::vector<Eigen::VectorXd> rows;
  for (const auto& l : locals) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l.K);
    for (int k = 0; k < l.K.rows(); ++k) {
      double lam = es.eigenvalues()[k];
      if (!(lam > 0.0)) continue;
      Eigen::VectorXd row = Eigen::VectorXd::Zero(sys.size());
      for (int a = 0; a < l.K.rows(); ++a) {
        double coef = std::sqrt(lam) * es.eigenvectors()(a, k);
        for (const auto& [u, c] : map[l.dofs[a]]) row[u] += coef * c;
      }
      rows.push_back(std::move(row));
    }
  }
  Eigen::MatrixXd G(rows.size(), sys.size());
  for (std::size_t k = 0; k < rows.size(); ++k) G.row(k) = rows[k].transpose();
  return G;
}

}  // namespace immersed

#include "immersed/norms.hpp"

#include <cmath>

#include "local_kernels.hpp"

namespace immersed {

namespace {

double local_value(const double* basis, std::span<const int> dofs, const Eigen::VectorXd& c) {
  double v = 0.0;
  for (std::size_t k = 0; k < dofs.size(); ++k) v += c[dofs[k]] * basis[k];
  return v;
}

}  // namespace

FieldNorms field_norms(const Discretization& d, const SparseSystem& sys, const StabilizationSpec& stab,
                       const ProblemSpec& prob, const Eigen::VectorXd& coeffs, const ManufacturedSolution* exact) {
  const double h = d.h();
  double l2 = 0, h1 = 0, gam = 0, gdn = 0, beta_term = 0;
  ShapeData s;
  for (int e : d.active.active) {
    auto dofs = d.space.element_dofs(e);
    for (const auto& q : d.quads[e].bulk) {
      d.space.eval(e, q.x, s);
      double v = local_value(s.v, dofs, coeffs);
      Point g{local_value(s.dx, dofs, coeffs), local_value(s.dy, dofs, coeffs)};
      if (exact) {
        v = exact->u(q.x) - v;
        g = exact->grad(q.x) - g;
      }
      l2 += q.w * v * v;
      h1 += q.w * dot(g, g);
    }
    if (prob.cut_bc != CutBoundary::Dirichlet) continue;
    for (const auto& b : d.quads[e].boundary) {
      d.space.eval(e, b.x, s);
      double v = local_value(s.v, dofs, coeffs);
      double dn = b.normal.x * local_value(s.dx, dofs, coeffs) + b.normal.y * local_value(s.dy, dofs, coeffs);
      if (exact) {
        v = exact->u(b.x) - v;
        dn = dot(exact->grad(b.x), b.normal) - dn;
      }
      gam += b.w * v * v;
      gdn += b.w * dn * dn;
      double beta = sys.beta[e];
      if (beta > 0) beta_term += b.w * (beta * v * v + dn * dn / beta);
    }
  }
  FieldNorms n;
  n.l2 = std::sqrt(l2);
  n.h1_semi = std::sqrt(h1);
  double energy2 = h1 + gam / h + h * gdn;
  n.energy = std::sqrt(energy2);
  n.beta = std::sqrt(h1 + beta_term);
  Eigen::VectorXd w = exact ? Eigen::VectorXd(interpolate(d.space, exact->u) - coeffs) : coeffs;
  n.s_h = stab.is_ghost() ? ghost_penalty_value(d, stab, w) : 0.0;
  n.energy_star = std::sqrt(energy2 + n.s_h);
  return n;
}

double ghost_penalty_value(const Discretization& d, const StabilizationSpec& stab, const Eigen::VectorXd& c) {
  if (!stab.is_ghost()) return 0.0;
  const auto& space = d.space;
  const auto& mesh = d.mesh();
  const int p = space.p();
  const double h = d.h();
  double total = 0.0;
  ShapeData s1, s2;
  for (int fid : d.active.ghost) {
    Face f = mesh.face(fid);
    auto d1 = space.element_dofs(f.first), d2 = space.element_dofs(f.second);
    if (stab.mode == StabMode::GhostFace) {
      Cell c2 = mesh.cell(f.second);
      bool vertical = f.orientation == FaceOrientation::Vertical;
      const auto& g = gauss_legendre(p + 1);
      for (std::size_t q = 0; q < g.x.size(); ++q) {
        Point x = vertical ? Point{c2.lower.x, c2.lower.y + g.x[q] * h} : Point{c2.lower.x + g.x[q] * h, c2.lower.y};
        space.eval(f.first, x, s1);
        space.eval(f.second, x, s2);
        for (int j = 1; j <= p; ++j) {
          double scale = stab.tau_at(j) * std::pow(h, stab.neumann_scaling ? 2 * j + 1 : 2 * j - 1);
          const double* a = j == 1 ? (vertical ? s1.dx : s1.dy) : (vertical ? s1.dxx : s1.dyy);
          const double* b = j == 1 ? (vertical ? s2.dx : s2.dy) : (vertical ? s2.dxx : s2.dyy);
          double jump = local_value(a, d1, c) - local_value(b, d2, c);
          total += scale * g.w[q] * h * jump * jump;
        }
      }
    } else {
      bool s0 = stab.mode == StabMode::GhostElemS0;
      double tau = stab.tau_at(s0 ? 0 : 1);
      for (int e : {f.first, f.second})
        for (const auto& q : tensor_gauss(mesh.cell(e), p + 1)) {
          space.eval(f.first, q.x, s1);
          space.eval(f.second, q.x, s2);
          if (s0) {
            double jv = local_value(s1.v, d1, c) - local_value(s2.v, d2, c);
            total += tau * q.w / (h * h) * jv * jv;
          } else {
            double jx = local_value(s1.dx, d1, c) - local_value(s2.dx, d2, c);
            double jy = local_value(s1.dy, d1, c) - local_value(s2.dy, d2, c);
            total += tau * q.w * (jx * jx + jy * jy);
          }
        }
    }
  }
  return total;
}

SpMat stiffness_physical(const Discretization& d) {
  std::vector<detail::LocalMatrix> locals;
  for (int e : d.active.active) locals.push_back(detail::element_stiffness(d, e));
  return detail::merge(locals, d.space.num_dofs());
}

SpMat stiffness_active(const Discretization& d) {
  std::vector<detail::LocalMatrix> locals;
  const int nl = d.space.nloc();
  ShapeData s;
  Eigen::Map<const Eigen::VectorXd> gx(s.dx, nl), gy(s.dy, nl);
  for (int e : d.active.active) {
    auto dofs = d.space.element_dofs(e);
    detail::LocalMatrix lm{{dofs.begin(), dofs.end()}, Eigen::MatrixXd::Zero(nl, nl)};
    for (const auto& q : tensor_gauss(d.mesh().cell(e), d.space.p() + 1)) {
      d.space.eval(e, q.x, s);
      lm.K.noalias() += q.w * (gx * gx.transpose() + gy * gy.transpose());
    }
    locals.push_back(std::move(lm));
  }
  return detail::merge(locals, d.space.num_dofs());
}

SpMat mass_physical(const Discretization& d) {
  std::vector<detail::LocalMatrix> locals;
  const int nl = d.space.nloc();
  ShapeData s;
  Eigen::Map<const Eigen::VectorXd> v(s.v, nl);
  for (int e : d.active.active) {
    auto dofs = d.space.element_dofs(e);
    detail::LocalMatrix lm{{dofs.begin(), dofs.end()}, Eigen::MatrixXd::Zero(nl, nl)};
    for (const auto& q : d.quads[e].bulk) {
      d.space.eval(e, q.x, s);
      lm.K.noalias() += q.w * v * v.transpose();
    }
    locals.push_back(std::move(lm));
  }
  return detail::merge(locals, d.space.num_dofs());
}

}  // namespace immersed

#include <cmath>

#include "local_kernels.hpp"

namespace immersed {

namespace detail {

namespace {

std::vector<int> pair_dofs(const FeSpace& space, const Face& f) {
  auto d1 = space.element_dofs(f.first);
  auto d2 = space.element_dofs(f.second);
  std::vector<int> dofs(d1.begin(), d1.end());
  dofs.insert(dofs.end(), d2.begin(), d2.end());
  return dofs;
}

}  // namespace

LocalMatrix face_ghost_local(const FeSpace& space, int face, const std::vector<double>& tau, bool neumann_scaling) {
  const auto& mesh = space.mesh();
  Face f = mesh.face(face);
  const int p = space.p(), nl = space.nloc();
  const double h = mesh.h();
  LocalMatrix lm{pair_dofs(space, f), Eigen::MatrixXd::Zero(2 * nl, 2 * nl)};

  // the face as a segment of the second element's lower/left side
  Cell c2 = mesh.cell(f.second);
  bool vertical = f.orientation == FaceOrientation::Vertical;
  const auto& g = gauss_legendre(p + 1);
  Eigen::VectorXd jump(2 * nl);
  ShapeData s1, s2;
  for (std::size_t q = 0; q < g.x.size(); ++q) {
    Point x = vertical ? Point{c2.lower.x, c2.lower.y + g.x[q] * h} : Point{c2.lower.x + g.x[q] * h, c2.lower.y};
    double w = g.w[q] * h;
    space.eval(f.first, x, s1);
    space.eval(f.second, x, s2);
    for (int j = 1; j <= p; ++j) {
      double t = tau.empty() ? 0.0 : tau[std::min<std::size_t>(j - 1, tau.size() - 1)];
      double scale = t * std::pow(h, neumann_scaling ? 2 * j + 1 : 2 * j - 1);
      // derivatives along the fixed face normal, so the jump of any global
      // polynomial vanishes for every order j
      const double* a = j == 1 ? (vertical ? s1.dx : s1.dy) : (vertical ? s1.dxx : s1.dyy);
      const double* b = j == 1 ? (vertical ? s2.dx : s2.dy) : (vertical ? s2.dxx : s2.dyy);
      for (int k = 0; k < nl; ++k) {
        jump[k] = a[k];
        jump[nl + k] = -b[k];
      }
      lm.K.noalias() += (scale * w) * jump * jump.transpose();
    }
  }
  return lm;
}

LocalMatrix element_ghost_local(const FeSpace& space, int face, double tau, ElementGhost variant) {
  const auto& mesh = space.mesh();
  Face f = mesh.face(face);
  const int p = space.p(), nl = space.nloc();
  const double h = mesh.h();
  LocalMatrix lm{pair_dofs(space, f), Eigen::MatrixXd::Zero(2 * nl, 2 * nl)};
  Eigen::VectorXd dv(2 * nl), dx(2 * nl), dy(2 * nl);
  ShapeData s1, s2;
  for (int e : {f.first, f.second}) {
    for (const auto& q : tensor_gauss(mesh.cell(e), p + 1)) {
      space.eval(f.first, q.x, s1);
      space.eval(f.second, q.x, s2);
      for (int k = 0; k < nl; ++k) {
        dv[k] = s1.v[k], dv[nl + k] = -s2.v[k];
        dx[k] = s1.dx[k], dx[nl + k] = -s2.dx[k];
        dy[k] = s1.dy[k], dy[nl + k] = -s2.dy[k];
      }
      if (variant == ElementGhost::S0) {
        lm.K.noalias() += (tau * q.w / (h * h)) * dv * dv.transpose();
      } else {
        lm.K.noalias() += (tau * q.w) * (dx * dx.transpose() + dy * dy.transpose());
      }
    }
  }
  return lm;
}

std::vector<LocalMatrix> ghost_locals(const Discretization& d, const StabilizationSpec& stab, Execution exec) {
  const auto& faces = d.active.ghost;
  std::vector<LocalMatrix> out;
  if (!stab.is_ghost()) return out;
  out.resize(faces.size());
  for_each_index(static_cast<int>(faces.size()), exec, [&](int k) {
    switch (stab.mode) {
      case StabMode::GhostFace: out[k] = face_ghost_local(d.space, faces[k], stab.tau, stab.neumann_scaling); break;
      case StabMode::GhostElemS0:
        out[k] = element_ghost_local(d.space, faces[k], stab.tau_at(0), ElementGhost::S0);
        break;
      default: out[k] = element_ghost_local(d.space, faces[k], stab.tau_at(1), ElementGhost::S1); break;
    }
  });
  return out;
}

}  // namespace detail

SpMat ghost_penalty_face(const FeSpace& space, const std::vector<int>& faces, const std::vector<double>& tau,
                         bool neumann_scaling, Execution exec) {
  if (space.p() > 2) throw std::invalid_argument("face ghost penalty supports p <= 2");
  std::vector<detail::LocalMatrix> locals(faces.size());
  detail::for_each_index(static_cast<int>(faces.size()), exec, [&](int k) {
    locals[k] = detail::face_ghost_local(space, faces[k], tau, neumann_scaling);
  });
  return detail::merge(locals, space.num_dofs());
}

SpMat ghost_penalty_element(const FeSpace& space, const std::vector<int>& faces, double tau, ElementGhost variant,
                            Execution exec) {
  std::vector<detail::LocalMatrix> locals(faces.size());
  detail::for_each_index(static_cast<int>(faces.size()), exec, [&](int k) {
    locals[k] = detail::element_ghost_local(space, faces[k], tau, variant);
  });
  return detail::merge(locals, space.num_dofs());
}

SpMat stabilization_matrix(const Discretization& d, const StabilizationSpec& stab, Execution exec) {
  return detail::merge(detail::ghost_locals(d, stab, exec), d.space.num_dofs());
}

}  // namespace immersed

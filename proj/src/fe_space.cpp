#include "immersed/fe_space.hpp"

#include <stdexcept>
#include <string>

namespace immersed {

namespace {

// 1D Lagrange functions on equispaced nodes and their first two derivatives.
void lagrange_1d(int p, double t, double* v, double* d1, double* d2) {
  if (p == 1) {
    v[0] = 1.0 - t, v[1] = t;
    d1[0] = -1.0, d1[1] = 1.0;
    d2[0] = 0.0, d2[1] = 0.0;
  } else {
    v[0] = (2.0 * t - 1.0) * (t - 1.0);
    v[1] = 4.0 * t * (1.0 - t);
    v[2] = t * (2.0 * t - 1.0);
    d1[0] = 4.0 * t - 3.0, d1[1] = 4.0 - 8.0 * t, d1[2] = 4.0 * t - 1.0;
    d2[0] = 4.0, d2[1] = -8.0, d2[2] = 4.0;
  }
}

void check_degree(int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("unsupported polynomial degree " + std::to_string(p));
}

}  // namespace

std::vector<double> shape_eval(int p, Point xi, int dx, int dy) {
  check_degree(p);
  if (dx < 0 || dy < 0 || dx + dy > 2)
    throw std::invalid_argument("shape_eval supports derivative orders up to 2");
  double vx[3][3], vy[3][3];  // [order][node]
  lagrange_1d(p, xi.x, vx[0], vx[1], vx[2]);
  lagrange_1d(p, xi.y, vy[0], vy[1], vy[2]);
  std::vector<double> out((p + 1) * (p + 1));
  for (int b = 0; b <= p; ++b)
    for (int a = 0; a <= p; ++a) out[a + (p + 1) * b] = vx[dx][a] * vy[dy][b];
  return out;
}

std::span<const int> FeSpace::element_dofs(int e) const {
  const int* first = element_dofs_.data() + static_cast<std::size_t>(e) * nloc();
  if (*first < 0) return {};
  return {first, static_cast<std::size_t>(nloc())};
}

Point FeSpace::dof_coord(int dof) const {
  int node = dof_to_node_[dof];
  int nx = nodes_x();
  double hn = mesh_.h() / p_;
  return {mesh_.origin().x + (node % nx) * hn, mesh_.origin().y + (node / nx) * hn};
}

Point FeSpace::to_reference(int e, Point x) const {
  Cell c = mesh_.cell(e);
  return {(x.x - c.lower.x) / c.size, (x.y - c.lower.y) / c.size};
}

void FeSpace::eval(int e, Point x, ShapeData& out) const {
  Point xi = to_reference(e, x);
  double vx[3][3], vy[3][3];
  lagrange_1d(p_, xi.x, vx[0], vx[1], vx[2]);
  lagrange_1d(p_, xi.y, vy[0], vy[1], vy[2]);
  double ih = 1.0 / mesh_.h(), ih2 = ih * ih;
  out.n = nloc();
  for (int b = 0; b <= p_; ++b)
    for (int a = 0; a <= p_; ++a) {
      int k = a + (p_ + 1) * b;
      out.v[k] = vx[0][a] * vy[0][b];
      out.dx[k] = vx[1][a] * vy[0][b] * ih;
      out.dy[k] = vx[0][a] * vy[1][b] * ih;
      out.dxx[k] = vx[2][a] * vy[0][b] * ih2;
      out.dxy[k] = vx[1][a] * vy[1][b] * ih2;
      out.dyy[k] = vx[0][a] * vy[2][b] * ih2;
    }
}

std::vector<double> FeSpace::shape(int e, Point x, int dx, int dy) const {
  auto v = shape_eval(p_, to_reference(e, x), dx, dy);
  double s = 1.0;
  for (int k = 0; k < dx + dy; ++k) s /= mesh_.h();
  for (double& x : v) x *= s;
  return v;
}

FeSpace build_space(const ActiveMesh& active, int p) {
  check_degree(p);
  FeSpace s(active.mesh, p);
  const auto& mesh = active.mesh;
  const int nxn = p * mesh.nx() + 1, nyn = p * mesh.ny() + 1;
  const int nl = s.nloc();

  std::vector<char> touched(static_cast<std::size_t>(nxn) * nyn, 0);
  auto local_node = [&](int e, int a, int b) {
    auto [i, j] = mesh.element_ij(e);
    return (p * j + b) * nxn + (p * i + a);
  };
  for (int e : active.active)
    for (int b = 0; b <= p; ++b)
      for (int a = 0; a <= p; ++a) touched[local_node(e, a, b)] = 1;

  s.node_to_dof_.assign(touched.size(), -1);
  for (std::size_t n = 0; n < touched.size(); ++n)
    if (touched[n]) {
      s.node_to_dof_[n] = static_cast<int>(s.dof_to_node_.size());
      s.dof_to_node_.push_back(static_cast<int>(n));
    }

  s.element_dofs_.assign(static_cast<std::size_t>(mesh.num_elements()) * nl, -1);
  s.dof_elements_.assign(s.dof_to_node_.size(), {});
  for (int e : active.active)
    for (int b = 0; b <= p; ++b)
      for (int a = 0; a <= p; ++a) {
        int dof = s.node_to_dof_[local_node(e, a, b)];
        s.element_dofs_[static_cast<std::size_t>(e) * nl + a + (p + 1) * b] = dof;
        s.dof_elements_[dof].push_back(e);
      }
  return s;
}

Eigen::VectorXd interpolate(const FeSpace& space, const ScalarField& u) {
  Eigen::VectorXd c(space.num_dofs());
  for (int i = 0; i < space.num_dofs(); ++i) c[i] = u(space.dof_coord(i));
  return c;
}

}  // namespace immersed
